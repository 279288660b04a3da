#pragma once

#include <vector>

#include "hmmclass/model.hpp"

namespace fixtures {

using namespace hmmclass;

inline HmmModel gaussian(std::vector<double> pi, std::vector<std::vector<double>> trans,
                         std::vector<double> means, std::vector<double> variances) {
  Matrix t(trans.size(), trans.size());
  for (std::size_t i = 0; i < trans.size(); ++i) {
    for (std::size_t j = 0; j < trans.size(); ++j) t(i, j) = trans[i][j];
  }
  return make_model(std::move(pi), std::move(t), GaussianEmission{std::move(means), std::move(variances)});
}

inline HmmModel discrete(std::vector<double> pi, std::vector<std::vector<double>> trans,
                         std::vector<std::vector<double>> obs) {
  Matrix t(trans.size(), trans.size());
  for (std::size_t i = 0; i < trans.size(); ++i) {
    for (std::size_t j = 0; j < trans.size(); ++j) t(i, j) = trans[i][j];
  }
  Matrix o(obs.size(), obs.front().size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (std::size_t k = 0; k < obs[i].size(); ++k) o(i, k) = obs[i][k];
  }
  return make_model(std::move(pi), std::move(t), DiscreteEmission{std::move(o)});
}

inline HmmModel single_standard_normal() { return gaussian({1.0}, {{1.0}}, {0.0}, {1.0}); }

// The two-state generator used for parameter recovery: means 0 and 10,
// unit variances, self-transition 0.9.
inline HmmModel two_state_reference() {
  return gaussian({0.5, 0.5}, {{0.9, 0.1}, {0.1, 0.9}}, {0.0, 10.0}, {1.0, 1.0});
}

}  // namespace fixtures
