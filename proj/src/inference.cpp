#include "hmmclass/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hmmclass/error.hpp"
#include "hmmclass/parallel.hpp"

namespace hmmclass {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Neumaier running sum; the trellis adds one log term per step and tau can
// reach 1e5 and beyond.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    carry_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

double gaussian_log_density(double value, double mean, double variance) {
  const double d = value - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + d * d / variance);
}

void check_state(const HmmModel& model, std::size_t state) {
  if (state >= model.n_states()) {
    throw HmmError(ErrorCode::InvalidObservation,
                   "state " + std::to_string(state) + " outside model with " +
                       std::to_string(model.n_states()) + " states");
  }
}

// log emission density of state j at step t, unscaled.
double log_emission(const HmmModel& model, const ObservationSequence& seq, std::size_t t,
                    std::size_t j) {
  if (seq.kind() == EmissionKind::Gaussian) {
    const auto& g = model.gaussian();
    return gaussian_log_density(seq.real_values()[t], g.means[j], g.variances[j]);
  }
  return std::log(model.discrete().obs(j, seq.symbol_values()[t]));
}

double raw_emission(const HmmModel& model, const ObservationSequence& seq, std::size_t t,
                    std::size_t j) {
  if (seq.kind() == EmissionKind::Gaussian) {
    return emission_density(model, j, seq.real_values()[t]);
  }
  return model.discrete().obs(j, seq.symbol_values()[t]);
}

}  // namespace

double emission_density(const HmmModel& model, std::size_t state, double value) {
  check_state(model, state);
  if (model.kind() != EmissionKind::Gaussian) {
    throw HmmError(ErrorCode::TypeMismatch, "real observation given to discrete model");
  }
  const auto& g = model.gaussian();
  const double var = g.variances[state];
  const double d = value - g.means[state];
  return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

double emission_density(const HmmModel& model, std::size_t state, Symbol symbol) {
  check_state(model, state);
  if (model.kind() != EmissionKind::Discrete) {
    throw HmmError(ErrorCode::TypeMismatch, "symbol observation given to gaussian model");
  }
  const auto& obs = model.discrete().obs;
  if (symbol.index >= obs.cols()) {
    throw HmmError(ErrorCode::InvalidObservation,
                   "symbol " + std::to_string(symbol.index) + " outside [0, " +
                       std::to_string(obs.cols()) + ")");
  }
  return obs(state, symbol.index);
}

EmissionTable emission_table(const HmmModel& model, const ObservationSequence& seq) {
  check_compatible(model, seq);
  const std::size_t tau = seq.size();
  const std::size_t n = model.n_states();
  EmissionTable table{Matrix(tau, n), std::vector<double>(tau, 0.0)};

  if (seq.kind() == EmissionKind::Discrete) {
    const auto& obs = model.discrete().obs;
    const auto symbols = seq.symbol_values();
    for (std::size_t t = 0; t < tau; ++t) {
      for (std::size_t j = 0; j < n; ++j) table.density(t, j) = obs(j, symbols[t]);
    }
    return table;
  }

  const auto& g = model.gaussian();
  const auto values = seq.real_values();
  for (std::size_t t = 0; t < tau; ++t) {
    auto row = table.density.row(t);
    double top = kNegInf;
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = gaussian_log_density(values[t], g.means[j], g.variances[j]);
      top = std::max(top, row[j]);
    }
    for (std::size_t j = 0; j < n; ++j) row[j] = std::exp(row[j] - top);
    table.log_offset[t] = top;
  }
  return table;
}

TrellisResult forward(const HmmModel& model, const EmissionTable& table) {
  const std::size_t tau = table.density.rows();
  const std::size_t n = model.n_states();
  if (tau == 0) throw HmmError(ErrorCode::EmptySequence, "observation sequence is empty");

  TrellisResult out;
  out.scaled_alpha = Matrix(tau, n);
  out.scale_factors.assign(tau, kInf);
  out.emission_log_offsets = table.log_offset;

  CompensatedSum log_lik;
  for (std::size_t t = 0; t < tau; ++t) {
    auto alpha = out.scaled_alpha.row(t);
    const auto e = table.density.row(t);
    if (t == 0) {
      for (std::size_t j = 0; j < n; ++j) alpha[j] = model.pi[j] * e[j];
    } else {
      const auto prev = out.scaled_alpha.row(t - 1);
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += prev[i] * model.trans(i, j);
        alpha[j] = acc * e[j];
      }
    }
    double c = 0.0;
    for (std::size_t j = 0; j < n; ++j) c += alpha[j];
    if (!(c > 0.0)) {
      for (std::size_t j = 0; j < n; ++j) alpha[j] = 0.0;
      out.log_likelihood = kNegInf;
      return out;
    }
    const double scale = 1.0 / c;
    for (std::size_t j = 0; j < n; ++j) alpha[j] *= scale;
    out.scale_factors[t] = scale;
    log_lik.add(table.log_offset[t] - std::log(scale));
  }
  out.log_likelihood = log_lik.value();
  return out;
}

TrellisResult forward(const HmmModel& model, const ObservationSequence& seq) {
  return forward(model, emission_table(model, seq));
}

Matrix backward(const HmmModel& model, const EmissionTable& table,
                std::span<const double> scale_factors) {
  const std::size_t tau = table.density.rows();
  const std::size_t n = model.n_states();
  if (scale_factors.size() != tau) {
    throw HmmError(ErrorCode::LengthMismatch,
                   "sequence has " + std::to_string(tau) + " steps but " +
                       std::to_string(scale_factors.size()) + " scale factors were given");
  }
  for (const double s : scale_factors) {
    if (!std::isfinite(s)) {
      throw HmmError(ErrorCode::ImpossibleSequence,
                     "sequence has zero probability under the model");
    }
  }

  Matrix beta(tau, n);
  for (std::size_t j = 0; j < n; ++j) beta(tau - 1, j) = 1.0;
  std::vector<double> weighted(n);
  for (std::size_t t = tau - 1; t-- > 0;) {
    const auto e = table.density.row(t + 1);
    const auto next = beta.row(t + 1);
    for (std::size_t j = 0; j < n; ++j) weighted[j] = e[j] * next[j];
    auto cur = beta.row(t);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += model.trans(i, j) * weighted[j];
      cur[i] = acc * scale_factors[t + 1];
    }
  }
  return beta;
}

Matrix backward(const HmmModel& model, const ObservationSequence& seq,
                std::span<const double> scale_factors) {
  return backward(model, emission_table(model, seq), scale_factors);
}

TrellisResult forward_backward(const HmmModel& model, const ObservationSequence& seq) {
  const auto table = emission_table(model, seq);
  auto trellis = forward(model, table);
  trellis.scaled_beta = backward(model, table, trellis.scale_factors);
  return trellis;
}

double log_likelihood(const HmmModel& model, const ObservationSequence& seq) {
  return forward(model, seq).log_likelihood;
}

std::vector<double> log_likelihoods(const HmmModel& model,
                                    std::span<const ObservationSequence> seqs,
                                    Execution exec) {
  std::vector<double> out(seqs.size());
  for_each_index(seqs.size(), exec, [&](std::size_t k) { out[k] = log_likelihood(model, seqs[k]); });
  return out;
}

PosteriorStats posteriors(const HmmModel& model, const ObservationSequence& seq) {
  const auto table = emission_table(model, seq);
  const auto trellis = forward(model, table);
  if (trellis.log_likelihood == kNegInf) {
    throw HmmError(ErrorCode::ImpossibleSequence, "sequence has zero probability under the model");
  }
  const Matrix beta = backward(model, table, trellis.scale_factors);
  const std::size_t tau = table.density.rows();
  const std::size_t n = model.n_states();

  PosteriorStats stats{Matrix(tau, n), std::vector<Matrix>(tau - 1, Matrix(n, n))};
  for (std::size_t t = 0; t < tau; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      stats.gamma(t, j) = trellis.scaled_alpha(t, j) * beta(t, j);
    }
  }
  for (std::size_t t = 0; t + 1 < tau; ++t) {
    const auto e = table.density.row(t + 1);
    const double scale = trellis.scale_factors[t + 1];
    auto& xi = stats.xi[t];
    for (std::size_t i = 0; i < n; ++i) {
      const double a = trellis.scaled_alpha(t, i) * scale;
      for (std::size_t j = 0; j < n; ++j) {
        xi(i, j) = a * model.trans(i, j) * e[j] * beta(t + 1, j);
      }
    }
  }
  return stats;
}

ViterbiResult viterbi(const HmmModel& model, const ObservationSequence& seq) {
  check_compatible(model, seq);
  const std::size_t tau = seq.size();
  const std::size_t n = model.n_states();

  Matrix log_trans(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) log_trans(i, j) = std::log(model.trans(i, j));
  }

  std::vector<double> delta(n), next(n);
  std::vector<std::size_t> back(tau * n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    delta[j] = std::log(model.pi[j]) + log_emission(model, seq, 0, j);
  }
  for (std::size_t t = 1; t < tau; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double cand = delta[i] + log_trans(i, j);
        if (cand > best) {
          best = cand;
          arg = i;
        }
      }
      back[t * n + j] = arg;
      next[j] = best + log_emission(model, seq, t, j);
    }
    std::swap(delta, next);
  }

  ViterbiResult out;
  out.path.assign(tau, 0);
  std::size_t state = 0;
  double best = kNegInf;
  for (std::size_t j = 0; j < n; ++j) {
    if (delta[j] > best) {
      best = delta[j];
      state = j;
    }
  }
  out.log_joint = best;
  for (std::size_t t = tau; t-- > 0;) {
    out.path[t] = state;
    if (t > 0) state = back[t * n + state];
  }
  return out;
}

double brute_force_likelihood(const HmmModel& model, const ObservationSequence& seq) {
  check_compatible(model, seq);
  const std::size_t tau = seq.size();
  const std::size_t n = model.n_states();
  if (std::pow(static_cast<double>(n), static_cast<double>(tau)) > kMaxEnumeratedPaths) {
    throw HmmError(ErrorCode::InstanceTooLarge,
                   std::to_string(n) + "^" + std::to_string(tau) + " paths exceed the limit");
  }

  Matrix e(tau, n);
  for (std::size_t t = 0; t < tau; ++t) {
    for (std::size_t j = 0; j < n; ++j) e(t, j) = raw_emission(model, seq, t, j);
  }

  // Odometer over state paths, last position fastest.
  std::vector<std::size_t> path(tau, 0);
  double total = 0.0;
  while (true) {
    double p = model.pi[path[0]] * e(0, path[0]);
    for (std::size_t t = 1; t < tau && p != 0.0; ++t) {
      p *= model.trans(path[t - 1], path[t]) * e(t, path[t]);
    }
    total += p;

    std::size_t pos = tau;
    while (pos > 0) {
      --pos;
      if (++path[pos] < n) break;
      path[pos] = 0;
      if (pos == 0) return total;
    }
  }
}

}  // namespace hmmclass
