#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "hmmclass/matrix.hpp"

namespace hmmclass {

inline constexpr double kStochasticTolerance = 1e-12;
inline constexpr double kDefaultVarianceFloor = 1e-6;
inline constexpr std::size_t kDefaultStates = 17;

enum class EmissionKind { Discrete, Gaussian };

std::string_view to_string(EmissionKind kind) noexcept;

// Index into the finite outcome space of a discrete emission table.
struct Symbol {
  std::uint32_t index = 0;
};

struct DiscreteEmission {
  // obs(j, k) = P(O_t = k | X_t = j); n_states x n_symbols.
  Matrix obs;

  std::size_t n_symbols() const noexcept { return obs.cols(); }

  friend bool operator==(const DiscreteEmission&, const DiscreteEmission&) = default;
};

struct GaussianEmission {
  std::vector<double> means;
  std::vector<double> variances;

  friend bool operator==(const GaussianEmission&, const GaussianEmission&) = default;
};

using Emission = std::variant<DiscreteEmission, GaussianEmission>;

// theta = (trans, emission, pi). Constructed through make_model() or
// validated explicitly; inference assumes a validated model.
struct HmmModel {
  std::vector<double> pi;
  Matrix trans;
  Emission emission;

  std::size_t n_states() const noexcept { return pi.size(); }
  EmissionKind kind() const noexcept {
    return std::holds_alternative<DiscreteEmission>(emission) ? EmissionKind::Discrete
                                                              : EmissionKind::Gaussian;
  }

  const DiscreteEmission& discrete() const { return std::get<DiscreteEmission>(emission); }
  const GaussianEmission& gaussian() const { return std::get<GaussianEmission>(emission); }

  friend bool operator==(const HmmModel&, const HmmModel&) = default;
};

// Throws HmmError(InvalidModel) describing the first violated invariant:
// shapes, pi / trans / obs rows stochastic within kStochasticTolerance with
// entries in [0, 1], Gaussian variances >= variance_floor and finite means.
void validate(const HmmModel& model, double variance_floor = kDefaultVarianceFloor);

HmmModel make_model(std::vector<double> pi, Matrix trans, Emission emission,
                    double variance_floor = kDefaultVarianceFloor);

// Sequence of observations; holds reals for Gaussian emission or symbol
// indices for discrete emission.
class ObservationSequence {
 public:
  ObservationSequence() = default;

  static ObservationSequence real(std::vector<double> values);
  static ObservationSequence symbols(std::vector<std::uint32_t> values);

  EmissionKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept {
    return kind_ == EmissionKind::Gaussian ? real_.size() : symbols_.size();
  }
  bool empty() const noexcept { return size() == 0; }

  std::span<const double> real_values() const noexcept { return real_; }
  std::span<const std::uint32_t> symbol_values() const noexcept { return symbols_; }

  friend bool operator==(const ObservationSequence&, const ObservationSequence&) = default;

 private:
  EmissionKind kind_ = EmissionKind::Gaussian;
  std::vector<double> real_;
  std::vector<std::uint32_t> symbols_;
};

// Emission kind match, nonempty, symbols in range. Throws TypeMismatch,
// EmptySequence or InvalidObservation.
void check_compatible(const HmmModel& model, const ObservationSequence& seq);

}  // namespace hmmclass
