#include "hmmclass/model.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "hmmclass/error.hpp"

namespace hmmclass {

std::string_view to_string(EmissionKind kind) noexcept {
  return kind == EmissionKind::Discrete ? "discrete" : "gaussian";
}

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw HmmError(ErrorCode::InvalidModel, what);
}

void check_distribution(std::span<const double> row, const std::string& name) {
  double sum = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    const double p = row[k];
    if (!(p >= 0.0 && p <= 1.0)) {
      std::ostringstream os;
      os << name << " entry " << k << " = " << p << " outside [0, 1]";
      invalid(os.str());
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << name << " sums to " << sum;
    invalid(os.str());
  }
}

}  // namespace

void validate(const HmmModel& model, double variance_floor) {
  const std::size_t n = model.n_states();
  if (n == 0) invalid("model has no states");
  if (model.trans.rows() != n || model.trans.cols() != n) {
    invalid("transition matrix shape does not match n_states");
  }
  check_distribution(model.pi, "pi");
  for (std::size_t i = 0; i < n; ++i) {
    check_distribution(model.trans.row(i), "trans row " + std::to_string(i));
  }

  if (const auto* d = std::get_if<DiscreteEmission>(&model.emission)) {
    if (d->obs.rows() != n) invalid("emission table row count does not match n_states");
    if (d->obs.cols() == 0) invalid("emission table has no symbols");
    for (std::size_t j = 0; j < n; ++j) {
      check_distribution(d->obs.row(j), "obs row " + std::to_string(j));
    }
  } else {
    const auto& g = std::get<GaussianEmission>(model.emission);
    if (g.means.size() != n || g.variances.size() != n) {
      invalid("gaussian parameter length does not match n_states");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(g.means[j])) invalid("mean " + std::to_string(j) + " not finite");
      const double v = g.variances[j];
      if (!std::isfinite(v) || v <= 0.0 || v < variance_floor) {
        std::ostringstream os;
        os << "variance " << j << " = " << v << " below floor " << variance_floor;
        invalid(os.str());
      }
    }
  }
}

HmmModel make_model(std::vector<double> pi, Matrix trans, Emission emission,
                    double variance_floor) {
  HmmModel model{std::move(pi), std::move(trans), std::move(emission)};
  validate(model, variance_floor);
  return model;
}

ObservationSequence ObservationSequence::real(std::vector<double> values) {
  ObservationSequence seq;
  seq.kind_ = EmissionKind::Gaussian;
  seq.real_ = std::move(values);
  return seq;
}

ObservationSequence ObservationSequence::symbols(std::vector<std::uint32_t> values) {
  ObservationSequence seq;
  seq.kind_ = EmissionKind::Discrete;
  seq.symbols_ = std::move(values);
  return seq;
}

void check_compatible(const HmmModel& model, const ObservationSequence& seq) {
  if (seq.kind() != model.kind()) {
    throw HmmError(ErrorCode::TypeMismatch,
                   std::string(to_string(seq.kind())) + " sequence given to " +
                       std::string(to_string(model.kind())) + " model");
  }
  if (seq.empty()) throw HmmError(ErrorCode::EmptySequence, "observation sequence is empty");
  if (seq.kind() == EmissionKind::Discrete) {
    const std::size_t n_symbols = model.discrete().n_symbols();
    const auto symbols = seq.symbol_values();
    for (std::size_t t = 0; t < symbols.size(); ++t) {
      if (symbols[t] >= n_symbols) {
        throw HmmError(ErrorCode::InvalidObservation,
                       "symbol " + std::to_string(symbols[t]) + " at t=" + std::to_string(t) +
                           " outside [0, " + std::to_string(n_symbols) + ")");
      }
    }
  } else {
    const auto values = seq.real_values();
    for (std::size_t t = 0; t < values.size(); ++t) {
      if (!std::isfinite(values[t])) {
        throw HmmError(ErrorCode::InvalidObservation,
                       "non-finite observation at t=" + std::to_string(t));
      }
    }
  }
}

}  // namespace hmmclass
