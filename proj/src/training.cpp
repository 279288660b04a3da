#include "hmmclass/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hmmclass/error.hpp"
#include "hmmclass/parallel.hpp"
#include "hmmclass/random.hpp"

namespace hmmclass {

std::string_view to_string(InitScheme scheme) noexcept {
  return scheme == InitScheme::PaperRandom ? "paper" : "quantile";
}

void validate(const TrainingConfig& config) {
  auto bad = [](const std::string& what) { throw HmmError(ErrorCode::InvalidConfig, what); };
  if (config.n_states == 0) bad("n_states must be positive");
  if (config.max_iterations == 0) bad("max_iterations must be positive");
  if (!(config.rel_tolerance > 0.0 && config.rel_tolerance < 1.0)) {
    bad("rel_tolerance must lie in (0, 1)");
  }
  if (!(config.variance_floor > 0.0) || !std::isfinite(config.variance_floor)) {
    bad("variance_floor must be positive");
  }
}

double relative_improvement(double previous, double current) noexcept {
  return std::abs(current - previous) / (1.0 + std::abs(current));
}

namespace {

// Divides by the sum; a zero row becomes uniform.
void normalize(std::span<double> row) {
  double sum = 0.0;
  for (const double v : row) sum += v;
  if (!(sum > 0.0)) {
    std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(row.size()));
    return;
  }
  for (double& v : row) v /= sum;
}

void fill_abs_normal(std::span<double> row, Rng& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  for (double& v : row) v = std::abs(unit(rng));
  normalize(row);
}

std::size_t infer_symbols(const TrainingConfig& config, std::span<const ObservationSequence> data) {
  if (config.n_symbols > 0) return config.n_symbols;
  std::uint32_t top = 0;
  bool any = false;
  for (const auto& seq : data) {
    for (const auto s : seq.symbol_values()) {
      top = std::max(top, s);
      any = true;
    }
  }
  if (!any) {
    throw HmmError(ErrorCode::EmptyTrainingSet,
                   "cannot infer the symbol alphabet without data or n_symbols");
  }
  return static_cast<std::size_t>(top) + 1;
}

// Linear interpolation between order statistics (Hyndman-Fan type 7).
double quantile_sorted(std::span<const double> sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void check_data_kind(EmissionKind kind, std::span<const ObservationSequence> data) {
  for (const auto& seq : data) {
    if (seq.kind() != kind) {
      throw HmmError(ErrorCode::TypeMismatch, "training data does not match the emission kind");
    }
  }
}

}  // namespace

HmmModel initialize_model(const TrainingConfig& config, EmissionKind kind,
                          std::span<const ObservationSequence> data) {
  validate(config);
  check_data_kind(kind, data);
  const std::size_t n = config.n_states;
  HmmModel model;
  model.pi.assign(n, 1.0 / static_cast<double>(n));
  model.trans = Matrix(n, n, 1.0 / static_cast<double>(n));

  if (config.init_scheme == InitScheme::PaperRandom) {
    Rng rng = make_rng(config.seed);
    fill_abs_normal(model.pi, rng);
    for (std::size_t i = 0; i < n; ++i) fill_abs_normal(model.trans.row(i), rng);
    if (kind == EmissionKind::Gaussian) {
      std::normal_distribution<double> unit(0.0, 1.0);
      GaussianEmission g;
      for (std::size_t j = 0; j < n; ++j) g.means.push_back(unit(rng));
      g.variances.assign(n, std::max(1.0, config.variance_floor));
      model.emission = std::move(g);
    } else {
      DiscreteEmission d{Matrix(n, infer_symbols(config, data))};
      for (std::size_t j = 0; j < n; ++j) fill_abs_normal(d.obs.row(j), rng);
      model.emission = std::move(d);
    }
    validate(model, config.variance_floor);
    return model;
  }

  std::size_t total = 0;
  for (const auto& seq : data) total += seq.size();
  if (total == 0) {
    throw HmmError(ErrorCode::EmptyTrainingSet, "quantile initialization needs training data");
  }

  if (kind == EmissionKind::Gaussian) {
    std::vector<double> pooled;
    pooled.reserve(total);
    for (const auto& seq : data) {
      const auto v = seq.real_values();
      pooled.insert(pooled.end(), v.begin(), v.end());
    }
    std::sort(pooled.begin(), pooled.end());
    double mean = 0.0;
    for (const double v : pooled) mean += v;
    mean /= static_cast<double>(pooled.size());
    double ss = 0.0;
    for (const double v : pooled) ss += (v - mean) * (v - mean);
    const double variance =
        std::max(ss / static_cast<double>(pooled.size()), config.variance_floor);

    GaussianEmission g;
    for (std::size_t j = 0; j < n; ++j) {
      const double p = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
      g.means.push_back(quantile_sorted(pooled, p));
    }
    g.variances.assign(n, variance);
    model.emission = std::move(g);
  } else {
    const std::size_t n_symbols = infer_symbols(config, data);
    std::vector<std::uint32_t> pooled;
    pooled.reserve(total);
    for (const auto& seq : data) {
      const auto v = seq.symbol_values();
      pooled.insert(pooled.end(), v.begin(), v.end());
    }
    std::sort(pooled.begin(), pooled.end());
    // State j takes the j-th quantile band of the sorted symbols, with
    // add-one smoothing so no symbol starts impossible.
    DiscreteEmission d{Matrix(n, n_symbols, 1.0)};
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t lo = j * pooled.size() / n;
      const std::size_t hi = (j + 1) * pooled.size() / n;
      for (std::size_t k = lo; k < hi; ++k) {
        if (pooled[k] < n_symbols) d.obs(j, pooled[k]) += 1.0;
      }
      normalize(d.obs.row(j));
    }
    model.emission = std::move(d);
  }
  validate(model, config.variance_floor);
  return model;
}

SufficientStats SufficientStats::zero(const HmmModel& shape) {
  const std::size_t n = shape.n_states();
  SufficientStats s;
  s.initial.assign(n, 0.0);
  s.transitions = Matrix(n, n);
  s.leaving.assign(n, 0.0);
  s.occupancy.assign(n, 0.0);
  if (shape.kind() == EmissionKind::Gaussian) {
    s.mean.assign(n, 0.0);
    s.sq_dev.assign(n, 0.0);
  } else {
    s.symbol_counts = Matrix(n, shape.discrete().n_symbols());
  }
  return s;
}

void SufficientStats::merge(const SufficientStats& other) {
  const std::size_t n = occupancy.size();
  for (std::size_t j = 0; j < n; ++j) {
    initial[j] += other.initial[j];
    leaving[j] += other.leaving[j];
    for (std::size_t k = 0; k < n; ++k) transitions(j, k) += other.transitions(j, k);
  }
  if (!mean.empty()) {
    for (std::size_t j = 0; j < n; ++j) {
      const double wa = occupancy[j];
      const double wb = other.occupancy[j];
      const double w = wa + wb;
      if (!(w > 0.0)) continue;
      const double delta = other.mean[j] - mean[j];
      mean[j] += delta * (wb / w);
      sq_dev[j] += other.sq_dev[j] + delta * delta * (wa * wb / w);
    }
  } else {
    auto dst = symbol_counts.data();
    const auto src = other.symbol_counts.data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
  for (std::size_t j = 0; j < n; ++j) occupancy[j] += other.occupancy[j];
  log_likelihood += other.log_likelihood;
  sequences += other.sequences;
}

namespace {

// Adds gamma-dependent terms given the full gamma matrix.
void accumulate_gamma(SufficientStats& s, const Matrix& gamma, const ObservationSequence& seq) {
  const std::size_t tau = gamma.rows();
  const std::size_t n = gamma.cols();
  for (std::size_t j = 0; j < n; ++j) s.initial[j] = gamma(0, j);
  for (std::size_t t = 0; t < tau; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      s.occupancy[j] += gamma(t, j);
      if (t + 1 < tau) s.leaving[j] += gamma(t, j);
    }
  }
  if (seq.kind() == EmissionKind::Gaussian) {
    const auto values = seq.real_values();
    for (std::size_t j = 0; j < n; ++j) {
      const double w = s.occupancy[j];
      if (!(w > 0.0)) continue;
      double sum = 0.0;
      for (std::size_t t = 0; t < tau; ++t) sum += gamma(t, j) * values[t];
      const double m = sum / w;
      double ss = 0.0;
      for (std::size_t t = 0; t < tau; ++t) {
        const double d = values[t] - m;
        ss += gamma(t, j) * d * d;
      }
      s.mean[j] = m;
      s.sq_dev[j] = ss;
    }
  } else {
    const auto symbols = seq.symbol_values();
    for (std::size_t t = 0; t < tau; ++t) {
      for (std::size_t j = 0; j < n; ++j) s.symbol_counts(j, symbols[t]) += gamma(t, j);
    }
  }
}

}  // namespace

SufficientStats collect_statistics(const HmmModel& model, const ObservationSequence& seq) {
  const auto table = emission_table(model, seq);
  const auto trellis = forward(model, table);
  if (trellis.log_likelihood == -std::numeric_limits<double>::infinity()) {
    throw HmmError(ErrorCode::ImpossibleSequence, "sequence has zero probability under the model");
  }
  const Matrix beta = backward(model, table, trellis.scale_factors);
  const std::size_t tau = seq.size();
  const std::size_t n = model.n_states();

  SufficientStats s = SufficientStats::zero(model);
  s.log_likelihood = trellis.log_likelihood;
  s.sequences = 1;

  Matrix gamma(tau, n);
  for (std::size_t t = 0; t < tau; ++t) {
    for (std::size_t j = 0; j < n; ++j) gamma(t, j) = trellis.scaled_alpha(t, j) * beta(t, j);
  }
  std::vector<double> weighted(n);
  for (std::size_t t = 0; t + 1 < tau; ++t) {
    const auto e = table.density.row(t + 1);
    const double scale = trellis.scale_factors[t + 1];
    for (std::size_t j = 0; j < n; ++j) weighted[j] = e[j] * beta(t + 1, j);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = trellis.scaled_alpha(t, i) * scale;
      for (std::size_t j = 0; j < n; ++j) {
        s.transitions(i, j) += a * model.trans(i, j) * weighted[j];
      }
    }
  }
  accumulate_gamma(s, gamma, seq);
  return s;
}

SufficientStats collect_statistics(const HmmModel& model, const PosteriorStats& post,
                                   const ObservationSequence& seq) {
  const std::size_t tau = seq.size();
  const std::size_t n = model.n_states();
  if (post.gamma.rows() != tau || post.gamma.cols() != n || post.xi.size() + 1 != tau) {
    throw HmmError(ErrorCode::LengthMismatch, "posterior statistics do not match the sequence");
  }
  SufficientStats s = SufficientStats::zero(model);
  s.sequences = 1;
  for (const auto& xi : post.xi) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) s.transitions(i, j) += xi(i, j);
    }
  }
  accumulate_gamma(s, post.gamma, seq);
  return s;
}

SufficientStats expectation(const HmmModel& model, std::span<const ObservationSequence> data,
                            Execution exec) {
  std::vector<SufficientStats> per_sequence(data.size());
  for_each_index(data.size(), exec, [&](std::size_t k) {
    per_sequence[k] = collect_statistics(model, data[k]);
  });
  SufficientStats total = SufficientStats::zero(model);
  for (const auto& s : per_sequence) total.merge(s);
  return total;
}

ReestimateResult reestimate(const HmmModel& previous, const SufficientStats& stats,
                            double variance_floor) {
  const std::size_t n = previous.n_states();
  if (stats.occupancy.size() != n || stats.sequences == 0) {
    throw HmmError(ErrorCode::LengthMismatch, "statistics do not match the model");
  }
  ReestimateResult out{previous, {}};
  HmmModel& model = out.model;

  model.pi = stats.initial;
  normalize(model.pi);

  for (std::size_t i = 0; i < n; ++i) {
    if (!(stats.occupancy[i] > 0.0)) {
      out.starved_states.push_back(i);
      continue;
    }
    if (stats.leaving[i] > 0.0) {
      auto row = model.trans.row(i);
      for (std::size_t j = 0; j < n; ++j) row[j] = stats.transitions(i, j) / stats.leaving[i];
      normalize(row);
    }
  }

  if (auto* g = std::get_if<GaussianEmission>(&model.emission)) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = stats.occupancy[j];
      if (!(w > 0.0)) continue;
      g->means[j] = stats.mean[j];
      g->variances[j] = std::max(stats.sq_dev[j] / w, variance_floor);
    }
  } else {
    auto& obs = std::get<DiscreteEmission>(model.emission).obs;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = stats.occupancy[j];
      if (!(w > 0.0)) continue;
      auto row = obs.row(j);
      for (std::size_t k = 0; k < row.size(); ++k) row[k] = stats.symbol_counts(j, k) / w;
      normalize(row);
    }
  }
  return out;
}

ReestimateResult reestimate(const HmmModel& previous, std::span<const PosteriorBundle> bundles,
                            double variance_floor) {
  if (bundles.empty()) throw HmmError(ErrorCode::EmptyTrainingSet, "no posterior bundles");
  SufficientStats total = SufficientStats::zero(previous);
  for (const auto& b : bundles) {
    check_compatible(previous, *b.sequence);
    total.merge(collect_statistics(previous, *b.posteriors, *b.sequence));
  }
  return reestimate(previous, total, variance_floor);
}

TrainingOutcome baum_welch(const HmmModel& init, std::span<const ObservationSequence> data,
                           const TrainingConfig& config) {
  validate(config);
  if (data.empty()) throw HmmError(ErrorCode::EmptyTrainingSet, "no training sequences");
  validate(init, config.variance_floor);
  for (std::size_t k = 0; k < data.size(); ++k) {
    check_compatible(init, data[k]);
    if (data[k].size() < 2) {
      throw HmmError(ErrorCode::SequenceTooShort,
                     "training sequence " + std::to_string(k) + " has fewer than 2 steps");
    }
  }

  TrainingOutcome out{init, {}};
  TrainingReport& report = out.report;
  SufficientStats stats = expectation(out.model, data, config.execution);
  report.loglik_trace.push_back(stats.log_likelihood);

  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    auto step = reestimate(out.model, stats, config.variance_floor);
    for (const auto j : step.starved_states) report.starved.push_back({it, j});
    out.model = std::move(step.model);

    const double previous = stats.log_likelihood;
    stats = expectation(out.model, data, config.execution);
    report.loglik_trace.push_back(stats.log_likelihood);
    report.iterations_run = it;
    if (relative_improvement(previous, stats.log_likelihood) < config.rel_tolerance) {
      report.converged = true;
      break;
    }
  }
  report.final_loglik = report.loglik_trace.back();
  return out;
}

}  // namespace hmmclass
