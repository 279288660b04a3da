#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hmmclass/inference.hpp"
#include "hmmclass/matrix.hpp"
#include "hmmclass/model.hpp"

namespace hmmclass {

enum class InitScheme {
  // pi and trans rows from normalized |N(0,1)| draws; Gaussian means N(0,1),
  // variances 1.
  PaperRandom,
  // State means at evenly spaced quantiles of the pooled data, variances at
  // the pooled variance; pi and trans uniform.
  DataQuantile,
};

std::string_view to_string(InitScheme scheme) noexcept;

struct TrainingConfig {
  std::size_t n_states = kDefaultStates;
  std::size_t max_iterations = 500;
  double rel_tolerance = 1e-6;
  std::uint64_t seed = 0;
  InitScheme init_scheme = InitScheme::DataQuantile;
  double variance_floor = kDefaultVarianceFloor;
  // Discrete emission alphabet size; 0 infers max symbol + 1 from the data.
  std::size_t n_symbols = 0;
  Execution execution = Execution::Parallel;
};

// Throws InvalidConfig.
void validate(const TrainingConfig& config);

struct StarvedState {
  std::size_t iteration = 0;
  std::size_t state = 0;
};

struct TrainingReport {
  std::size_t iterations_run = 0;
  bool converged = false;
  // Entry 0 is the initial model's total log-likelihood; entry k the model
  // after k re-estimation steps.
  std::vector<double> loglik_trace;
  double final_loglik = 0.0;
  std::vector<StarvedState> starved;
};

HmmModel initialize_model(const TrainingConfig& config, EmissionKind kind,
                          std::span<const ObservationSequence> data);

// EM sufficient statistics pooled over one or more sequences.
struct SufficientStats {
  std::vector<double> initial;        // sum of gamma[0]
  Matrix transitions;                 // sum over t of xi[t]
  std::vector<double> leaving;        // sum over t < tau-1 of gamma[t]
  std::vector<double> occupancy;      // sum over t of gamma[t]
  // Gaussian: occupancy-weighted mean and sum of squared deviations.
  std::vector<double> mean;
  std::vector<double> sq_dev;
  // Discrete: symbol_counts(j, k) = sum over t with O_t = k of gamma[t][j].
  Matrix symbol_counts;
  double log_likelihood = 0.0;
  std::size_t sequences = 0;

  static SufficientStats zero(const HmmModel& shape);

  // Pools another sequence's statistics into this one. Weighted moments are
  // combined pairwise, so the result depends on merge order; callers merge in
  // sequence order.
  void merge(const SufficientStats& other);
};

SufficientStats collect_statistics(const HmmModel& model, const ObservationSequence& seq);
SufficientStats collect_statistics(const HmmModel& model, const PosteriorStats& post,
                                   const ObservationSequence& seq);

// E-step over a data set: per-sequence statistics merged in sequence order.
SufficientStats expectation(const HmmModel& model, std::span<const ObservationSequence> data,
                            Execution exec);

struct ReestimateResult {
  HmmModel model;
  std::vector<std::size_t> starved_states;
};

// Closed-form constrained M-step. States with zero occupancy keep the
// parameters they have in `previous`.
ReestimateResult reestimate(const HmmModel& previous, const SufficientStats& stats,
                            double variance_floor = kDefaultVarianceFloor);

struct PosteriorBundle {
  const PosteriorStats* posteriors;
  const ObservationSequence* sequence;
};

ReestimateResult reestimate(const HmmModel& previous, std::span<const PosteriorBundle> bundles,
                            double variance_floor = kDefaultVarianceFloor);

struct TrainingOutcome {
  HmmModel model;
  TrainingReport report;
};

TrainingOutcome baum_welch(const HmmModel& init, std::span<const ObservationSequence> data,
                           const TrainingConfig& config);

// Convergence measure |delta| / (1 + |current|).
double relative_improvement(double previous, double current) noexcept;

}  // namespace hmmclass
