#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hmmclass/matrix.hpp"
#include "hmmclass/model.hpp"

namespace hmmclass {

// Whether a batch kernel runs its independent per-sequence work serially
// (the reference path) or fanned out with OpenMP. Results are bit-identical
// either way: per-item outputs are written to fixed slots and any reduction
// runs afterwards in item order.
enum class Execution { Serial, Parallel };

double emission_density(const HmmModel& model, std::size_t state, double value);
double emission_density(const HmmModel& model, std::size_t state, Symbol symbol);

// Per-step emission densities, tau x n_states. For Gaussian emissions each
// row is divided by its largest density (log_offset[t] holds the log of that
// divisor) so far-out observations never underflow the whole row; discrete
// rows are raw probabilities with zero offset.
struct EmissionTable {
  Matrix density;
  std::vector<double> log_offset;
};

EmissionTable emission_table(const HmmModel& model, const ObservationSequence& seq);

// Scaled trellis. Convention:
//   c_t = sum_j alpha~_t(j), scaled_alpha[t] = alpha~_t / c_t,
//   scale_factors[t] = 1 / c_t,
//   scaled_beta[tau-1] = 1, scaled_beta[t](i) = sum_j a_ij e_{t+1}(j) scaled_beta[t+1](j) / c_{t+1},
// so scaled_alpha[t] . scaled_beta[t] = 1 for every t and
//   log_likelihood = sum_t (emission_log_offsets[t] - log scale_factors[t]).
// For discrete emissions the offsets are zero and the last identity is the
// plain scale-factor sum.
// An impossible discrete sequence yields log_likelihood = -inf; the rows from
// the first impossible step onward are zero with infinite scale factors.
struct TrellisResult {
  double log_likelihood = 0.0;
  Matrix scaled_alpha;
  Matrix scaled_beta;
  std::vector<double> scale_factors;
  std::vector<double> emission_log_offsets;
};

TrellisResult forward(const HmmModel& model, const ObservationSequence& seq);
TrellisResult forward(const HmmModel& model, const EmissionTable& table);

// Fills scaled_beta given the scale factors from forward() on the same
// (model, seq). Throws LengthMismatch or ImpossibleSequence.
Matrix backward(const HmmModel& model, const ObservationSequence& seq,
                std::span<const double> scale_factors);
Matrix backward(const HmmModel& model, const EmissionTable& table,
                std::span<const double> scale_factors);

TrellisResult forward_backward(const HmmModel& model, const ObservationSequence& seq);

// log P(O | model); -inf when the sequence is impossible under the model.
double log_likelihood(const HmmModel& model, const ObservationSequence& seq);

std::vector<double> log_likelihoods(const HmmModel& model,
                                    std::span<const ObservationSequence> seqs,
                                    Execution exec = Execution::Parallel);

struct PosteriorStats {
  Matrix gamma;             // tau x n
  std::vector<Matrix> xi;   // tau-1 matrices, n x n
};

// Throws ImpossibleSequence when log P(O | model) = -inf.
PosteriorStats posteriors(const HmmModel& model, const ObservationSequence& seq);

struct ViterbiResult {
  std::vector<std::size_t> path;
  double log_joint = 0.0;
};

// Most probable state path; ties go to the lower state index.
ViterbiResult viterbi(const HmmModel& model, const ObservationSequence& seq);

inline constexpr double kMaxEnumeratedPaths = 1e7;

// Sum over every state path of pi * prod(emission) * prod(transition) by
// explicit enumeration. Throws InstanceTooLarge when n^tau > 1e7.
double brute_force_likelihood(const HmmModel& model, const ObservationSequence& seq);

}  // namespace hmmclass
