#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hmmclass/classifier.hpp"
#include "hmmclass/model.hpp"

namespace hmmclass {

struct SampledSequence {
  ObservationSequence sequence;
  std::vector<std::size_t> path;
};

// Draws a state path from pi then trans and an observation from each
// visited state's emission. Deterministic in (model, length, seed).
SampledSequence sample_sequence(const HmmModel& model, std::size_t length, std::uint64_t seed);

struct SyntheticSpec {
  std::size_t n_classes = 4;
  std::size_t n_states = 4;
  // Offset between consecutive classes' mean grids.
  double separation = 12.0;
  double self_transition = 0.9;
  std::uint64_t seed = 0;
};

void validate(const SyntheticSpec& spec);

// Normal, GradeI, GradeII, GradeIII for four classes; class0, class1, ...
// otherwise.
std::vector<std::string> synthetic_labels(std::size_t n_classes);

struct SyntheticBank {
  ModelBank bank;                 // the generators under their labels
  std::vector<HmmModel> generators;
};

// Class c: Gaussian means evenly spaced over [c*separation, c*separation + 1],
// unit variances, uniform pi, self_transition on the diagonal and the rest
// spread evenly over the other states.
SyntheticBank make_separated_bank(const SyntheticSpec& spec);

struct DatasetRequest {
  std::size_t sequences_per_class = 40;
  std::size_t length = 500;
  // Pass every raw sample through zscore + cumulative_sum.
  bool cumulate = false;
  // Distinguishes e.g. train and test draws from the same spec.
  std::uint64_t stream = 0;
};

// Sequence k of class c is drawn with seed
// derive_seed(spec.seed, derive_seed(derive_seed(stream, c), k)).
LabelledData sample_dataset(const SyntheticBank& bank, const SyntheticSpec& spec,
                            const DatasetRequest& request);

}  // namespace hmmclass
