#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hmmclass/inference.hpp"
#include "hmmclass/model.hpp"
#include "hmmclass/training.hpp"

namespace hmmclass {

class ClassLabel {
 public:
  explicit ClassLabel(std::string name);

  const std::string& name() const noexcept { return name_; }

  friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
  friend auto operator<=>(const ClassLabel&, const ClassLabel&) = default;

 private:
  std::string name_;
};

// Class label -> model, in insertion order. All models share one emission
// kind and labels are unique.
class ModelBank {
 public:
  struct Entry {
    ClassLabel label;
    HmmModel model;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  // Throws DuplicateLabel or TypeMismatch.
  void add(ClassLabel label, HmmModel model);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  EmissionKind kind() const;
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::optional<std::size_t> index_of(const ClassLabel& label) const;
  const HmmModel& model(const ClassLabel& label) const;

  friend bool operator==(const ModelBank&, const ModelBank&) = default;

 private:
  std::vector<Entry> entries_;
};

// Ordered list of (label, sequences) pairs.
using LabelledData = std::vector<std::pair<ClassLabel, std::vector<ObservationSequence>>>;

// Per-class seed: config.seed + stable_hash(label name), wrapping. With
// SeedMode::Shared every class uses config.seed unchanged.
enum class SeedMode { PerLabel, Shared };

std::uint64_t class_seed(std::uint64_t seed, const ClassLabel& label) noexcept;

struct BankTrainingResult {
  ModelBank bank;
  std::vector<std::pair<ClassLabel, TrainingReport>> reports;
};

BankTrainingResult train_bank(const LabelledData& data, const TrainingConfig& config,
                              SeedMode seeds = SeedMode::PerLabel);

struct ClassificationResult {
  std::vector<double> scores;  // log-likelihood per bank entry, bank order
  std::size_t predicted = 0;   // bank index

  const ClassLabel& label(const ModelBank& bank) const { return bank.entries()[predicted].label; }
};

// Maximum log-likelihood over the bank; ties go to the earlier entry and
// -inf scores never win. Throws Unclassifiable when every score is -inf.
ClassificationResult classify(const ModelBank& bank, const ObservationSequence& seq);

std::vector<ClassificationResult> classify_all(const ModelBank& bank,
                                               std::span<const ObservationSequence> seqs,
                                               Execution exec = Execution::Parallel);

// Picks the index of the largest finite score with first-wins ties.
std::optional<std::size_t> argmax_score(std::span<const double> scores);

struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::uint64_t>> counts;  // row = true, column = predicted
  std::vector<std::vector<double>> percentages;

  // Rebuilds percentages from counts; all-zero rows stay zero.
  void update_percentages();
};

// Rows follow bank order. Throws UnknownLabel, EmptyTestSet, or
// LengthMismatch when the test sequences differ in length.
ConfusionMatrix evaluate(const ModelBank& bank, const LabelledData& test_data,
                         Execution exec = Execution::Parallel);

}  // namespace hmmclass
