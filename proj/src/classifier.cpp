#include "hmmclass/classifier.hpp"

#include <cmath>
#include <limits>

#include "hmmclass/error.hpp"
#include "hmmclass/parallel.hpp"
#include "hmmclass/random.hpp"

namespace hmmclass {

ClassLabel::ClassLabel(std::string name) : name_(std::move(name)) {
  if (name_.empty()) throw HmmError(ErrorCode::InvalidConfig, "class label must be nonempty");
}

void ModelBank::add(ClassLabel label, HmmModel model) {
  if (index_of(label)) throw HmmError(ErrorCode::DuplicateLabel, label.name());
  if (!entries_.empty() && model.kind() != kind()) {
    throw HmmError(ErrorCode::TypeMismatch,
                   "model for " + label.name() + " does not share the bank's emission kind");
  }
  entries_.push_back({std::move(label), std::move(model)});
}

EmissionKind ModelBank::kind() const {
  if (entries_.empty()) throw HmmError(ErrorCode::InvalidModel, "model bank is empty");
  return entries_.front().model.kind();
}

std::optional<std::size_t> ModelBank::index_of(const ClassLabel& label) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].label == label) return i;
  }
  return std::nullopt;
}

const HmmModel& ModelBank::model(const ClassLabel& label) const {
  const auto idx = index_of(label);
  if (!idx) throw HmmError(ErrorCode::UnknownLabel, label.name());
  return entries_[*idx].model;
}

std::uint64_t class_seed(std::uint64_t seed, const ClassLabel& label) noexcept {
  return seed + stable_hash(label.name());
}

BankTrainingResult train_bank(const LabelledData& data, const TrainingConfig& config,
                              SeedMode seeds) {
  validate(config);
  if (data.empty()) throw HmmError(ErrorCode::EmptyTrainingSet, "no classes to train");

  std::optional<EmissionKind> kind;
  std::uint32_t top_symbol = 0;
  for (const auto& [label, seqs] : data) {
    if (seqs.empty()) throw HmmError(ErrorCode::EmptyTrainingSet, label.name());
    for (const auto& seq : seqs) {
      if (kind && seq.kind() != *kind) {
        throw HmmError(ErrorCode::TypeMismatch, "classes mix emission kinds");
      }
      kind = seq.kind();
      for (const auto s : seq.symbol_values()) top_symbol = std::max(top_symbol, s);
    }
  }

  TrainingConfig shared = config;
  if (*kind == EmissionKind::Discrete && shared.n_symbols == 0) {
    shared.n_symbols = static_cast<std::size_t>(top_symbol) + 1;
  }

  BankTrainingResult out;
  for (const auto& [label, seqs] : data) {
    TrainingConfig cfg = shared;
    if (seeds == SeedMode::PerLabel) cfg.seed = class_seed(config.seed, label);
    const HmmModel init = initialize_model(cfg, *kind, seqs);
    auto trained = baum_welch(init, seqs, cfg);
    out.bank.add(label, std::move(trained.model));
    out.reports.emplace_back(label, std::move(trained.report));
  }
  return out;
}

std::optional<std::size_t> argmax_score(std::span<const double> scores) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i]) || scores[i] == -std::numeric_limits<double>::infinity()) continue;
    if (!best || scores[i] > scores[*best]) best = i;
  }
  return best;
}

ClassificationResult classify(const ModelBank& bank, const ObservationSequence& seq) {
  if (bank.empty()) throw HmmError(ErrorCode::InvalidModel, "model bank is empty");
  ClassificationResult out;
  out.scores.reserve(bank.size());
  for (const auto& entry : bank.entries()) out.scores.push_back(log_likelihood(entry.model, seq));
  const auto best = argmax_score(out.scores);
  if (!best) {
    throw HmmError(ErrorCode::Unclassifiable, "sequence is impossible under every model");
  }
  out.predicted = *best;
  return out;
}

std::vector<ClassificationResult> classify_all(const ModelBank& bank,
                                               std::span<const ObservationSequence> seqs,
                                               Execution exec) {
  std::vector<ClassificationResult> out(seqs.size());
  for_each_index(seqs.size(), exec, [&](std::size_t k) { out[k] = classify(bank, seqs[k]); });
  return out;
}

void ConfusionMatrix::update_percentages() {
  percentages.assign(counts.size(), std::vector<double>(labels.size(), 0.0));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::uint64_t row_sum = 0;
    for (const auto c : counts[i]) row_sum += c;
    if (row_sum == 0) continue;
    for (std::size_t j = 0; j < counts[i].size(); ++j) {
      percentages[i][j] = 100.0 * static_cast<double>(counts[i][j]) / static_cast<double>(row_sum);
    }
  }
}

ConfusionMatrix evaluate(const ModelBank& bank, const LabelledData& test_data, Execution exec) {
  if (bank.empty()) throw HmmError(ErrorCode::InvalidModel, "model bank is empty");

  std::vector<ObservationSequence> flat;
  std::vector<std::size_t> truth;
  for (const auto& [label, seqs] : test_data) {
    const auto idx = bank.index_of(label);
    if (!idx) throw HmmError(ErrorCode::UnknownLabel, label.name());
    for (const auto& seq : seqs) {
      if (!flat.empty() && seq.size() != flat.front().size()) {
        throw HmmError(ErrorCode::LengthMismatch,
                       "test sequences must share one length; got " +
                           std::to_string(flat.front().size()) + " and " +
                           std::to_string(seq.size()));
      }
      flat.push_back(seq);
      truth.push_back(*idx);
    }
  }
  if (flat.empty()) throw HmmError(ErrorCode::EmptyTestSet, "no test sequences");

  const auto results = classify_all(bank, flat, exec);

  ConfusionMatrix cm;
  for (const auto& entry : bank.entries()) cm.labels.push_back(entry.label.name());
  cm.counts.assign(bank.size(), std::vector<std::uint64_t>(bank.size(), 0));
  for (std::size_t k = 0; k < results.size(); ++k) ++cm.counts[truth[k]][results[k].predicted];
  cm.update_percentages();
  return cm;
}

}  // namespace hmmclass
