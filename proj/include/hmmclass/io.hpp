#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hmmclass/classifier.hpp"
#include "hmmclass/model.hpp"
#include "hmmclass/preprocessing.hpp"
#include "hmmclass/training.hpp"

namespace hmmclass {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kVersion = "1.0.0";
inline constexpr std::string_view kBankFormat = "hmmclass-bank";

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// Model schema: {n_states, pi, trans, emission: {kind, obs | means + variances}}.
Json model_to_json(const HmmModel& model);
// Throws ParseError on schema violations and InvalidModel on broken invariants.
HmmModel model_from_json(const Json& doc);

Json bank_to_json(const ModelBank& bank);
ModelBank bank_from_json(const Json& doc);

void write_bank(const std::filesystem::path& path, const ModelBank& bank);
ModelBank read_bank(const std::filesystem::path& path);

Json report_to_json(const TrainingReport& report);
// "iteration,loglik" header then one row per trace entry.
std::string trace_csv(const TrainingReport& report);

std::string confusion_csv(const ConfusionMatrix& cm);          // percentages
std::string confusion_counts_csv(const ConfusionMatrix& cm);   // raw counts
Json confusion_to_json(const ConfusionMatrix& cm);
// "true_index pred_index percentage" rows for a 3-D bar chart.
std::string confusion_gnuplot(const ConfusionMatrix& cm);

// One value per line; blank lines ignored. Errors name the file and the
// byte offset of the offending line.
std::vector<double> read_series_csv(const std::filesystem::path& path);
std::string series_csv(std::span<const double> values);

// Comma-separated rows of reals.
ImageGrid read_image_csv(const std::filesystem::path& path);
// Binary (P5) 8/16-bit PGM; plain (P2) is accepted too.
ImageGrid read_image_pgm(const std::filesystem::path& path);
// Dispatches on the leading magic bytes: "P5"/"P2" is PGM, anything else CSV.
ImageGrid read_image(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
// Writes to a sibling temporary then renames over the target.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);
void write_json(const std::filesystem::path& path, const Json& doc);

}  // namespace hmmclass
