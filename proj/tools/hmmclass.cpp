// hmmclass: preprocess images, synthesize data sets, train per-class HMM
// banks, classify series, and evaluate confusion matrices.
//
// Exit codes: 0 success, 2 usage or input error, 1 internal failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hmmclass/classifier.hpp"
#include "hmmclass/error.hpp"
#include "hmmclass/io.hpp"
#include "hmmclass/parallel.hpp"
#include "hmmclass/preprocessing.hpp"
#include "hmmclass/random.hpp"
#include "hmmclass/synthetic.hpp"
#include "hmmclass/training.hpp"

namespace fs = std::filesystem;
using namespace hmmclass;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;

struct RunManifest {
  std::string command;
  Json config = Json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void add_output(const fs::path& p) { outputs.push_back(p.generic_string()); }

  void write(const fs::path& dir) const {
    Json doc;
    doc["command"] = command;
    doc["version"] = std::string(kVersion);
    doc["config"] = config;
    doc["inputs"] = inputs;
    doc["outputs"] = outputs;
    doc["seed"] = seed;
    doc["rng"] = std::string(kRngAlgorithm);
    doc["threads"] = max_threads();
    doc["duration_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_json(dir / "manifest.json", doc);
  }
};

struct TrainFlags {
  std::size_t states = kDefaultStates;
  std::size_t max_iters = 500;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  std::string init = "quantile";
  std::string emission = "gaussian";
};

EmissionKind parse_emission(const std::string& s) {
  return s == "discrete" ? EmissionKind::Discrete : EmissionKind::Gaussian;
}

std::vector<fs::path> series_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw HmmError(ErrorCode::IoError, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Label directories either listed explicitly or found under a root.
std::vector<fs::path> label_dirs(const std::vector<std::string>& dirs, const std::string& root) {
  std::vector<fs::path> out;
  for (const auto& d : dirs) out.emplace_back(d);
  if (!root.empty()) {
    if (!fs::is_directory(root)) throw HmmError(ErrorCode::IoError, root + " is not a directory");
    std::vector<fs::path> found;
    for (const auto& e : fs::directory_iterator(root)) {
      if (e.is_directory()) found.push_back(e.path());
    }
    std::sort(found.begin(), found.end());
    out.insert(out.end(), found.begin(), found.end());
  }
  if (out.empty()) throw HmmError(ErrorCode::InvalidConfig, "no label directories given");
  return out;
}

std::string label_of(const fs::path& dir) {
  const fs::path clean = dir.filename().empty() ? dir.parent_path() : dir;
  return clean.filename().string();
}

ObservationSequence to_sequence(std::vector<double> values, EmissionKind kind, const fs::path& src) {
  if (kind == EmissionKind::Gaussian) return ObservationSequence::real(std::move(values));
  std::vector<std::uint32_t> symbols;
  symbols.reserve(values.size());
  for (const double v : values) {
    if (!(v >= 0.0) || v != std::floor(v) || v > 4294967295.0) {
      throw HmmError(ErrorCode::TypeMismatch,
                     src.string() + " holds non-symbol values; discrete emission needs "
                                    "nonnegative integers");
    }
    symbols.push_back(static_cast<std::uint32_t>(v));
  }
  return ObservationSequence::symbols(std::move(symbols));
}

LabelledData load_labelled(const std::vector<fs::path>& dirs, EmissionKind kind,
                           RunManifest& manifest, bool allow_empty) {
  LabelledData data;
  std::set<std::string> seen;
  for (const auto& dir : dirs) {
    const std::string label = label_of(dir);
    if (!seen.insert(label).second) throw HmmError(ErrorCode::DuplicateLabel, label);
    std::vector<ObservationSequence> seqs;
    for (const auto& f : series_files(dir)) {
      seqs.push_back(to_sequence(read_series_csv(f), kind, f));
      manifest.inputs.push_back(f.generic_string());
    }
    if (seqs.empty() && !allow_empty) {
      throw HmmError(ErrorCode::EmptyTrainingSet, "label directory " + dir.string() + " has no series");
    }
    data.emplace_back(ClassLabel(label), std::move(seqs));
  }
  return data;
}

std::string padded(std::size_t i, int width = 5) {
  std::string s = std::to_string(i);
  if (s.size() < static_cast<std::size_t>(width)) s.insert(0, width - s.size(), '0');
  return s;
}

// ---------------------------------------------------------------- commands

int cmd_preprocess(const std::vector<std::string>& images, const WindowingConfig& win,
                   const fs::path& out_dir) {
  RunManifest manifest;
  manifest.command = "preprocess";
  manifest.config = {{"window", win.window_length}, {"stride", win.effective_stride()}};
  validate(win);

  std::set<std::string> stems;
  for (const auto& img : images) {
    if (!stems.insert(fs::path(img).stem().string()).second) {
      throw HmmError(ErrorCode::InvalidConfig, "two inputs share the stem " + fs::path(img).stem().string());
    }
    manifest.inputs.push_back(fs::path(img).generic_string());
  }

  fs::create_directories(out_dir);
  std::vector<std::vector<fs::path>> written(images.size());
  for_each_index(images.size(), Execution::Parallel, [&](std::size_t i) {
    const fs::path src(images[i]);
    std::vector<ObservationSequence> windows;
    try {
      windows = preprocess(read_image(src), win);
    } catch (const HmmError& e) {
      throw HmmError(e.code(), src.string() + ": " + e.detail());
    }
    for (std::size_t w = 0; w < windows.size(); ++w) {
      const fs::path dst = out_dir / (src.stem().string() + "_w" + padded(w) + ".csv");
      write_text_atomic(dst, series_csv(windows[w].real_values()));
      written[i].push_back(dst);
    }
  });
  for (const auto& files : written) {
    for (const auto& f : files) manifest.add_output(f);
  }
  manifest.write(out_dir);
  std::cout << "wrote " << manifest.outputs.size() << " window files to " << out_dir.string() << "\n";
  return kExitOk;
}

TrainingConfig training_config(const TrainFlags& f) {
  TrainingConfig c;
  c.n_states = f.states;
  c.max_iterations = f.max_iters;
  c.rel_tolerance = f.tol;
  c.seed = f.seed;
  c.init_scheme = f.init == "paper" ? InitScheme::PaperRandom : InitScheme::DataQuantile;
  validate(c);
  return c;
}

int cmd_train(const std::vector<std::string>& dirs, const std::string& root, const TrainFlags& flags,
              const fs::path& out_dir) {
  RunManifest manifest;
  manifest.command = "train";
  manifest.seed = flags.seed;
  manifest.config = {{"states", flags.states}, {"max_iters", flags.max_iters},
                     {"tol", flags.tol},       {"seed", flags.seed},
                     {"init", flags.init},     {"emission", flags.emission},
                     {"seed_mode", "per-label"}};
  const TrainingConfig config = training_config(flags);
  const auto data = load_labelled(label_dirs(dirs, root), parse_emission(flags.emission), manifest, false);

  const auto result = train_bank(data, config);
  const fs::path bank_path = out_dir / "bank.json";
  write_bank(bank_path, result.bank);
  manifest.add_output(bank_path);
  for (const auto& [label, report] : result.reports) {
    const fs::path json_path = out_dir / "reports" / (label.name() + ".json");
    const fs::path csv_path = out_dir / "reports" / (label.name() + "_trace.csv");
    write_json(json_path, report_to_json(report));
    write_text_atomic(csv_path, trace_csv(report));
    manifest.add_output(json_path);
    manifest.add_output(csv_path);
    std::cout << label.name() << ": " << report.iterations_run << " iterations, "
              << (report.converged ? "converged" : "not converged") << ", loglik "
              << format_double(report.final_loglik) << "\n";
  }
  manifest.write(out_dir);
  return kExitOk;
}

int cmd_classify(const fs::path& bank_path, const std::vector<std::string>& files,
                 const std::optional<std::string>& emission, const fs::path& out_dir) {
  RunManifest manifest;
  manifest.command = "classify";
  manifest.inputs.push_back(bank_path.generic_string());
  const ModelBank bank = read_bank(bank_path);
  if (emission && parse_emission(*emission) != bank.kind()) {
    throw HmmError(ErrorCode::TypeMismatch, "--emission " + *emission + " but the bank is " +
                                                std::string(to_string(bank.kind())));
  }
  manifest.config = {{"emission", std::string(to_string(bank.kind()))}};

  std::vector<ObservationSequence> seqs;
  for (const auto& f : files) {
    seqs.push_back(to_sequence(read_series_csv(f), bank.kind(), f));
    manifest.inputs.push_back(fs::path(f).generic_string());
  }
  const auto results = classify_all(bank, seqs);

  std::string csv = "file";
  for (const auto& e : bank.entries()) csv += "," + e.label.name();
  csv += ",predicted\n";
  for (std::size_t i = 0; i < files.size(); ++i) {
    csv += fs::path(files[i]).generic_string();
    for (const double s : results[i].scores) csv += "," + format_double(s);
    csv += "," + results[i].label(bank).name() + "\n";
  }
  const fs::path out = out_dir / "scores.csv";
  write_text_atomic(out, csv);
  manifest.add_output(out);
  manifest.write(out_dir);
  std::cout << csv;
  return kExitOk;
}

int cmd_evaluate(const fs::path& bank_path, const std::vector<std::string>& dirs,
                 const std::string& root, const fs::path& out_dir) {
  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.inputs.push_back(bank_path.generic_string());
  const ModelBank bank = read_bank(bank_path);
  manifest.config = {{"emission", std::string(to_string(bank.kind()))}};
  const auto data = load_labelled(label_dirs(dirs, root), bank.kind(), manifest, true);
  const ConfusionMatrix cm = evaluate(bank, data);

  const std::vector<std::pair<fs::path, std::string>> outputs = {
      {out_dir / "confusion.csv", confusion_csv(cm)},
      {out_dir / "confusion_counts.csv", confusion_counts_csv(cm)},
      {out_dir / "confusion.json", confusion_to_json(cm).dump(2) + "\n"},
      {out_dir / "confusion.dat", confusion_gnuplot(cm)},
  };
  for (const auto& [path, text] : outputs) {
    write_text_atomic(path, text);
    manifest.add_output(path);
  }
  manifest.write(out_dir);
  std::cout << confusion_csv(cm);
  return kExitOk;
}

struct SynthFlags {
  SyntheticSpec spec;
  std::size_t train = 40;
  std::size_t test = 100;
  std::size_t length = 500;
  bool cumsum = false;
};

int cmd_synth(const SynthFlags& f, const fs::path& out_dir) {
  RunManifest manifest;
  manifest.command = "synth";
  manifest.seed = f.spec.seed;
  const Json spec_json = {{"n_classes", f.spec.n_classes},
                          {"n_states", f.spec.n_states},
                          {"separation", f.spec.separation},
                          {"self_transition", f.spec.self_transition},
                          {"seed", f.spec.seed}};
  manifest.config = {{"spec", spec_json},  {"train", f.train}, {"test", f.test},
                     {"length", f.length}, {"cumsum", f.cumsum}};

  const SyntheticBank generators = make_separated_bank(f.spec);
  Json counts = Json::object();
  for (const auto& [split, count, stream] :
       {std::tuple{"train", f.train, std::uint64_t{1}}, std::tuple{"test", f.test, std::uint64_t{2}}}) {
    DatasetRequest req{count, f.length, f.cumsum, stream};
    const auto data = sample_dataset(generators, f.spec, req);
    Json split_counts = Json::object();
    for (const auto& [label, seqs] : data) {
      const fs::path dir = out_dir / split / label.name();
      fs::create_directories(dir);
      for (std::size_t k = 0; k < seqs.size(); ++k) {
        const fs::path file = dir / (label.name() + "_" + padded(k) + ".csv");
        write_text_atomic(file, series_csv(seqs[k].real_values()));
        manifest.add_output(file);
      }
      split_counts[label.name()] = seqs.size();
    }
    counts[split] = std::move(split_counts);
  }
  const fs::path gen_path = out_dir / "generators.json";
  write_bank(gen_path, generators.bank);
  manifest.add_output(gen_path);
  manifest.config["counts"] = counts;
  manifest.write(out_dir);
  std::cout << "wrote " << manifest.outputs.size() << " files to " << out_dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HMM time-series classification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  const std::map<std::string, std::string> inits{{"paper", "paper"}, {"quantile", "quantile"}};
  const std::map<std::string, std::string> emissions{{"gaussian", "gaussian"}, {"discrete", "discrete"}};

  // preprocess
  std::vector<std::string> pre_images;
  WindowingConfig win;
  std::string pre_out = "preprocessed";
  auto* pre = app.add_subcommand("preprocess", "Unfold, z-score, cumulate and window images");
  pre->add_option("images", pre_images, "CSV or PGM images")->required();
  pre->add_option("--window", win.window_length, "Window length")->capture_default_str()
      ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()));
  pre->add_option("--stride", win.stride, "Window stride (default: window length)")
      ->check(CLI::PositiveNumber);
  pre->add_option("--out", pre_out, "Output directory")->capture_default_str();

  // train
  std::vector<std::string> train_dirs;
  std::string train_root;
  TrainFlags tf;
  std::string train_out = "model";
  auto* train = app.add_subcommand("train", "Train one HMM per label directory");
  train->add_option("dirs", train_dirs, "Label directories (directory name = label)");
  train->add_option("--data-root", train_root, "Directory whose subdirectories are labels");
  train->add_option("--states", tf.states, "Hidden states per model")->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_option("--max-iters", tf.max_iters, "EM iteration cap")->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_option("--tol", tf.tol, "Relative log-likelihood tolerance")->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  train->add_option("--seed", tf.seed, "Random seed")->capture_default_str();
  train->add_option("--init", tf.init, "Initialization scheme")->capture_default_str()
      ->transform(CLI::CheckedTransformer(inits));
  train->add_option("--emission", tf.emission, "Emission family")->capture_default_str()
      ->transform(CLI::CheckedTransformer(emissions));
  train->add_option("--out", train_out, "Output directory")->capture_default_str();

  // classify
  std::string cls_bank;
  std::vector<std::string> cls_files;
  std::string cls_emission;
  std::string cls_out = "classified";
  auto* cls = app.add_subcommand("classify", "Score series files against a model bank");
  cls->add_option("--bank", cls_bank, "Model bank JSON")->required();
  cls->add_option("files", cls_files, "Series CSV files")->required();
  auto* cls_emission_opt = cls->add_option("--emission", cls_emission, "Expected emission family")
                               ->transform(CLI::CheckedTransformer(emissions));
  cls->add_option("--out", cls_out, "Output directory")->capture_default_str();

  // evaluate
  std::string ev_bank;
  std::vector<std::string> ev_dirs;
  std::string ev_root;
  std::string ev_out = "evaluation";
  auto* ev = app.add_subcommand("evaluate", "Confusion matrix over labelled test directories");
  ev->add_option("--bank", ev_bank, "Model bank JSON")->required();
  ev->add_option("dirs", ev_dirs, "Label directories (directory name = label)");
  ev->add_option("--data-root", ev_root, "Directory whose subdirectories are labels");
  ev->add_option("--out", ev_out, "Output directory")->capture_default_str();

  // synth
  SynthFlags sf;
  std::string synth_out = "synthetic";
  auto* syn = app.add_subcommand("synth", "Sample a separated multi-class synthetic data set");
  syn->add_option("--classes", sf.spec.n_classes, "Number of classes")->capture_default_str()
      ->check(CLI::PositiveNumber);
  syn->add_option("--states", sf.spec.n_states, "States per generator")->capture_default_str()
      ->check(CLI::PositiveNumber);
  syn->add_option("--separation", sf.spec.separation, "Mean offset between classes")
      ->capture_default_str()->check(CLI::PositiveNumber);
  syn->add_option("--self-transition", sf.spec.self_transition, "Diagonal transition mass")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  syn->add_option("--seed", sf.spec.seed, "Random seed")->capture_default_str();
  syn->add_option("--train", sf.train, "Training sequences per class")->capture_default_str();
  syn->add_option("--test", sf.test, "Test sequences per class")->capture_default_str();
  syn->add_option("--length", sf.length, "Points per sequence")->capture_default_str()
      ->check(CLI::PositiveNumber);
  syn->add_flag("--cumsum", sf.cumsum, "Apply z-score and cumulative sum to every sample");
  syn->add_option("--out", synth_out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*pre) return cmd_preprocess(pre_images, win, pre_out);
    if (*train) return cmd_train(train_dirs, train_root, tf, train_out);
    if (*cls) {
      std::optional<std::string> emission;
      if (*cls_emission_opt) emission = cls_emission;
      return cmd_classify(cls_bank, cls_files, emission, cls_out);
    }
    if (*ev) return cmd_evaluate(ev_bank, ev_dirs, ev_root, ev_out);
    if (*syn) return cmd_synth(sf, synth_out);
  } catch (const HmmError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: IoError: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
