// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli_runner.hpp"
#include "hmmclass/classifier.hpp"
#include "hmmclass/error.hpp"
#include "hmmclass/inference.hpp"
#include "hmmclass/io.hpp"
#include "hmmclass/preprocessing.hpp"
#include "hmmclass/random.hpp"
#include "hmmclass/synthetic.hpp"
#include "hmmclass/training.hpp"
#include "oracle.hpp"

using namespace hmmclass;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

HmmModel two_state_truth() {
  return make_model({0.5, 0.5}, [] {
    Matrix t(2, 2);
    t(0, 0) = 0.9, t(0, 1) = 0.1, t(1, 0) = 0.1, t(1, 1) = 0.9;
    return t;
  }(), GaussianEmission{{0.0, 10.0}, {1.0, 1.0}});
}

std::vector<ObservationSequence> sample_many(const HmmModel& m, std::size_t count, std::size_t len,
                                             std::uint64_t seed) {
  std::vector<ObservationSequence> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(sample_sequence(m, len, derive_seed(seed, k)).sequence);
  return out;
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(20240601);
  double worst_lik = 0, worst_post = 0;
  std::size_t path_mismatches = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + k % 2;
    const std::size_t tau = 3 + (k / 2) % 4;
    const auto kind = k % 4 < 2 ? EmissionKind::Gaussian : EmissionKind::Discrete;
    const auto model = oracle::random_model(n, kind, rng);
    const auto seq = oracle::random_sequence(kind, tau, rng);

    const double brute = brute_force_likelihood(model, seq);
    worst_lik = std::max(worst_lik, oracle::relative_error(std::exp(log_likelihood(model, seq)), brute));

    const auto got = posteriors(model, seq);
    const auto want = oracle::posteriors(model, seq);
    for (std::size_t i = 0; i < got.gamma.data().size(); ++i) {
      worst_post = std::max(worst_post, std::abs(got.gamma.data()[i] - want.gamma.data()[i]));
    }
    for (std::size_t t = 0; t < got.xi.size(); ++t) {
      for (std::size_t i = 0; i < got.xi[t].data().size(); ++i) {
        worst_post = std::max(worst_post, std::abs(got.xi[t].data()[i] - want.xi[t].data()[i]));
      }
    }
    if (viterbi(model, seq).path != oracle::best_path(model, seq).path) ++path_mismatches;
  }
  std::ostringstream d;
  d << "max rel err " << worst_lik << ", max posterior err " << worst_post << ", viterbi mismatches "
    << path_mismatches;
  return {worst_lik < 1e-10 && worst_post <= 1e-10 && path_mismatches == 0, d.str()};
}

Outcome em_monotonicity() {
  double worst_step = 0;
  std::size_t over_budget = 0;
  std::mt19937_64 rng(7);
  const std::size_t sizes[] = {2, 5, 17};
  for (int run = 0; run < 20; ++run) {
    const auto generator = oracle::random_model(3, EmissionKind::Gaussian, rng);
    const auto data = sample_many(generator, 10, 200, 500 + static_cast<std::uint64_t>(run));
    TrainingConfig cfg;
    cfg.n_states = sizes[run % 3];
    cfg.seed = static_cast<std::uint64_t>(run);
    cfg.init_scheme = run % 2 ? InitScheme::PaperRandom : InitScheme::DataQuantile;
    const auto out = baum_welch(initialize_model(cfg, EmissionKind::Gaussian, data), data, cfg);
    const auto& trace = out.report.loglik_trace;
    for (std::size_t k = 1; k < trace.size(); ++k) worst_step = std::min(worst_step, trace[k] - trace[k - 1]);
    if (out.report.iterations_run > cfg.max_iterations) ++over_budget;
  }
  std::ostringstream d;
  d << "most negative step " << worst_step << ", runs over max_iterations " << over_budget;
  return {worst_step >= -1e-8 && over_budget == 0, d.str()};
}

Outcome parameter_recovery() {
  const auto truth = two_state_truth();
  int recovered = 0;
  double worst_mean = 0, worst_self = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto data = sample_many(truth, 50, 200, seed);
    TrainingConfig cfg;
    cfg.n_states = 2;
    cfg.seed = seed;
    const auto out = baum_welch(initialize_model(cfg, EmissionKind::Gaussian, data), data, cfg);
    const auto& means = out.model.gaussian().means;
    double best_mean = INFINITY, best_self = INFINITY;
    for (const bool swap : {false, true}) {
      double dm = 0, ds = 0;
      for (std::size_t j = 0; j < 2; ++j) {
        const std::size_t k = swap ? 1 - j : j;
        dm = std::max(dm, std::abs(means[k] - truth.gaussian().means[j]));
        ds = std::max(ds, std::abs(out.model.trans(k, k) - truth.trans(j, j)));
      }
      if (std::max(dm / 0.5, ds / 0.05) < std::max(best_mean / 0.5, best_self / 0.05)) {
        best_mean = dm;
        best_self = ds;
      }
    }
    worst_mean = std::max(worst_mean, best_mean);
    worst_self = std::max(worst_self, best_self);
    if (best_mean < 0.5 && best_self < 0.05) ++recovered;
  }
  std::ostringstream d;
  d << recovered << "/10 seeds recovered, worst mean err " << worst_mean << ", worst self-transition err "
    << worst_self;
  return {recovered >= 9, d.str()};
}

Outcome synthetic_analog() {
  SyntheticSpec spec;
  spec.n_classes = 4;
  spec.n_states = 4;
  spec.separation = 12;
  spec.self_transition = 0.9;
  spec.seed = 2024;
  const auto gen = make_separated_bank(spec);
  const auto train = sample_dataset(gen, spec, {40, 500, false, 1});
  const auto test = sample_dataset(gen, spec, {100, 500, false, 2});
  const auto trained = train_bank(train, TrainingConfig{});
  const auto cm = evaluate(trained.bank, test);
  double lowest = 100;
  std::ostringstream d;
  d << "diagonal %:";
  for (std::size_t i = 0; i < cm.labels.size(); ++i) {
    lowest = std::min(lowest, cm.percentages[i][i]);
    d << " " << cm.labels[i] << "=" << cm.percentages[i][i];
  }
  return {lowest >= 95.0, d.str()};
}

Outcome preprocessing_exactness() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> len(2, 2000);
  std::uniform_real_distribution<double> scale(1e-3, 1e3), shift(-1e4, 1e4);
  std::uniform_int_distribution<std::int64_t> grid(-(1LL << 30), 1LL << 30);
  double worst_mean = 0, worst_std = 0, worst_general = 0;
  std::size_t inexact = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::normal_distribution<double> x(shift(rng), scale(rng));
    std::vector<double> v(len(rng));
    for (auto& y : v) y = x(rng);
    const auto z = zscore(v);
    const double n = static_cast<double>(z.size());
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / n;
    double ss = 0;
    for (const double y : z) ss += (y - mean) * (y - mean);
    worst_mean = std::max(worst_mean, std::abs(mean));
    worst_std = std::max(worst_std, std::abs(std::sqrt(ss / n) - 1.0));

    // Exact identity where every partial sum is representable: values on a
    // dyadic grid with bounded magnitude.
    std::vector<double> d(v.size());
    for (auto& y : d) y = std::ldexp(static_cast<double>(grid(rng)), -20);
    if (difference(cumulative_sum(d)) != d) ++inexact;

    // Arbitrary reals: error bounded by the rounding of the running sum.
    const auto back = difference(cumulative_sum(z));
    const auto cum = cumulative_sum(z);
    for (std::size_t t = 0; t < z.size(); ++t) {
      const double ulp = std::max(std::abs(cum[t]), 1.0) * 0x1p-52;
      worst_general = std::max(worst_general, std::abs(back[t] - z[t]) / ulp);
    }
  }

  std::size_t bad_unfold = 0;
  std::uniform_int_distribution<std::size_t> dim(1, 40);
  for (int rep = 0; rep < 100; ++rep) {
    Matrix img(dim(rng), dim(rng));
    for (auto& y : img.data()) y = scale(rng);
    if (unfold_horizontal(ImageGrid(img)).size() != img.rows() * img.cols()) ++bad_unfold;
  }

  bool constant_rejected = false;
  try {
    preprocess(ImageGrid(Matrix(30, 40, 128.0)), {100});
  } catch (const HmmError& e) {
    constant_rejected = e.code() == ErrorCode::DegenerateVariance;
  }

  std::ostringstream d;
  d << "max |mean| " << worst_mean << ", max |std-1| " << worst_std << ", inexact round trips " << inexact
    << ", general round trip <= " << worst_general << " ulp of running sum, unfold errors " << bad_unfold
    << ", constant image " << (constant_rejected ? "rejected" : "NOT rejected");
  return {worst_mean <= 1e-12 && worst_std <= 1e-12 && inexact == 0 && worst_general <= 2.0 && bad_unfold == 0 &&
              constant_rejected,
          d.str()};
}

Outcome numerical_robustness() {
  std::mt19937_64 rng(17);
  const auto model = oracle::random_model(17, EmissionKind::Gaussian, rng);
  const auto seq = sample_sequence(model, 100000, 5).sequence;
  const double got = log_likelihood(model, seq);
  const double reference = oracle::log_domain_likelihood(model, seq);
  const double rel = oracle::relative_error(got, reference);
  std::ostringstream d;
  d << "loglik " << got << ", reference " << reference << ", rel err " << rel;
  return {std::isfinite(got) && rel < 1e-8, d.str()};
}

Outcome serialization_round_trip() {
  SyntheticSpec spec;
  spec.seed = 31;
  const auto gen = make_separated_bank(spec);
  std::mt19937_64 rng(3);
  ModelBank bank;
  for (const auto& e : gen.bank.entries()) bank.add(e.label, e.model);
  bank.add(ClassLabel("random"), oracle::random_model(6, EmissionKind::Gaussian, rng));
  const auto probes = sample_dataset(gen, spec, {5, 300, false, 9});

  cli::ScratchDir dir("hmmclass_accept");
  const std::string path = dir / "bank.json";
  write_bank(path, bank);
  const auto back = read_bank(path);
  std::size_t differing = 0, total = 0;
  for (const auto& [label, seqs] : probes) {
    for (const auto& s : seqs) {
      for (std::size_t c = 0; c < bank.size(); ++c) {
        ++total;
        if (log_likelihood(back.entries()[c].model, s) != log_likelihood(bank.entries()[c].model, s)) ++differing;
      }
    }
  }
  std::ostringstream d;
  d << differing << "/" << total << " probe log-likelihoods differ";
  return {differing == 0 && back == bank, d.str()};
}

Outcome cli_reproducibility() {
  cli::ScratchDir dir("hmmclass_accept");
  std::vector<std::string> confusions;
  for (const std::string run : {"a", "b"}) {
    const std::string root = dir / run;
    const std::vector<std::string> steps = {
        "synth --seed 42 --train 10 --test 20 --length 300 --out " + root + "/data",
        "train --data-root " + root + "/data/train --states 4 --seed 42 --out " + root + "/model",
        "evaluate --bank " + root + "/model/bank.json --data-root " + root + "/data/test --out " + root + "/eval"};
    for (const auto& step : steps) {
      const auto r = cli::run(step);
      if (r.exit_code != 0) return {false, "step failed (exit " + std::to_string(r.exit_code) + "): " + step};
    }
    confusions.push_back(read_text(root + "/eval/confusion.csv"));
  }
  const bool same = confusions[0] == confusions[1];
  return {same && !confusions[0].empty(),
          same ? "confusion CSVs byte-identical (" + std::to_string(confusions[0].size()) + " bytes)"
               : "confusion CSVs differ"};
}

struct Criterion {
  const char* name;
  double budget_seconds;  // 0: no runtime bound
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"1 oracle equivalence", 5, oracle_equivalence},
      {"2 EM monotonicity", 60, em_monotonicity},
      {"3 parameter recovery", 60, parameter_recovery},
      {"4 synthetic 4-class analog", 300, synthetic_analog},
      {"5 preprocessing exactness", 5, preprocessing_exactness},
      {"6 numerical robustness", 10, numerical_robustness},
      {"7 serialization round trip", 0, serialization_round_trip},
      {"8 CLI reproducibility", 0, cli_reproducibility},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_seconds == 0 || secs < c.budget_seconds;
    const bool pass = out.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s  %-28s %7.2fs  %s%s\n", pass ? "PASS" : "FAIL", c.name, secs, out.detail.c_str(),
                in_time ? "" : " [over time budget]");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
