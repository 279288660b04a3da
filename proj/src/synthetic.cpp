#include "hmmclass/synthetic.hpp"

#include <cmath>
#include <random>

#include "hmmclass/error.hpp"
#include "hmmclass/preprocessing.hpp"
#include "hmmclass/random.hpp"

namespace hmmclass {

namespace {

std::vector<std::discrete_distribution<std::size_t>> row_samplers(const Matrix& m) {
  std::vector<std::discrete_distribution<std::size_t>> out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    out.emplace_back(row.begin(), row.end());
  }
  return out;
}

}  // namespace

SampledSequence sample_sequence(const HmmModel& model, std::size_t length, std::uint64_t seed) {
  validate(model, 0.0);
  if (length == 0) throw HmmError(ErrorCode::EmptySequence, "sample length must be positive");

  Rng rng = make_rng(seed);
  std::discrete_distribution<std::size_t> initial(model.pi.begin(), model.pi.end());
  auto transitions = row_samplers(model.trans);

  SampledSequence out;
  out.path.resize(length);
  out.path[0] = initial(rng);
  for (std::size_t t = 1; t < length; ++t) out.path[t] = transitions[out.path[t - 1]](rng);

  if (model.kind() == EmissionKind::Gaussian) {
    const auto& g = model.gaussian();
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<double> values(length);
    for (std::size_t t = 0; t < length; ++t) {
      const std::size_t j = out.path[t];
      values[t] = g.means[j] + std::sqrt(g.variances[j]) * unit(rng);
    }
    out.sequence = ObservationSequence::real(std::move(values));
  } else {
    auto emitters = row_samplers(model.discrete().obs);
    std::vector<std::uint32_t> symbols(length);
    for (std::size_t t = 0; t < length; ++t) {
      symbols[t] = static_cast<std::uint32_t>(emitters[out.path[t]](rng));
    }
    out.sequence = ObservationSequence::symbols(std::move(symbols));
  }
  return out;
}

void validate(const SyntheticSpec& spec) {
  auto bad = [](const std::string& what) { throw HmmError(ErrorCode::InvalidConfig, what); };
  if (spec.n_classes == 0) bad("n_classes must be positive");
  if (spec.n_states == 0) bad("n_states must be positive");
  if (!(spec.separation > 0.0) || !std::isfinite(spec.separation)) bad("separation must be positive");
  if (!(spec.self_transition > 0.0 && spec.self_transition < 1.0)) {
    bad("self_transition must lie in (0, 1)");
  }
}

std::vector<std::string> synthetic_labels(std::size_t n_classes) {
  if (n_classes == 4) return {"Normal", "GradeI", "GradeII", "GradeIII"};
  std::vector<std::string> out;
  for (std::size_t c = 0; c < n_classes; ++c) out.push_back("class" + std::to_string(c));
  return out;
}

SyntheticBank make_separated_bank(const SyntheticSpec& spec) {
  validate(spec);
  const std::size_t n = spec.n_states;
  const auto labels = synthetic_labels(spec.n_classes);

  SyntheticBank out;
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    const double base = static_cast<double>(c) * spec.separation;
    GaussianEmission g;
    for (std::size_t j = 0; j < n; ++j) {
      const double frac = n == 1 ? 0.5 : static_cast<double>(j) / static_cast<double>(n - 1);
      g.means.push_back(base + frac);
    }
    g.variances.assign(n, 1.0);

    Matrix trans(n, n, 1.0);
    if (n > 1) {
      const double off = (1.0 - spec.self_transition) / static_cast<double>(n - 1);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) trans(i, j) = i == j ? spec.self_transition : off;
      }
    }
    HmmModel model = make_model(std::vector<double>(n, 1.0 / static_cast<double>(n)),
                                std::move(trans), std::move(g));
    out.generators.push_back(model);
    out.bank.add(ClassLabel(labels[c]), std::move(model));
  }
  return out;
}

LabelledData sample_dataset(const SyntheticBank& bank, const SyntheticSpec& spec,
                            const DatasetRequest& request) {
  if (request.length == 0) throw HmmError(ErrorCode::InvalidConfig, "length must be positive");
  LabelledData out;
  const auto& entries = bank.bank.entries();
  for (std::size_t c = 0; c < entries.size(); ++c) {
    std::vector<ObservationSequence> seqs;
    for (std::size_t k = 0; k < request.sequences_per_class; ++k) {
      const std::uint64_t stream =
          derive_seed(derive_seed(request.stream, c), static_cast<std::uint64_t>(k));
      auto sample = sample_sequence(entries[c].model, request.length, derive_seed(spec.seed, stream));
      if (request.cumulate) {
        const auto raw = sample.sequence.real_values();
        sample.sequence = ObservationSequence::real(cumulative_sum(zscore(raw)));
      }
      seqs.push_back(std::move(sample.sequence));
    }
    out.emplace_back(entries[c].label, std::move(seqs));
  }
  return out;
}

}  // namespace hmmclass
