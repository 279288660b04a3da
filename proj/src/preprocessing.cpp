#include "hmmclass/preprocessing.hpp"

#include <cmath>
#include <string>

#include "hmmclass/error.hpp"

namespace hmmclass {

namespace {

// Neumaier-compensated sum; keeps the z-scored mean at the 1e-16 level for
// long series.
template <typename F>
double compensated_sum(std::size_t count, F&& term) {
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double x = term(i);
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

}  // namespace

ImageGrid::ImageGrid(Matrix values) : values_(std::move(values)) {
  if (values_.rows() == 0 || values_.cols() == 0) {
    throw HmmError(ErrorCode::InvalidObservation, "image must have at least one row and column");
  }
  for (const double v : values_.data()) {
    if (!std::isfinite(v)) throw HmmError(ErrorCode::InvalidObservation, "image has a non-finite pixel");
  }
}

ImageGrid ImageGrid::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw HmmError(ErrorCode::InvalidObservation,
                     "image row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                         " columns, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
  }
  return ImageGrid(std::move(m));
}

void validate(const WindowingConfig& config) {
  if (config.window_length < 2) {
    throw HmmError(ErrorCode::InvalidConfig, "window length must be at least 2");
  }
}

std::vector<double> unfold_horizontal(const ImageGrid& image) {
  const auto data = image.values().data();
  return {data.begin(), data.end()};
}

std::vector<double> zscore(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw HmmError(ErrorCode::SequenceTooShort, "z-score needs at least 2 points");
  const double mean = compensated_sum(n, [&](std::size_t i) { return series[i]; }) /
                      static_cast<double>(n);
  const double var = compensated_sum(n, [&](std::size_t i) {
                       const double d = series[i] - mean;
                       return d * d;
                     }) /
                     static_cast<double>(n);
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) throw HmmError(ErrorCode::DegenerateVariance, "series is constant");

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (series[i] - mean) / sd;
  // The rounded mean can sit up to half an ulp of |mean| off; with a small
  // spread that leaves a visible offset, so remove it on the O(1) scale.
  const double residual = compensated_sum(n, [&](std::size_t i) { return out[i]; }) / static_cast<double>(n);
  for (auto& v : out) v -= residual;
  return out;
}

std::vector<double> cumulative_sum(std::span<const double> fluctuations) {
  if (fluctuations.empty()) throw HmmError(ErrorCode::EmptySequence, "nothing to accumulate");
  std::vector<double> out(fluctuations.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < fluctuations.size(); ++i) {
    acc += fluctuations[i];
    out[i] = acc;
  }
  return out;
}

std::vector<double> difference(std::span<const double> series) {
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    out[i] = i == 0 ? series[0] : series[i] - series[i - 1];
  }
  return out;
}

std::vector<ObservationSequence> window(std::span<const double> series,
                                        const WindowingConfig& config) {
  validate(config);
  const std::size_t len = config.window_length;
  if (len > series.size()) {
    throw HmmError(ErrorCode::WindowTooLong, "window of " + std::to_string(len) +
                                                 " points exceeds series of " +
                                                 std::to_string(series.size()));
  }
  const std::size_t stride = config.effective_stride();
  std::vector<ObservationSequence> out;
  for (std::size_t start = 0; start + len <= series.size(); start += stride) {
    out.push_back(ObservationSequence::real(
        std::vector<double>(series.begin() + static_cast<std::ptrdiff_t>(start),
                            series.begin() + static_cast<std::ptrdiff_t>(start + len))));
  }
  return out;
}

std::vector<ObservationSequence> preprocess(const ImageGrid& image, const WindowingConfig& config) {
  validate(config);
  const auto profile = cumulative_sum(zscore(unfold_horizontal(image)));
  return window(profile, config);
}

}  // namespace hmmclass
