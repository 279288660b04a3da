#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hmmclass/matrix.hpp"
#include "hmmclass/model.hpp"

namespace hmmclass {

// Scalar field sampled on a pixel grid; all values finite.
class ImageGrid {
 public:
  explicit ImageGrid(Matrix values);
  static ImageGrid from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return values_.rows(); }
  std::size_t cols() const noexcept { return values_.cols(); }
  const Matrix& values() const noexcept { return values_; }

 private:
  Matrix values_;
};

struct WindowingConfig {
  std::size_t window_length = 1000;
  // 0 means non-overlapping (stride = window_length).
  std::size_t stride = 0;

  std::size_t effective_stride() const noexcept { return stride == 0 ? window_length : stride; }
};

void validate(const WindowingConfig& config);

// Row-major: out[r * cols + c] = values(r, c).
std::vector<double> unfold_horizontal(const ImageGrid& image);

// (x - mean) / population standard deviation.
// Throws SequenceTooShort (< 2 points) or DegenerateVariance.
std::vector<double> zscore(std::span<const double> series);

// Running sum. Throws EmptySequence.
std::vector<double> cumulative_sum(std::span<const double> fluctuations);

// First element kept, then successive differences; inverse of cumulative_sum.
std::vector<double> difference(std::span<const double> series);

// Windows at offsets 0, stride, 2*stride, ...; a trailing remainder shorter
// than window_length is dropped. Throws WindowTooLong.
std::vector<ObservationSequence> window(std::span<const double> series,
                                        const WindowingConfig& config);

// unfold_horizontal -> zscore (once, over the whole image) -> cumulative_sum
// -> window.
std::vector<ObservationSequence> preprocess(const ImageGrid& image, const WindowingConfig& config);

}  // namespace hmmclass
