#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include "hmmclass/inference.hpp"

namespace hmmclass {

int max_threads() noexcept;

// Runs body(i) for i in [0, count). Under Execution::Parallel the iterations
// are spread over OpenMP threads with dynamic scheduling. An exception thrown
// by any iteration is rethrown after the loop; when several iterations throw,
// the one with the smallest index wins so the reported error does not depend
// on scheduling.
template <typename Body>
void for_each_index(std::size_t count, Execution exec, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  const bool parallel = exec == Execution::Parallel && count > 1;
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace hmmclass
