#pragma once

#include <cstddef>
#include <exception>
#include <limits>

namespace pwr {

enum class ExecPolicy { serial, parallel };

// Runs body(i) for i in [0, n). Each index must write only its own output slot,
// so both policies produce identical results. In parallel mode the exception
// from the lowest failing index is rethrown after the loop.
template <class Body>
void for_each_index(ExecPolicy policy, std::size_t n, Body&& body) {
  if (policy == ExecPolicy::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const long long count = static_cast<long long>(n);
  std::exception_ptr first;
  std::size_t first_index = std::numeric_limits<std::size_t>::max();
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(pwr_for_each_index)
      if (static_cast<std::size_t>(i) < first_index) {
        first_index = static_cast<std::size_t>(i);
        first = std::current_exception();
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

void set_thread_count(int threads);
int thread_count();

}  // namespace pwr
