#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace pfsw {

enum class Execution { serial, parallel };

/// Runs body(i) for i in [0, n) under OpenMP. Each index must write only its
/// own output slot. If bodies throw, the exception from the lowest index is
/// rethrown after the loop, independent of scheduling.
template <class Body>
void parallel_for(std::size_t n, Body&& body, Execution ex = Execution::parallel) {
  std::vector<std::exception_ptr> errors(n);
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic) if (ex == Execution::parallel && count > 1)
  for (long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Sets the OpenMP thread count; n <= 0 leaves the runtime default.
void set_thread_count(int n);
int thread_count();

}  // namespace pfsw
