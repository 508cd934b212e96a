#pragma once

#include <cstddef>
#include <functional>

namespace maxent {

/// Loop policy for the batch kernels. `serial` is the reference path; the
/// `parallel` path runs the same per-item work under OpenMP and must give
/// bit-identical results.
enum class Execution { serial, parallel };

/// Calls fn(i) for i in [0, n). Under Execution::parallel the calls are
/// spread over OpenMP threads; if any call throws, the exception from the
/// lowest index is rethrown after the loop.
void for_each_index(std::size_t n, Execution exec, const std::function<void(std::size_t)>& fn);

/// Number of threads the parallel path would use.
int parallel_threads();

}  // namespace maxent
