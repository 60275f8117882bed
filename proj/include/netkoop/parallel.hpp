#pragma once

#include <cstddef>
#include <functional>

namespace netkoop {

/// Process-wide worker count used by parallel_for. Defaults to the
/// NETKOOP_THREADS environment variable, else 1.
int thread_count();
void set_thread_count(int n);

/// Runs body(i) for i in [0, n). Results must be written by index; the first
/// exception thrown (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace netkoop
