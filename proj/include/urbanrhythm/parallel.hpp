#pragma once

#include <cstddef>
#include <functional>

namespace urbanrhythm {

// Upper bound on worker threads used by parallel_for. 0 means hardware
// concurrency.
void set_thread_limit(std::size_t threads);
std::size_t thread_limit();

// Runs body(i) for every i in [begin, end), split into contiguous chunks.
// Callers must only write to per-index state so results do not depend on the
// thread count.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

}  // namespace urbanrhythm
