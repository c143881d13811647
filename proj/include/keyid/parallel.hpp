#pragma once
#include <cstddef>
#include <functional>

namespace keyid {

int default_threads();

// Runs body(i) for i in [0, n) on up to `threads` workers; each index is visited exactly once.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace keyid
