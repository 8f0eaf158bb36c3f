#pragma once

// Minimal fork-join helper. Work is split into contiguous index blocks and the
// caller combines per-block results in block order, so output never depends on
// scheduling.

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace hl {

/// Worker count: hardware concurrency, capped by the HL_THREADS variable.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HL_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
      // unparsable value: ignore the cap
    }
  }
  return n;
}

/// Evaluates body(begin, end) on contiguous blocks covering [0, count), in
/// parallel, and returns the block results in block order. Exceptions from
/// workers are rethrown on the calling thread (lowest block first).
template <class Body>
auto parallel_blocks(std::size_t count, Body&& body, std::size_t min_block = 1024)
    -> std::vector<decltype(body(std::size_t{}, std::size_t{}))> {
  using R = decltype(body(std::size_t{}, std::size_t{}));
  std::vector<R> results;
  if (count == 0) return results;
  const std::size_t blocks =
      std::max<std::size_t>(1, std::min<std::size_t>(worker_count(), (count + min_block - 1) / min_block));
  results.resize(blocks);
  if (blocks == 1) {
    results[0] = body(std::size_t{0}, count);
    return results;
  }
  std::vector<std::exception_ptr> errors(blocks);
  std::vector<std::thread> threads;
  threads.reserve(blocks);
  for (std::size_t w = 0; w < blocks; ++w) {
    const std::size_t begin = count * w / blocks;
    const std::size_t end = count * (w + 1) / blocks;
    threads.emplace_back([&, begin, end, w] {
      try {
        results[w] = body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace hl
