#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <vector>

namespace openqmc {

inline constexpr std::int64_t kReduceBlock = 256;

// Sums body(k, acc) over k in [0, count) with a result independent of thread count:
// fixed-size blocks are reduced in index order, then blocks are combined in order.
template <class Acc, class Body>
Acc blocked_reduce(std::int64_t count, int threads, Body&& body) {
  Acc total{};
  if (count <= 0) return total;
  const std::int64_t blocks = (count + kReduceBlock - 1) / kReduceBlock;
  std::vector<Acc> partial(static_cast<std::size_t>(blocks));
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (threads > 1 && blocks > 1)
  for (std::int64_t b = 0; b < blocks; ++b) {
    try {
      Acc acc{};
      const std::int64_t hi = std::min(count, (b + 1) * kReduceBlock);
      for (std::int64_t k = b * kReduceBlock; k < hi; ++k) body(k, acc);
      partial[static_cast<std::size_t>(b)] = acc;
    } catch (...) {
#pragma omp critical(openqmc_reduce_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  for (const auto& p : partial) total += p;
  return total;
}

}  // namespace openqmc
