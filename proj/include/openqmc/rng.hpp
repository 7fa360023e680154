#pragma once

#include <array>
#include <cstdint>

namespace openqmc {

// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

// Sampling phase tags folded into stream ids.
enum class StreamTag : std::uint32_t {
  DysonFull = 1,
  DysonShell = 2,
  BareDqmc = 3,
  BoldStage1 = 4,
  BoldStage2 = 5,
  BtbShell = 6,
  Test = 15,
};

// Counter-based stream for sample k of order m at step n. The draws depend only on
// (seed, tag, n, m, k), never on which thread evaluates them.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamTag tag, std::uint32_t step, std::uint32_t order, std::uint64_t sample);

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  std::uint64_t next_u64();

 private:
  void refill();

  std::array<std::uint32_t, 4> ctr_{};
  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> buf_{};
  int used_ = 4;
};

}  // namespace openqmc
