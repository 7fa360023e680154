#include "openqmc/rng.hpp"

#include <stdexcept>

namespace openqmc {

namespace {

constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;
constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMulA, ctr[0], hi0, lo0);
    mulhilo(kMulB, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t seed, StreamTag tag, std::uint32_t step, std::uint32_t order,
                     std::uint64_t sample) {
  if (order > 0xFFu) throw std::invalid_argument("RngStream: order out of range");
  if (sample >> 40) throw std::invalid_argument("RngStream: sample index out of range");
  key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  // ctr0: draw block, ctr1: sample low bits, ctr2: step, ctr3: sample high | tag | order
  ctr_ = {0u, static_cast<std::uint32_t>(sample), step,
          (static_cast<std::uint32_t>(sample >> 32) << 16) | (static_cast<std::uint32_t>(tag) << 8) | order};
}

void RngStream::refill() {
  buf_ = philox4x32(ctr_, key_);
  ++ctr_[0];
  if (ctr_[0] == 0) throw std::runtime_error("RngStream: draw counter exhausted");
  used_ = 0;
}

std::uint64_t RngStream::next_u64() {
  if (used_ > 2) refill();
  const std::uint64_t v = (static_cast<std::uint64_t>(buf_[used_]) << 32) | buf_[used_ + 1];
  used_ += 2;
  return v;
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

}  // namespace openqmc
