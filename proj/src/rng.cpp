#include "popkit/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace popkit {

namespace {

// Philox4x32 round and key-schedule constants (Salmon et al., SC 2011).
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : counter_{0u, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
               0u},
      key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      block_{},
      block_pos_(4) {}

RngStream RngStream::at(std::uint64_t seed, std::uint32_t iteration, std::uint32_t block,
                        std::uint32_t unit) {
  RngStream s(seed);
  s.counter_ = {0u, unit, block, iteration};
  return s;
}

void RngStream::refill() {
  std::array<std::uint32_t, 4> x = counter_;
  std::array<std::uint32_t, 2> k = key_;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    std::uint32_t lo0, hi0, lo1, hi1;
    mul_hi_lo(kMul0, x[0], lo0, hi0);
    mul_hi_lo(kMul1, x[2], lo1, hi1);
    x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
  }
  block_ = x;
  block_pos_ = 0;
  ++counter_[0];  // next 128-bit batch within this stream
}

std::uint32_t RngStream::next_u32() {
  if (block_pos_ >= 4) refill();
  return block_[block_pos_++];
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t lo = next_u32();
  const std::uint64_t hi = next_u32();
  return lo | (hi << 32);
}

double RngStream::uniform() {
  // 53 random bits, offset by half an ulp so the result is strictly inside (0,1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(2.0 * M_PI * u2);
}

double RngStream::normal(double mean, double sd) { return mean + sd * normal(); }

double RngStream::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
  if (shape < 1.0) {
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    const double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RngStream::inverse_gamma(double shape, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("inverse_gamma: scale must be > 0");
  return scale / gamma(shape);
}

}  // namespace popkit
