#ifndef POPKIT_RNG_HPP
#define POPKIT_RNG_HPP

#include <array>
#include <cstdint>

namespace popkit {

/**
 * Counter-based random stream (Philox4x32-10).
 *
 * A stream is identified by (seed, iteration, block, unit); successive draws
 * advance only the low counter word, so streams with distinct identifiers are
 * statistically independent and can be consumed in any order or concurrently
 * with bit-identical results. The sampler maps each Gibbs update to its own
 * stream via at(); generic code may use the plain constructor, which occupies
 * the iteration = 0 slice.
 */
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  /// Stream for one sampler update. Blocks 1..7 follow the Gibbs step
  /// numbering; unit is the patient index (steps 1-3) or the parameter
  /// index (steps 5-6), zero otherwise.
  static RngStream at(std::uint64_t seed, std::uint32_t iteration, std::uint32_t block,
                      std::uint32_t unit);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform draw in the open interval (0, 1).
  double uniform();
  /// Standard normal draw (Box-Muller; consumes two uniforms).
  double normal();
  double normal(double mean, double sd);
  /// Gamma(shape, scale 1) draw, shape > 0 (Marsaglia-Tsang).
  double gamma(double shape);
  /// InverseGamma(shape, scale) draw: density proportional to
  /// x^{-shape-1} exp(-scale/x).
  double inverse_gamma(double shape, double scale);

 private:
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> block_;
  int block_pos_;

  void refill();
};

}  // namespace popkit

#endif  // POPKIT_RNG_HPP
