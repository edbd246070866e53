#pragma once

#include <cstdint>
#include <utility>

namespace covapprox {

// SplitMix64 (Steele/Lea/Vigna) in counter form: output i of a stream is
// mix64(key + i * golden), where the key is a hash of (seed, stream id).
// Two consequences the library relies on:
//   * identical (seed, stream) pairs give identical sequences, independent of
//     how outputs are interleaved with other streams;
//   * child streams derived with distinct indices are independent by
//     construction, so parallel loops can draw per-task streams and still be
//     bit-reproducible for any thread count.
// Floating-point outputs additionally go through libm (log/cos/sin for the
// Box-Muller transform), so bit-stability is per platform+libm.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  // Uniform on [0,1) with 53 random bits.
  double next_double();
  // Uniform on (0,1]; safe to feed to log().
  double next_double_open();
  // Box-Muller pair of independent standard normals (consumes 2 uniforms).
  std::pair<double, double> next_normal_pair();
  void fill_normal(double* out, int n);
  // +-1 values, 64 per consumed word.
  void fill_rademacher(double* out, int n);
  double next_exponential();  // Exp(1)
  bool next_bernoulli(double p);

  // Child stream addressed by index; depends only on (seed, stream, index),
  // not on how far this stream has been consumed.
  RngStream derive(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  RngStream() = default;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
};

}  // namespace covapprox
