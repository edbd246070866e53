#include "covapprox/rng.hpp"

#include <cmath>

namespace covapprox {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed ^ mix64(stream + kGolden))), seed_(seed), stream_(stream) {}

std::uint64_t RngStream::next_u64() {
  counter_ += 1;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_double_open() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

std::pair<double, double> RngStream::next_normal_pair() {
  const double u1 = next_double_open();
  const double u2 = next_double();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

void RngStream::fill_normal(double* out, int n) {
  int i = 0;
  for (; i + 1 < n; i += 2) {
    auto [a, b] = next_normal_pair();
    out[i] = a;
    out[i + 1] = b;
  }
  if (i < n) out[i] = next_normal_pair().first;
}

void RngStream::fill_rademacher(double* out, int n) {
  int i = 0;
  while (i < n) {
    std::uint64_t w = next_u64();
    const int take = n - i < 64 ? n - i : 64;
    for (int b = 0; b < take; ++b, ++i) {
      out[i] = (w & 1u) ? 1.0 : -1.0;
      w >>= 1;
    }
  }
}

double RngStream::next_exponential() { return -std::log(next_double_open()); }

bool RngStream::next_bernoulli(double p) { return next_double() < p; }

RngStream RngStream::derive(std::uint64_t index) const {
  RngStream child;
  child.key_ = mix64(key_ ^ mix64(index + kGolden));
  child.counter_ = 0;
  child.seed_ = seed_;
  child.stream_ = stream_;
  return child;
}

}  // namespace covapprox
