// Wall-clock comparison of the OpenMP kernels against the serial reference
// drivers. Build and run:
//   cmake --build build --target bench_kernels && ./build/bench/bench_kernels

#include <chrono>
#include <cstdio>
#include <functional>

#include "covapprox/distributions.hpp"
#include "covapprox/ellipsoid_body.hpp"
#include "covapprox/exec.hpp"
#include "covapprox/slab_body.hpp"
#include "covapprox/verifier.hpp"

using namespace covapprox;

namespace {

double time_seconds(const std::function<void()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-28s %10.3fs %10.3fs %8.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main() {
  std::printf("%-28s %11s %11s %9s\n", "kernel", "serial", "openmp", "speedup");

  {
    const DistributionSpec spec = DistributionSpec::standard_gaussian(16);
    const RngStream rng(42, 0);
    const auto samples = sample_batch(spec, 9600, rng.derive(0), Exec::serial);
    const SlabBody body = build_slab_body(samples, SmoothedMode{1, 0.1});
    auto run = [&](Exec exec) {
      certify_approximation([&](const Vector& u) { return radial(body, u); }, spec.covariance(),
                            4000, rng.derive(1), exec);
    };
    row("slab radial certify", time_seconds([&] { run(Exec::serial); }),
        time_seconds([&] { run(Exec::parallel); }));
  }

  {
    const DistributionSpec spec =
        DistributionSpec::mixed_product(MarginalSpec::rademacher(), SymMatrix::identity(16));
    const RngStream rng(42, 1);
    auto build = [&](Exec exec) {
      return build_ellipsoid_body_gram(spec, 400, 4096, 0.2, rng.derive(0), exec);
    };
    const double ts = time_seconds([&] { build(Exec::serial); });
    const double tp = time_seconds([&] { build(Exec::parallel); });
    row("ellipsoid gram build", ts, tp);

    const EllipsoidBody body = build(Exec::parallel);
    auto run = [&](Exec exec) {
      certify_approximation([&](const Vector& u) { return radial(body, u); }, spec.covariance(),
                            4000, rng.derive(1), exec);
    };
    row("ellipsoid radial certify", time_seconds([&] { run(Exec::serial); }),
        time_seconds([&] { run(Exec::parallel); }));
  }

  {
    const RngStream rng(42, 2);
    auto run = [&](Exec exec) {
      estimate_psi(MarginalSpec::centered_exponential(), 16, 400000, rng, exec);
    };
    row("berry-esseen psi", time_seconds([&] { run(Exec::serial); }),
        time_seconds([&] { run(Exec::parallel); }));
  }

  {
    const DistributionSpec spec = DistributionSpec::standard_gaussian(32);
    const RngStream rng(42, 3);
    auto run = [&](Exec exec) { sample_batch(spec, 200000, rng, exec); };
    row("gaussian sample batch", time_seconds([&] { run(Exec::serial); }),
        time_seconds([&] { run(Exec::parallel); }));
  }

  return 0;
}
