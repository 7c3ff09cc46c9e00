// Serial vs OpenMP kernel comparison.  Run with --benchmark_filter=matvec
// etc.; the serial numbers are the reference the dispatcher falls back to.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "aae/kernels.hpp"
#include "aae/rng.hpp"

namespace {

using aae::kernels::cd;

std::vector<cd> random_vec(std::size_t n, std::uint64_t seed) {
    aae::Rng rng(seed);
    std::vector<cd> v(n);
    for (auto& x : v) x = aae::standard_normal_complex(rng);
    return v;
}

void bm_matvec_serial(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto a = random_vec(n * n, 1);
    const auto x = random_vec(n, 2);
    std::vector<cd> y(n);
    for (auto _ : state) {
        aae::kernels::serial::matvec(a.data(), x.data(), y.data(), n);
        benchmark::DoNotOptimize(y.data());
    }
}

void bm_matvec_openmp(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto a = random_vec(n * n, 1);
    const auto x = random_vec(n, 2);
    std::vector<cd> y(n);
    for (auto _ : state) {
        aae::kernels::openmp::matvec(a.data(), x.data(), y.data(), n);
        benchmark::DoNotOptimize(y.data());
    }
}

void bm_reflect_serial(benchmark::State& state) {
    const std::size_t n = std::size_t{1} << state.range(0);
    const auto phi = random_vec(n, 3);
    auto v = random_vec(n, 4);
    for (auto _ : state) {
        aae::kernels::serial::reflect_about_state(v.data(), phi.data(), n);
        benchmark::DoNotOptimize(v.data());
    }
}

void bm_reflect_openmp(benchmark::State& state) {
    const std::size_t n = std::size_t{1} << state.range(0);
    const auto phi = random_vec(n, 3);
    auto v = random_vec(n, 4);
    for (auto _ : state) {
        aae::kernels::openmp::reflect_about_state(v.data(), phi.data(), n);
        benchmark::DoNotOptimize(v.data());
    }
}

void bm_masked_norm2_serial(benchmark::State& state) {
    const std::size_t n = std::size_t{1} << state.range(0);
    const auto v = random_vec(n, 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            aae::kernels::serial::masked_norm2(v.data(), n, 0x7, 0x5));
    }
}

void bm_masked_norm2_openmp(benchmark::State& state) {
    const std::size_t n = std::size_t{1} << state.range(0);
    const auto v = random_vec(n, 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            aae::kernels::openmp::masked_norm2(v.data(), n, 0x7, 0x5));
    }
}

void bm_apply_targeted_serial(benchmark::State& state) {
    const unsigned q = static_cast<unsigned>(state.range(0));
    auto amps = random_vec(std::size_t{1} << q, 6);
    const auto u = random_vec(4, 7);
    const unsigned targets[] = {q / 2};
    for (auto _ : state) {
        aae::kernels::serial::apply_targeted(amps.data(), q, u.data(), targets,
                                             {});
        benchmark::DoNotOptimize(amps.data());
    }
}

void bm_apply_targeted_openmp(benchmark::State& state) {
    const unsigned q = static_cast<unsigned>(state.range(0));
    auto amps = random_vec(std::size_t{1} << q, 6);
    const auto u = random_vec(4, 7);
    const unsigned targets[] = {q / 2};
    for (auto _ : state) {
        aae::kernels::openmp::apply_targeted(amps.data(), q, u.data(), targets,
                                             {});
        benchmark::DoNotOptimize(amps.data());
    }
}

}  // namespace

BENCHMARK(bm_matvec_serial)->Arg(256)->Arg(1024);
BENCHMARK(bm_matvec_openmp)->Arg(256)->Arg(1024);
BENCHMARK(bm_reflect_serial)->Arg(16)->Arg(20);
BENCHMARK(bm_reflect_openmp)->Arg(16)->Arg(20);
BENCHMARK(bm_masked_norm2_serial)->Arg(18)->Arg(22);
BENCHMARK(bm_masked_norm2_openmp)->Arg(18)->Arg(22);
BENCHMARK(bm_apply_targeted_serial)->Arg(16)->Arg(20);
BENCHMARK(bm_apply_targeted_openmp)->Arg(16)->Arg(20);

BENCHMARK_MAIN();
