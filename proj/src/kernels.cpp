#include "aae/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace aae::kernels {

namespace {

std::atomic<Backend> g_backend{[] {
#ifdef _OPENMP
    const char* env = std::getenv("AAE_KERNELS");
    if (env != nullptr && std::strcmp(env, "serial") == 0) {
        return Backend::serial;
    }
    return Backend::openmp;
#else
    return Backend::serial;
#endif
}()};

// Reductions are split into a fixed number of chunks, each accumulated
// serially and combined in chunk order.  The chunk grid depends only on the
// problem size, never on the thread count.
constexpr std::size_t kReductionChunks = 64;
constexpr std::size_t kMinChunk = 1024;

std::size_t chunk_count(std::size_t n) {
    std::size_t by_min = (n + kMinChunk - 1) / kMinChunk;
    if (by_min < 1) by_min = 1;
    return by_min < kReductionChunks ? by_min : kReductionChunks;
}

}  // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

void set_backend(Backend b) { g_backend.store(b, std::memory_order_relaxed); }

namespace serial {

void matvec(const cd* a, const cd* x, cd* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        cd acc{0.0, 0.0};
        const cd* row = a + i * n;
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
}

void matmul(const cd* a, const cd* b, cd* c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        cd* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] = cd{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) {
            const cd aik = a[i * n + k];
            if (aik == cd{0.0, 0.0}) continue;
            const cd* brow = b + k * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
}

namespace detail {

struct TargetPlan {
    std::size_t d = 0;                    // 2^(number of targets)
    std::size_t reps = 0;                 // number of representatives
    std::uint64_t control_mask = 0;
    std::vector<std::uint64_t> spread;    // sub-index -> spread target bits
    std::vector<unsigned> free_bits;      // non-target qubit positions
};

TargetPlan plan_targets(unsigned n_qubits, std::span<const unsigned> targets,
                        std::span<const unsigned> controls) {
    TargetPlan p;
    const std::size_t m = targets.size();
    p.d = std::size_t{1} << m;
    p.spread.resize(p.d);
    for (std::size_t j = 0; j < p.d; ++j) {
        std::uint64_t s = 0;
        for (std::size_t b = 0; b < m; ++b) {
            if ((j >> b) & 1u) s |= std::uint64_t{1} << targets[b];
        }
        p.spread[j] = s;
    }
    std::uint64_t target_mask = 0;
    for (unsigned t : targets) target_mask |= std::uint64_t{1} << t;
    for (unsigned c : controls) p.control_mask |= std::uint64_t{1} << c;
    for (unsigned q = 0; q < n_qubits; ++q) {
        if (!((target_mask >> q) & 1u)) p.free_bits.push_back(q);
    }
    p.reps = std::size_t{1} << p.free_bits.size();
    return p;
}

inline std::uint64_t deposit(std::uint64_t k,
                             const std::vector<unsigned>& positions) {
    std::uint64_t r = 0;
    for (std::size_t b = 0; b < positions.size(); ++b) {
        if ((k >> b) & 1u) r |= std::uint64_t{1} << positions[b];
    }
    return r;
}

inline void apply_block(cd* amps, const cd* u, const TargetPlan& p,
                        std::uint64_t rep, cd* gather, cd* result) {
    const std::size_t d = p.d;
    for (std::size_t j = 0; j < d; ++j) gather[j] = amps[rep | p.spread[j]];
    for (std::size_t i = 0; i < d; ++i) {
        cd acc{0.0, 0.0};
        const cd* row = u + i * d;
        for (std::size_t j = 0; j < d; ++j) acc += row[j] * gather[j];
        result[i] = acc;
    }
    for (std::size_t j = 0; j < d; ++j) amps[rep | p.spread[j]] = result[j];
}

}  // namespace detail

void apply_targeted(cd* amps, unsigned n_qubits, const cd* u,
                    std::span<const unsigned> targets,
                    std::span<const unsigned> controls) {
    const auto p = detail::plan_targets(n_qubits, targets, controls);
    std::vector<cd> gather(p.d), result(p.d);
    for (std::size_t k = 0; k < p.reps; ++k) {
        const std::uint64_t rep = detail::deposit(k, p.free_bits);
        if ((rep & p.control_mask) != p.control_mask) continue;
        detail::apply_block(amps, u, p, rep, gather.data(), result.data());
    }
}

double masked_norm2(const cd* v, std::size_t n, std::uint64_t mask,
                    std::uint64_t value) {
    const std::size_t chunks = chunk_count(n);
    double total = 0.0;
    for (std::size_t ch = 0; ch < chunks; ++ch) {
        const std::size_t lo = ch * n / chunks;
        const std::size_t hi = (ch + 1) * n / chunks;
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            if ((i & mask) == value) acc += std::norm(v[i]);
        }
        total += acc;
    }
    return total;
}

cd vdot(const cd* a, const cd* b, std::size_t n) {
    const std::size_t chunks = chunk_count(n);
    cd total{0.0, 0.0};
    for (std::size_t ch = 0; ch < chunks; ++ch) {
        const std::size_t lo = ch * n / chunks;
        const std::size_t hi = (ch + 1) * n / chunks;
        cd acc{0.0, 0.0};
        for (std::size_t i = lo; i < hi; ++i) acc += std::conj(a[i]) * b[i];
        total += acc;
    }
    return total;
}

double norm2(const cd* v, std::size_t n) {
    return masked_norm2(v, n, 0u, 0u);
}

void reflect_about_state(cd* v, const cd* phi, std::size_t n) {
    const cd c = 2.0 * vdot(phi, v, n);
    for (std::size_t i = 0; i < n; ++i) v[i] -= c * phi[i];
}

void flip_sign_masked(cd* v, std::size_t n, std::uint64_t mask,
                      std::uint64_t value) {
    for (std::size_t i = 0; i < n; ++i) {
        if ((i & mask) == value) v[i] = -v[i];
    }
}

}  // namespace serial

namespace openmp {

#ifndef _OPENMP

void matvec(const cd* a, const cd* x, cd* y, std::size_t n) {
    serial::matvec(a, x, y, n);
}
void matmul(const cd* a, const cd* b, cd* c, std::size_t n) {
    serial::matmul(a, b, c, n);
}
void apply_targeted(cd* amps, unsigned n_qubits, const cd* u,
                    std::span<const unsigned> targets,
                    std::span<const unsigned> controls) {
    serial::apply_targeted(amps, n_qubits, u, targets, controls);
}
double masked_norm2(const cd* v, std::size_t n, std::uint64_t mask,
                    std::uint64_t value) {
    return serial::masked_norm2(v, n, mask, value);
}
cd vdot(const cd* a, const cd* b, std::size_t n) {
    return serial::vdot(a, b, n);
}
double norm2(const cd* v, std::size_t n) { return serial::norm2(v, n); }
void reflect_about_state(cd* v, const cd* phi, std::size_t n) {
    serial::reflect_about_state(v, phi, n);
}
void flip_sign_masked(cd* v, std::size_t n, std::uint64_t mask,
                      std::uint64_t value) {
    serial::flip_sign_masked(v, n, mask, value);
}

#else

void matvec(const cd* a, const cd* x, cd* y, std::size_t n) {
#pragma omp parallel for schedule(static) if (n >= 64)
    for (std::size_t i = 0; i < n; ++i) {
        cd acc{0.0, 0.0};
        const cd* row = a + i * n;
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
}

void matmul(const cd* a, const cd* b, cd* c, std::size_t n) {
#pragma omp parallel for schedule(static) if (n >= 32)
    for (std::size_t i = 0; i < n; ++i) {
        cd* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] = cd{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) {
            const cd aik = a[i * n + k];
            if (aik == cd{0.0, 0.0}) continue;
            const cd* brow = b + k * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
}

void apply_targeted(cd* amps, unsigned n_qubits, const cd* u,
                    std::span<const unsigned> targets,
                    std::span<const unsigned> controls) {
    const auto p = serial::detail::plan_targets(n_qubits, targets, controls);
#pragma omp parallel if (p.reps >= 256)
    {
        std::vector<cd> gather(p.d), result(p.d);
#pragma omp for schedule(static)
        for (std::size_t k = 0; k < p.reps; ++k) {
            const std::uint64_t rep = serial::detail::deposit(k, p.free_bits);
            if ((rep & p.control_mask) != p.control_mask) continue;
            serial::detail::apply_block(amps, u, p, rep, gather.data(),
                                        result.data());
        }
    }
}

double masked_norm2(const cd* v, std::size_t n, std::uint64_t mask,
                    std::uint64_t value) {
    const std::size_t chunks = chunk_count(n);
    std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static) if (chunks > 1)
    for (std::size_t ch = 0; ch < chunks; ++ch) {
        const std::size_t lo = ch * n / chunks;
        const std::size_t hi = (ch + 1) * n / chunks;
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            if ((i & mask) == value) acc += std::norm(v[i]);
        }
        partial[ch] = acc;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

cd vdot(const cd* a, const cd* b, std::size_t n) {
    const std::size_t chunks = chunk_count(n);
    std::vector<cd> partial(chunks, cd{0.0, 0.0});
#pragma omp parallel for schedule(static) if (chunks > 1)
    for (std::size_t ch = 0; ch < chunks; ++ch) {
        const std::size_t lo = ch * n / chunks;
        const std::size_t hi = (ch + 1) * n / chunks;
        cd acc{0.0, 0.0};
        for (std::size_t i = lo; i < hi; ++i) acc += std::conj(a[i]) * b[i];
        partial[ch] = acc;
    }
    cd total{0.0, 0.0};
    for (const cd& p : partial) total += p;
    return total;
}

double norm2(const cd* v, std::size_t n) {
    return masked_norm2(v, n, 0u, 0u);
}

void reflect_about_state(cd* v, const cd* phi, std::size_t n) {
    const cd c = 2.0 * vdot(phi, v, n);
#pragma omp parallel for schedule(static) if (n >= 4096)
    for (std::size_t i = 0; i < n; ++i) v[i] -= c * phi[i];
}

void flip_sign_masked(cd* v, std::size_t n, std::uint64_t mask,
                      std::uint64_t value) {
#pragma omp parallel for schedule(static) if (n >= 4096)
    for (std::size_t i = 0; i < n; ++i) {
        if ((i & mask) == value) v[i] = -v[i];
    }
}

#endif  // _OPENMP

}  // namespace openmp

#define AAE_DISPATCH(fn, ...)                        \
    (active_backend() == Backend::serial             \
         ? serial::fn(__VA_ARGS__)                   \
         : openmp::fn(__VA_ARGS__))

void matvec(const cd* a, const cd* x, cd* y, std::size_t n) {
    AAE_DISPATCH(matvec, a, x, y, n);
}
void matmul(const cd* a, const cd* b, cd* c, std::size_t n) {
    AAE_DISPATCH(matmul, a, b, c, n);
}
void apply_targeted(cd* amps, unsigned n_qubits, const cd* u,
                    std::span<const unsigned> targets,
                    std::span<const unsigned> controls) {
    AAE_DISPATCH(apply_targeted, amps, n_qubits, u, targets, controls);
}
double masked_norm2(const cd* v, std::size_t n, std::uint64_t mask,
                    std::uint64_t value) {
    return AAE_DISPATCH(masked_norm2, v, n, mask, value);
}
cd vdot(const cd* a, const cd* b, std::size_t n) {
    return AAE_DISPATCH(vdot, a, b, n);
}
double norm2(const cd* v, std::size_t n) { return AAE_DISPATCH(norm2, v, n); }
void reflect_about_state(cd* v, const cd* phi, std::size_t n) {
    AAE_DISPATCH(reflect_about_state, v, phi, n);
}
void flip_sign_masked(cd* v, std::size_t n, std::uint64_t mask,
                      std::uint64_t value) {
    AAE_DISPATCH(flip_sign_masked, v, n, mask, value);
}

#undef AAE_DISPATCH

}  // namespace aae::kernels
