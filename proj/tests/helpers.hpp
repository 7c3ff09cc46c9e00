#ifndef AAE_TESTS_HELPERS_HPP
#define AAE_TESTS_HELPERS_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "aae/dense_operator.hpp"
#include "aae/kernels.hpp"
#include "aae/oracles.hpp"
#include "aae/rng.hpp"
#include "aae/statevector.hpp"

namespace aae::testing {

inline std::vector<cd> random_amplitudes(std::size_t dim, Rng& rng) {
    std::vector<cd> v(dim);
    double n2 = 0.0;
    for (auto& x : v) {
        x = standard_normal_complex(rng);
        n2 += std::norm(x);
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& x : v) x *= inv;
    return v;
}

inline StateVector random_state(unsigned n_qubits, Rng& rng) {
    return state_from_amplitudes(
        n_qubits, random_amplitudes(std::size_t{1} << n_qubits, rng));
}

// Orthonormal frame from random vectors, modified Gram-Schmidt with a second
// pass so the columns are orthonormal to machine precision.
inline std::vector<std::vector<cd>> random_frame(std::size_t dim,
                                                 std::size_t count, Rng& rng) {
    std::vector<std::vector<cd>> cols;
    while (cols.size() < count) {
        std::vector<cd> v(dim);
        for (auto& x : v) x = standard_normal_complex(rng);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& c : cols) {
                const cd ip = kernels::vdot(c.data(), v.data(), dim);
                for (std::size_t i = 0; i < dim; ++i) v[i] -= ip * c[i];
            }
        }
        const double n2 = kernels::norm2(v.data(), dim);
        if (n2 < 1e-8) continue;  // unlucky draw, essentially in the span
        const double inv = 1.0 / std::sqrt(n2);
        for (auto& x : v) x *= inv;
        cols.push_back(std::move(v));
    }
    return cols;
}

// Rank-r orthogonal projector built from a random frame.
inline DenseOperator random_projector(std::size_t dim, std::size_t rank,
                                      Rng& rng) {
    const auto cols = random_frame(dim, rank, rng);
    DenseOperator p = DenseOperator::zero(dim, OpKind::projector);
    for (const auto& c : cols) {
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                p.at(i, j) += c[i] * std::conj(c[j]);
            }
        }
    }
    return p;
}

inline DenseOperator random_hermitian(std::size_t dim, Rng& rng) {
    DenseOperator h(dim, OpKind::hermitian);
    for (std::size_t i = 0; i < dim; ++i) {
        h.at(i, i) = 2.0 * uniform01(rng) - 1.0;
        for (std::size_t j = i + 1; j < dim; ++j) {
            const cd x = 0.5 * standard_normal_complex(rng);
            h.at(i, j) = x;
            h.at(j, i) = std::conj(x);
        }
    }
    return h;
}

// State with an exact marked probability p against the given projector:
// sqrt(p) * (unit vector in range P) + sqrt(1-p) * (unit vector in ker P).
inline std::vector<cd> state_with_marked_probability(const DenseOperator& p,
                                                     double prob, Rng& rng) {
    const std::size_t dim = p.dim;
    std::vector<cd> in(dim), out(dim);
    for (;;) {
        const auto v = random_amplitudes(dim, rng);
        in = apply(p, v);
        if (kernels::norm2(in.data(), dim) > 1e-6) break;
    }
    for (;;) {
        const auto v = random_amplitudes(dim, rng);
        const auto pv = apply(p, v);
        for (std::size_t i = 0; i < dim; ++i) out[i] = v[i] - pv[i];
        if (kernels::norm2(out.data(), dim) > 1e-6) break;
    }
    const double ni = 1.0 / std::sqrt(kernels::norm2(in.data(), dim));
    const double no = 1.0 / std::sqrt(kernels::norm2(out.data(), dim));
    std::vector<cd> psi(dim);
    const double a = std::sqrt(prob), b = std::sqrt(1.0 - prob);
    for (std::size_t i = 0; i < dim; ++i) {
        psi[i] = a * ni * in[i] + b * no * out[i];
    }
    return psi;
}

inline double vec_max_abs_diff(const std::vector<cd>& x,
                               const std::vector<cd>& y) {
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        worst = std::max(worst, std::abs(x[i] - y[i]));
    }
    return worst;
}

}  // namespace aae::testing

#endif
