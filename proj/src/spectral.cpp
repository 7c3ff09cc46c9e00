#include "aae/spectral.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <string>

#include "aae/errors.hpp"

namespace aae {

namespace {

std::atomic<std::size_t> g_eigensolve_cap{std::size_t{1} << 10};

using EigenMat =
    Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

std::size_t eigensolve_cap() { return g_eigensolve_cap.load(); }

void set_eigensolve_cap(std::size_t dim) { g_eigensolve_cap.store(dim); }

SpectralData exact_eigensolve(const DenseOperator& h) {
    if (h.dim > eigensolve_cap()) {
        throw ResourceError("dimension " + std::to_string(h.dim) +
                            " exceeds the eigensolver cap of " +
                            std::to_string(eigensolve_cap()));
    }
    if (h.kind != OpKind::hermitian && h.kind != OpKind::projector) {
        throw ArgumentError("exact_eigensolve requires a hermitian operator");
    }
    if (hermiticity_defect(h) > 1e-10) {
        throw ArgumentError("operator tagged hermitian deviates from its "
                            "adjoint by more than 1e-10");
    }
    Eigen::Map<const EigenMat> m(h.a.data(), h.dim, h.dim);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
    if (solver.info() != Eigen::Success) {
        throw Error("eigensolver failed to converge");
    }

    SpectralData out;
    out.eigenvalues.resize(h.dim);
    for (std::size_t i = 0; i < h.dim; ++i) {
        out.eigenvalues[i] = solver.eigenvalues()(static_cast<long>(i));
    }
    out.eigenvectors = DenseOperator(h.dim, OpKind::unitary);
    for (std::size_t k = 0; k < h.dim; ++k) {
        Eigen::VectorXcd v = solver.eigenvectors().col(static_cast<long>(k));
        // Deterministic phase: largest-magnitude component real positive.
        long pivot = 0;
        double best = -1.0;
        for (long i = 0; i < v.size(); ++i) {
            const double mag = std::abs(v(i));
            if (mag > best + 1e-15) {
                best = mag;
                pivot = i;
            }
        }
        const cd piv = v(pivot);
        if (std::abs(piv) > 0.0) v *= std::conj(piv) / std::abs(piv);
        for (std::size_t i = 0; i < h.dim; ++i) {
            out.eigenvectors.at(i, k) = v(static_cast<long>(i));
        }
    }
    out.ground_energy = out.eigenvalues.front();
    out.gap = h.dim > 1 ? out.eigenvalues[1] - out.eigenvalues[0] : 0.0;
    return out;
}

std::vector<cd> complex_eigenvalues(const DenseOperator& m) {
    if (m.dim > eigensolve_cap()) {
        throw ResourceError("dimension " + std::to_string(m.dim) +
                            " exceeds the eigensolver cap of " +
                            std::to_string(eigensolve_cap()));
    }
    Eigen::Map<const EigenMat> em(m.a.data(), m.dim, m.dim);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(em, false);
    if (solver.info() != Eigen::Success) {
        throw Error("eigensolver failed to converge");
    }
    std::vector<cd> out(m.dim);
    for (std::size_t i = 0; i < m.dim; ++i) {
        out[i] = solver.eigenvalues()(static_cast<long>(i));
    }
    return out;
}

}  // namespace aae
