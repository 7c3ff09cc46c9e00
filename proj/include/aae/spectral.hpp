#ifndef AAE_SPECTRAL_HPP
#define AAE_SPECTRAL_HPP

#include <cstddef>
#include <vector>

#include "aae/dense_operator.hpp"

namespace aae {

struct SpectralData {
    std::vector<double> eigenvalues;  // ascending
    DenseOperator eigenvectors;       // column k is the k-th eigenvector
    double ground_energy = 0.0;
    double gap = 0.0;                 // eigenvalues[1] - eigenvalues[0]
};

// Dimension cap for dense diagonalization (default 2^10).
std::size_t eigensolve_cap();
void set_eigensolve_cap(std::size_t dim);

// Full dense diagonalization of a hermitian operator.  Eigenvector phases
// are fixed by making the largest-magnitude component real positive, so
// results are deterministic.
SpectralData exact_eigensolve(const DenseOperator& h);

// Eigenvalues of a general (possibly non-hermitian) operator; used for
// analytic continuation along complex parameter contours.
std::vector<cd> complex_eigenvalues(const DenseOperator& m);

}  // namespace aae

#endif
