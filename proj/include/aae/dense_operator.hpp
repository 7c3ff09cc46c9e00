#ifndef AAE_DENSE_OPERATOR_HPP
#define AAE_DENSE_OPERATOR_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace aae {

using cd = std::complex<double>;

enum class OpKind { general, unitary, hermitian, projector };

// Dense square matrix.  No gate compilation anywhere; operators at the scale
// this project works with (system registers of a handful of qubits) are kept
// as explicit matrices and larger composites are applied in factored form.
struct DenseOperator {
    std::size_t dim = 0;
    OpKind kind = OpKind::general;
    std::vector<cd> a;  // row-major, dim*dim entries

    DenseOperator() = default;
    DenseOperator(std::size_t d, OpKind k);

    cd& at(std::size_t r, std::size_t c) { return a[r * dim + c]; }
    const cd& at(std::size_t r, std::size_t c) const { return a[r * dim + c]; }

    static DenseOperator identity(std::size_t d);
    static DenseOperator zero(std::size_t d, OpKind k = OpKind::general);
};

DenseOperator multiply(const DenseOperator& x, const DenseOperator& y);
DenseOperator adjoint(const DenseOperator& x);
DenseOperator kron(const DenseOperator& x, const DenseOperator& y);
DenseOperator add(const DenseOperator& x, const DenseOperator& y);
DenseOperator subtract(const DenseOperator& x, const DenseOperator& y);
DenseOperator scale(cd s, const DenseOperator& x);

std::vector<cd> apply(const DenseOperator& x, const std::vector<cd>& v);

double max_abs_diff(const DenseOperator& x, const DenseOperator& y);
// max-norm deviation of x^dagger x from the identity
double unitarity_defect(const DenseOperator& x);
double hermiticity_defect(const DenseOperator& x);
// max-norm deviation of x*x from x (for projector candidates)
double idempotency_defect(const DenseOperator& x);

// Single-qubit constants, used all over the tests.
DenseOperator pauli_i();
DenseOperator pauli_x();
DenseOperator pauli_y();
DenseOperator pauli_z();
DenseOperator hadamard();

}  // namespace aae

#endif
