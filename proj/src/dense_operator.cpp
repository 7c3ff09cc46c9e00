#include "aae/dense_operator.hpp"

#include <algorithm>
#include <cmath>

#include "aae/errors.hpp"
#include "aae/kernels.hpp"

namespace aae {

DenseOperator::DenseOperator(std::size_t d, OpKind k)
    : dim(d), kind(k), a(d * d, cd{0.0, 0.0}) {}

DenseOperator DenseOperator::identity(std::size_t d) {
    DenseOperator m(d, OpKind::unitary);
    for (std::size_t i = 0; i < d; ++i) m.at(i, i) = 1.0;
    return m;
}

DenseOperator DenseOperator::zero(std::size_t d, OpKind k) {
    return DenseOperator(d, k);
}

namespace {

void require_same_dim(const DenseOperator& x, const DenseOperator& y) {
    if (x.dim != y.dim) {
        throw ShapeError("operator dimensions differ: " +
                         std::to_string(x.dim) + " vs " +
                         std::to_string(y.dim));
    }
}

}  // namespace

DenseOperator multiply(const DenseOperator& x, const DenseOperator& y) {
    require_same_dim(x, y);
    DenseOperator out(x.dim, OpKind::general);
    if (x.kind == OpKind::unitary && y.kind == OpKind::unitary) {
        out.kind = OpKind::unitary;
    }
    kernels::matmul(x.a.data(), y.a.data(), out.a.data(), x.dim);
    return out;
}

DenseOperator adjoint(const DenseOperator& x) {
    DenseOperator out(x.dim, x.kind);
    for (std::size_t i = 0; i < x.dim; ++i) {
        for (std::size_t j = 0; j < x.dim; ++j) {
            out.at(i, j) = std::conj(x.at(j, i));
        }
    }
    return out;
}

DenseOperator kron(const DenseOperator& x, const DenseOperator& y) {
    DenseOperator out(x.dim * y.dim, OpKind::general);
    if (x.kind == OpKind::unitary && y.kind == OpKind::unitary) {
        out.kind = OpKind::unitary;
    } else if (x.kind == OpKind::hermitian && y.kind == OpKind::hermitian) {
        out.kind = OpKind::hermitian;
    }
    for (std::size_t i = 0; i < x.dim; ++i) {
        for (std::size_t j = 0; j < x.dim; ++j) {
            const cd xij = x.at(i, j);
            if (xij == cd{0.0, 0.0}) continue;
            for (std::size_t k = 0; k < y.dim; ++k) {
                for (std::size_t l = 0; l < y.dim; ++l) {
                    out.at(i * y.dim + k, j * y.dim + l) = xij * y.at(k, l);
                }
            }
        }
    }
    return out;
}

DenseOperator add(const DenseOperator& x, const DenseOperator& y) {
    require_same_dim(x, y);
    DenseOperator out(x.dim, OpKind::general);
    if (x.kind == OpKind::hermitian && y.kind == OpKind::hermitian) {
        out.kind = OpKind::hermitian;
    }
    for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] = x.a[i] + y.a[i];
    return out;
}

DenseOperator subtract(const DenseOperator& x, const DenseOperator& y) {
    require_same_dim(x, y);
    DenseOperator out(x.dim, OpKind::general);
    if (x.kind == OpKind::hermitian && y.kind == OpKind::hermitian) {
        out.kind = OpKind::hermitian;
    }
    for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] = x.a[i] - y.a[i];
    return out;
}

DenseOperator scale(cd s, const DenseOperator& x) {
    DenseOperator out(x.dim, OpKind::general);
    if (x.kind == OpKind::hermitian && s.imag() == 0.0) {
        out.kind = OpKind::hermitian;
    }
    for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] = s * x.a[i];
    return out;
}

std::vector<cd> apply(const DenseOperator& x, const std::vector<cd>& v) {
    if (v.size() != x.dim) {
        throw ShapeError("vector length " + std::to_string(v.size()) +
                         " does not match operator dimension " +
                         std::to_string(x.dim));
    }
    std::vector<cd> out(x.dim);
    kernels::matvec(x.a.data(), v.data(), out.data(), x.dim);
    return out;
}

double max_abs_diff(const DenseOperator& x, const DenseOperator& y) {
    require_same_dim(x, y);
    double m = 0.0;
    for (std::size_t i = 0; i < x.a.size(); ++i) {
        m = std::max(m, std::abs(x.a[i] - y.a[i]));
    }
    return m;
}

double unitarity_defect(const DenseOperator& x) {
    return max_abs_diff(multiply(adjoint(x), x),
                        DenseOperator::identity(x.dim));
}

double hermiticity_defect(const DenseOperator& x) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.dim; ++i) {
        for (std::size_t j = 0; j < x.dim; ++j) {
            m = std::max(m, std::abs(x.at(i, j) - std::conj(x.at(j, i))));
        }
    }
    return m;
}

double idempotency_defect(const DenseOperator& x) {
    return max_abs_diff(multiply(x, x), x);
}

DenseOperator pauli_i() { return DenseOperator::identity(2); }

DenseOperator pauli_x() {
    DenseOperator m(2, OpKind::unitary);
    m.at(0, 1) = 1.0;
    m.at(1, 0) = 1.0;
    return m;
}

DenseOperator pauli_y() {
    DenseOperator m(2, OpKind::unitary);
    m.at(0, 1) = cd{0.0, -1.0};
    m.at(1, 0) = cd{0.0, 1.0};
    return m;
}

DenseOperator pauli_z() {
    DenseOperator m(2, OpKind::unitary);
    m.at(0, 0) = 1.0;
    m.at(1, 1) = -1.0;
    return m;
}

DenseOperator hadamard() {
    const double s = 1.0 / std::sqrt(2.0);
    DenseOperator m(2, OpKind::unitary);
    m.at(0, 0) = s;
    m.at(0, 1) = s;
    m.at(1, 0) = s;
    m.at(1, 1) = -s;
    return m;
}

}  // namespace aae
