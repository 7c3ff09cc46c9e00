#include "aae/statevector.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "aae/errors.hpp"
#include "aae/kernels.hpp"

namespace aae {

namespace {

std::atomic<unsigned> g_qubit_budget{20};
std::atomic<long long> g_renorm_events{0};

void require_qubits(unsigned n) {
    if (n == 0) throw ArgumentError("state needs at least one qubit");
    if (n > qubit_budget()) {
        throw ResourceError("requested " + std::to_string(n) +
                            " qubits exceeds the budget of " +
                            std::to_string(qubit_budget()));
    }
}

}  // namespace

unsigned qubit_budget() { return g_qubit_budget.load(); }

void set_qubit_budget(unsigned n) { g_qubit_budget.store(n); }

StateVector init_basis_state(unsigned n_qubits, std::uint64_t index) {
    require_qubits(n_qubits);
    const std::uint64_t dim = std::uint64_t{1} << n_qubits;
    if (index >= dim) {
        throw RangeError("basis index " + std::to_string(index) +
                         " out of range for " + std::to_string(n_qubits) +
                         " qubits");
    }
    StateVector s;
    s.n_qubits = n_qubits;
    s.amps.assign(dim, cd{0.0, 0.0});
    s.amps[index] = 1.0;
    return s;
}

StateVector state_from_amplitudes(unsigned n_qubits, std::vector<cd> amps,
                                  bool check_norm) {
    require_qubits(n_qubits);
    const std::size_t dim = std::size_t{1} << n_qubits;
    if (amps.size() != dim) {
        throw ShapeError("amplitude vector length " +
                         std::to_string(amps.size()) + " != 2^" +
                         std::to_string(n_qubits));
    }
    if (check_norm) {
        const double n2 = kernels::norm2(amps.data(), amps.size());
        if (std::abs(n2 - 1.0) > 1e-12) {
            throw ArgumentError("state norm deviates from 1 by " +
                                std::to_string(std::abs(n2 - 1.0)));
        }
    }
    StateVector s;
    s.n_qubits = n_qubits;
    s.amps = std::move(amps);
    return s;
}

StateVector apply_unitary(const StateVector& state, const DenseOperator& u,
                          std::span<const unsigned> targets,
                          std::span<const unsigned> controls) {
    if (u.kind != OpKind::unitary) {
        throw ArgumentError("apply_unitary requires an operator tagged unitary");
    }
    if (targets.empty()) throw ArgumentError("no target qubits given");
    const std::size_t d = std::size_t{1} << targets.size();
    if (u.dim != d) {
        throw ShapeError("operator dimension " + std::to_string(u.dim) +
                         " does not match " + std::to_string(targets.size()) +
                         " target qubits");
    }
    std::uint64_t seen = 0;
    for (unsigned q : targets) {
        if (q >= state.n_qubits) {
            throw RangeError("target qubit " + std::to_string(q) +
                             " out of range");
        }
        const std::uint64_t bit = std::uint64_t{1} << q;
        if (seen & bit) throw ArgumentError("duplicate target qubit");
        seen |= bit;
    }
    for (unsigned q : controls) {
        if (q >= state.n_qubits) {
            throw RangeError("control qubit " + std::to_string(q) +
                             " out of range");
        }
        const std::uint64_t bit = std::uint64_t{1} << q;
        if (seen & bit) {
            throw ArgumentError("control qubit overlaps another operand");
        }
        seen |= bit;
    }
    StateVector out = state;
    kernels::apply_targeted(out.amps.data(), out.n_qubits, u.a.data(), targets,
                            controls);
    return out;
}

double measurement_probability(const StateVector& state,
                               std::span<const unsigned> reg,
                               std::string_view outcome) {
    if (reg.empty()) throw ArgumentError("empty register");
    if (outcome.size() != reg.size()) {
        throw ShapeError("outcome string length " +
                         std::to_string(outcome.size()) +
                         " does not match register size " +
                         std::to_string(reg.size()));
    }
    std::uint64_t mask = 0;
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < reg.size(); ++i) {
        const unsigned q = reg[i];
        if (q >= state.n_qubits) {
            throw RangeError("register qubit " + std::to_string(q) +
                             " out of range");
        }
        const std::uint64_t bit = std::uint64_t{1} << q;
        if (mask & bit) throw ArgumentError("duplicate register qubit");
        mask |= bit;
        const char c = outcome[outcome.size() - 1 - i];
        if (c == '1') {
            value |= bit;
        } else if (c != '0') {
            throw ArgumentError("outcome must be a bitstring of 0s and 1s");
        }
    }
    return kernels::masked_norm2(state.amps.data(), state.amps.size(), mask,
                                 value);
}

double expectation_value(const StateVector& state, const DenseOperator& op) {
    if (op.kind != OpKind::hermitian && op.kind != OpKind::projector) {
        throw ArgumentError(
            "expectation_value requires a hermitian or projector operator");
    }
    if (op.dim != state.amps.size()) {
        throw ShapeError("operator dimension does not match state");
    }
    std::vector<cd> w(op.dim);
    kernels::matvec(op.a.data(), state.amps.data(), w.data(), op.dim);
    return kernels::vdot(state.amps.data(), w.data(), op.dim).real();
}

cd overlap(const StateVector& x, const StateVector& y) {
    if (x.amps.size() != y.amps.size()) {
        throw ShapeError("states live on different registers");
    }
    return kernels::vdot(x.amps.data(), y.amps.data(), x.amps.size());
}

StateVector renormalized_if_drifted(const StateVector& state, double tol) {
    const double n2 = kernels::norm2(state.amps.data(), state.amps.size());
    if (std::abs(n2 - 1.0) <= tol) return state;
    g_renorm_events.fetch_add(1);
    StateVector out = state;
    const double inv = 1.0 / std::sqrt(n2);
    for (cd& a : out.amps) a *= inv;
    return out;
}

long long renormalization_events() { return g_renorm_events.load(); }

}  // namespace aae
