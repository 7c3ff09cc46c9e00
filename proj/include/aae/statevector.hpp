#ifndef AAE_STATEVECTOR_HPP
#define AAE_STATEVECTOR_HPP

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "aae/dense_operator.hpp"

namespace aae {

// Qubit ordering is little-endian throughout: qubit 0 is the least
// significant bit of the basis-state index.

struct StateVector {
    unsigned n_qubits = 0;
    std::vector<cd> amps;
};

// Register budget for full composite states.  Estimation instances allocate
// prepare/select/mirror registers on top of the system register, so the cap
// guards against accidentally unrepresentable requests.
unsigned qubit_budget();
void set_qubit_budget(unsigned n);

StateVector init_basis_state(unsigned n_qubits, std::uint64_t index);

// Wraps raw amplitudes; validates the norm (1 within 1e-12) unless told not
// to.  Mutation stays inside kernels; the public API is pure.
StateVector state_from_amplitudes(unsigned n_qubits, std::vector<cd> amps,
                                  bool check_norm = true);

StateVector apply_unitary(const StateVector& state, const DenseOperator& u,
                          std::span<const unsigned> targets,
                          std::span<const unsigned> controls = {});

// Probability of reading `outcome` on the listed qubits.  The outcome string
// is written most-significant-first: its last character belongs to reg[0].
double measurement_probability(const StateVector& state,
                               std::span<const unsigned> reg,
                               std::string_view outcome);

// <state| op |state> for a hermitian (or projector) operator on the full
// register.
double expectation_value(const StateVector& state, const DenseOperator& op);

cd overlap(const StateVector& x, const StateVector& y);

// Returns a renormalized copy when the norm has drifted more than `tol` from
// one; otherwise returns the input unchanged.  Each renormalization is
// counted so long pipelines can report drift events.
StateVector renormalized_if_drifted(const StateVector& state,
                                    double tol = 1e-12);
long long renormalization_events();

}  // namespace aae

#endif
