#ifndef AAE_FERMION_HPP
#define AAE_FERMION_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "aae/dense_operator.hpp"
#include "aae/estimation.hpp"
#include "aae/oracles.hpp"

namespace aae {

// ---------------------------------------------------------------------------
// One-body fermionic operators A = sum_pq A_pq a^dag_p a_q with a real
// symmetric coefficient matrix.  Orbital p maps onto qubit p (little-endian,
// qubit 0 is the least significant bit of a basis index).
// ---------------------------------------------------------------------------

struct OneBodyOperator {
    unsigned n_orbitals = 0;
    std::vector<double> a;  // row-major, n_orbitals^2 entries, symmetric

    double at(unsigned p, unsigned q) const { return a[p * n_orbitals + q]; }
};

OneBodyOperator make_one_body(unsigned n_orbitals, std::vector<double> entries);
// Real part check + symmetry check; complex entries are rejected.
OneBodyOperator one_body_from_matrix(const DenseOperator& m);
// Text format: first token is the orbital count N, then N*N entries
// row-major, whitespace separated.  Lines starting with '#' are comments.
OneBodyOperator load_one_body(const std::string& path);
void save_one_body(const OneBodyOperator& op, const std::string& path);

// Dense second-quantized matrix on 2^N dimensions, built directly from the
// ladder-operator action; the reference the string decomposition is tested
// against.
DenseOperator one_body_matrix(const OneBodyOperator& op);

// ---------------------------------------------------------------------------
// Pauli strings, one code per qubit (0 = I, 1 = X, 2 = Y, 3 = Z).
// ---------------------------------------------------------------------------

struct PauliString {
    double coeff = 1.0;
    std::vector<std::uint8_t> codes;

    unsigned n_qubits() const { return static_cast<unsigned>(codes.size()); }
    bool is_identity() const;
    std::string label() const;  // e.g. "XZY", qubit 0 first
    DenseOperator matrix() const;
};

// a^dag_p a_q + a^dag_q a_p -> (X Z..Z X + Y Z..Z Y) / 2 across p..q, and
// a^dag_p a_p -> (1 - Z_p) / 2.  Emits diagonals first (identity then Z),
// then pairs in lexicographic order; zero coefficients are dropped.
std::vector<PauliString> jordan_wigner_one_body(const OneBodyOperator& op);

// ---------------------------------------------------------------------------
// Signed projector splits.  A hermitian involution U becomes the projector
// (1 + U)/2, whose reflection is -U; a weight w contributes 2|w| to the
// group matching sign(w) and -w to the scalar offset.  Identity terms fold
// into the offset directly.  Group 0 carries sign +1, group 1 sign -1;
// either may end up empty.
// ---------------------------------------------------------------------------

ProjectorSum signed_projector_split(std::span<const double> weights,
                                    std::span<const DenseOperator> unitaries,
                                    double identity_offset,
                                    std::span<const std::string> labels = {});

ProjectorSum projector_decomposition(std::span<const PauliString> strings);

struct BetaNorms {
    double norm_11 = 0.0;      // sum_jk beta_jk
    double norm_1_half = 0.0;  // sum_j (sum_k sqrt(beta_jk))^2
};

BetaNorms beta_norms(const ProjectorSum& sum);

// ---------------------------------------------------------------------------
// Drift bounds for parameterized Hamiltonians H(x) with spectral gap at
// least `gap` and ||dH/dx|| at most `hdot_max` on the stretch of interest.
// The ground state moves at rate at most hdot_max/gap, projector
// expectations at twice that.
// ---------------------------------------------------------------------------

double state_motion_bound(double hdot_max, double gap);
double projector_drift_bound(double hdot_max, double gap);
// Largest step r so that expectations drift by at most epsilon/(4 nu11) and
// every probability ceiling p0 keeps a margin to 1/4.
double extrapolation_radius(double hdot_max, double gap, double epsilon,
                            double beta_norm_11, double p0_max);

// ---------------------------------------------------------------------------
// Parameterized Hamiltonian H(x) = sum_j alpha_j(x) T_j on x in [-1, 1],
// with coefficient functions that extend to the complex plane (the
// quadrature module samples them on a contour).  Terms must be hermitian;
// gradient decompositions additionally require hermitian involutions.
// ---------------------------------------------------------------------------

struct PathCoefficient {
    std::function<cd(cd)> f;
    std::function<cd(cd)> df;

    static PathCoefficient constant(double value);
    static PathCoefficient linear(double slope);
    static PathCoefficient affine(double value, double slope);
    static PathCoefficient exponential(double value, double rate);
    static PathCoefficient sine(double value, double freq);
};

struct HamiltonianPath {
    std::vector<PathCoefficient> coeffs;
    std::vector<DenseOperator> terms;

    std::size_t dim() const;
    DenseOperator at(double x) const;           // hermitian
    DenseOperator matrix_at(cd z) const;        // analytic continuation
    DenseOperator derivative_at(double x) const;
    // Grid maxima over x in [-1, 1]; used by the drift bounds.
    double max_derivative_norm(int samples = 64) const;
    double min_gap(int samples = 64) const;
};

// ---------------------------------------------------------------------------
// Ground-state preparation.  The simulator prepares the exact ground state;
// the attached cost model charges the hamiltonian_block_encoding counter
// with ceil(alpha_norm / (overlap * gap)) block-encoding queries per
// preparation, the cost a filtering-based preparation would pay.
// ---------------------------------------------------------------------------

struct GroundStateOptions {
    // Basis state used as the cheap reference; -1 picks the one with the
    // largest ground-state amplitude.
    long long reference_basis_state = -1;
    // Block-encoding normalization; 0 uses the spectral norm of H.
    double alpha_norm = 0.0;
    double eps_psi = 1e-12;  // nominal preparation error
};

struct GroundStateCostModel {
    double alpha_norm = 0.0;
    double gap = 0.0;
    double overlap = 0.0;
    long long queries_per_preparation = 0;
    int phase_bits = 0;  // max(1, ceil(log2(alpha_norm / gap)))
    double eps_psi = 0.0;
};

struct GroundStatePrep {
    StatePrepOracle oracle;
    GroundStateCostModel cost;
    CounterPtr block_counter;  // "hamiltonian_block_encoding"
    double ground_energy = 0.0;
    double gap = 0.0;
    std::vector<cd> ground_state;
};

GroundStatePrep ground_state_prep(const DenseOperator& h,
                                  const GroundStateOptions& opts = {});

// ---------------------------------------------------------------------------
// End-to-end one-body measurement: prepare the ground state of a (many-body)
// Hamiltonian, decompose the observable into signed projector groups through
// its string form, build priors automatically and run the projector-sum
// protocol.  The exact expectation from the simulator rides along as the
// reference.
// ---------------------------------------------------------------------------

struct ObservableJob {
    DenseOperator hamiltonian;  // dimension 2^n_orbitals
    OneBodyOperator observable;
    double epsilon = 1e-3;
    double failure_probability = 0.05;
    int mu_cap = 12;
    double residual_ceiling = 0.2;
    GroundStateOptions ground;
};

struct ObservableEstimate {
    ProjectorSumEstimate estimate;
    AutoPriorResult priors;
    GroundStateCostModel cost;
    double exact_value = 0.0;    // <psi| A |psi> from the simulator
    double ground_energy = 0.0;
};

ObservableEstimate measure_one_body_on_ground_state(const ObservableJob& job,
                                                    const AeConfig& cfg,
                                                    Rng& rng);

// ---------------------------------------------------------------------------
// Built-in instances used by the command line tool and the experiments.
// Constants were tuned so the spectral gaps, reference overlaps and group
// probabilities stay comfortably inside the regimes the protocols need.
// ---------------------------------------------------------------------------

OneBodyOperator builtin_one_body(unsigned n_orbitals);
DenseOperator builtin_hamiltonian(unsigned n_orbitals);
HamiltonianPath builtin_path();

}  // namespace aae

#endif
