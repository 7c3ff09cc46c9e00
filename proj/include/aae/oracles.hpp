#ifndef AAE_ORACLES_HPP
#define AAE_ORACLES_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "aae/dense_operator.hpp"
#include "aae/statevector.hpp"

namespace aae {

// ---------------------------------------------------------------------------
// Query accounting.
//
// Counters are shared handles: copying an oracle aliases its counter, so a
// composed circuit charges the same ledger entry as the oracle it was built
// from.  Simulation primitives (apply / prepared_state / to_dense) never
// touch counters; the estimation protocols charge explicitly through
// ChargeSet according to the per-operator rules.  That keeps the accounting
// deterministic: counts depend on the protocol parameters alone, not on how
// the simulation happens to be factored.
// ---------------------------------------------------------------------------

struct QueryCounter {
    std::string name;
    long long count = 0;
};

using CounterPtr = std::shared_ptr<QueryCounter>;

CounterPtr make_counter(std::string name);

struct ChargeSet {
    std::vector<std::pair<CounterPtr, long long>> items;

    void add(CounterPtr counter, long long per_application);
    void extend(const ChargeSet& other, long long factor = 1);
    ChargeSet scaled(long long factor) const;
    // Apply the per-application charges `times` times.
    void charge(long long times = 1) const;
    std::vector<CounterPtr> counters() const;
};

using QuerySnapshot = std::map<std::string, long long>;

QuerySnapshot snapshot_counters(std::span<const CounterPtr> counters);
// Per-name difference after − before; missing names count as zero.
QuerySnapshot snapshot_delta(const QuerySnapshot& before,
                             const QuerySnapshot& after);

// ---------------------------------------------------------------------------
// Projector representations.
//
// Dense for small system-register projectors, a basis mask for the marked
// subspaces of composite instances (diagonal in the computational basis), and
// rank-1 for reflections about a prepared state.
// ---------------------------------------------------------------------------

struct BitmaskProjector {
    std::uint64_t mask = 0;
    std::uint64_t value = 0;
    std::size_t dim = 0;
};

class ProjectorRep {
  public:
    static ProjectorRep bitmask(std::uint64_t mask, std::uint64_t value,
                                std::size_t dim);
    static ProjectorRep dense(DenseOperator pi);
    static ProjectorRep rank1(std::vector<cd> phi);

    std::size_t dim() const;
    void project(std::vector<cd>& v) const;  // v <- P v
    void reflect(std::vector<cd>& v) const;  // v <- (1 - 2P) v
    DenseOperator projector_dense() const;
    DenseOperator reflection_dense() const;

  private:
    std::variant<BitmaskProjector, DenseOperator, std::vector<cd>> rep_;
};

class ReflectionOracle {
  public:
    ReflectionOracle() = default;
    ReflectionOracle(ProjectorRep rep, std::string name);

    std::size_t dim() const { return rep_.dim(); }
    const ProjectorRep& projector() const { return rep_; }
    CounterPtr counter() const { return counter_; }
    DenseOperator reflection_dense() const { return rep_.reflection_dense(); }
    DenseOperator projector_dense() const { return rep_.projector_dense(); }

  private:
    ProjectorRep rep_;
    CounterPtr counter_;
};

// ---------------------------------------------------------------------------
// State preparation oracles.
// ---------------------------------------------------------------------------

struct PrepImpl {
    virtual ~PrepImpl() = default;
    virtual std::size_t dim() const = 0;
    virtual void apply(std::vector<cd>& v) const = 0;
    virtual void apply_inverse(std::vector<cd>& v) const = 0;
};

class StatePrepOracle {
  public:
    StatePrepOracle() = default;
    // Dense oracle; the unitary's first column is the designated state.
    StatePrepOracle(DenseOperator u, std::string name);
    // Dense oracle with additional per-application charges besides its own
    // counter (used by cost models layered on top of an exact preparation).
    StatePrepOracle(DenseOperator u, std::string name, ChargeSet extra_fanout);
    // Composite oracle with explicit per-application charge fan-out.
    StatePrepOracle(std::shared_ptr<const PrepImpl> impl, std::string name,
                    ChargeSet fanout);

    // Completes |psi><0...| to a unitary (Householder column completion).
    static StatePrepOracle for_state(const StateVector& psi, std::string name);

    std::size_t dim() const;
    void apply(std::vector<cd>& v) const;
    void apply_inverse(std::vector<cd>& v) const;
    StateVector prepared_state() const;
    DenseOperator to_dense() const;

    CounterPtr counter() const { return counter_; }
    // Own counter plus inner-oracle fan-out, per logical application.
    const ChargeSet& charges() const { return charges_; }

  private:
    std::shared_ptr<const PrepImpl> impl_;
    CounterPtr counter_;
    ChargeSet charges_;
};

// Reflection about the state the oracle prepares: 1 - 2 U|0><0|U^dagger.
ReflectionOracle reflection_from_prep(const StatePrepOracle& prep);

// Unitary sending |0...0> to the given normalized amplitude vector
// (Householder column completion, with a phase fix for complex leads).
DenseOperator prep_unitary(const std::vector<cd>& target);

// ---------------------------------------------------------------------------
// Walk operators.
//
// W = -(1 - 2|phi><phi|)(1 - 2 P) with |phi> the prepared state; the boosted
// variant replaces |phi> by W^mu |phi>.  Restricted to its invariant plane
// the walk is a rotation, with eigenvalues
//     exp(+-i * kWalkPhaseFactor * arcsin(sqrt(P)))
// where P is the marked probability of the axis state.  The factor is pinned
// down empirically by diagonalizing small instances (see the oracle tests)
// and is consumed by the estimation module when converting phases back to
// probabilities.
// ---------------------------------------------------------------------------

inline constexpr double kWalkPhaseFactor = 2.0;

class Walk {
  public:
    Walk(std::vector<cd> axis, ProjectorRep marked, ChargeSet charges, int mu);

    std::size_t dim() const { return axis_.size(); }
    int mu() const { return mu_; }
    const std::vector<cd>& axis() const { return axis_; }
    const ProjectorRep& marked() const { return marked_; }
    const ChargeSet& charges() const { return charges_; }

    void apply(std::vector<cd>& v) const;
    void apply_inverse(std::vector<cd>& v) const;
    DenseOperator to_dense() const;

  private:
    std::vector<cd> axis_;
    ProjectorRep marked_;
    ChargeSet charges_;
    int mu_;
};

// Per application: 2 prep queries, 1 reflection query.
Walk make_walk(const StatePrepOracle& prep, const ReflectionOracle& r_pi);
// Per application: 2*mu + 2 prep queries, mu + 1 reflection queries.
Walk make_boosted_walk(const StatePrepOracle& prep,
                       const ReflectionOracle& r_pi, int mu);

// ---------------------------------------------------------------------------
// Block encoding of A = sum_j alpha_j U_j with alpha_j > 0.
// ---------------------------------------------------------------------------

struct BlockEncodedOperator {
    DenseOperator prepare;  // ancilla register
    DenseOperator select;   // ancilla (x) system
    DenseOperator u_a;      // prepare^dagger . select . prepare
    double alpha = 0.0;     // sum of the alpha_j
    std::size_t ancilla_dim = 0;
    std::size_t system_dim = 0;
    CounterPtr prepare_counter;
    CounterPtr select_counter;
};

BlockEncodedOperator block_encode(std::span<const double> alphas,
                                  std::span<const DenseOperator> unitaries);
// Top-left system block (<0| (x) 1) U_A (|0> (x) 1); equals A/alpha.
DenseOperator encoded_block(const BlockEncodedOperator& enc);

// ---------------------------------------------------------------------------
// Square-root encoding of a nonnegative projector combination
// A_j = sum_k beta_k P_k.  Registers, most significant first:
// |k> (k_width qubits), |y> (one qubit), system, mirror (mirror_width
// qubits); composite index = ((k*2 + y)*S + s)*M + m.  betas[i] belongs to
// k = i + 1; k = 0 is reserved so the mirror swap (0 <-> k) is well defined.
// ---------------------------------------------------------------------------

struct AncillaLayout {
    unsigned k_width = 0;
    unsigned mirror_width = 0;
    unsigned system_qubits = 0;

    std::size_t k_dim() const { return std::size_t{1} << k_width; }
    std::size_t mirror_dim() const { return std::size_t{1} << mirror_width; }
    std::size_t system_dim() const { return std::size_t{1} << system_qubits; }
    unsigned total_qubits() const {
        return k_width + 1 + system_qubits + mirror_width;
    }
    std::size_t total_dim() const {
        return std::size_t{1} << total_qubits();
    }
};

struct PreparePi {
    DenseOperator u;  // on the (k, y) register, dim = 2^(k_width + 1)
    std::vector<double> betas;
    double sqrt_beta_sum = 0.0;  // sum_k sqrt(beta_k)
    unsigned k_width = 0;
    CounterPtr counter;
};

// First column carries amplitudes beta_k^{1/4} / (sqrt(2) sqrt(sum sqrt(beta)))
// on |k>|y>, all k in 1..K, y in {0, 1}.
PreparePi build_prepare_pi(std::span<const double> betas);

struct SelectPi {
    AncillaLayout layout;
    std::vector<DenseOperator> reflections;  // index i is R_{k=i+1}
    CounterPtr counter;

    // Involution: |k> Z|y> (R_k^y (x) swap_{0,k}) |psi>|m>; identity blocks on
    // k = 0 and unused k slots (apart from the Z phase on y).
    void apply(std::vector<cd>& v) const;
    DenseOperator to_dense() const;
};

// mirror_width 0 means "as wide as the k register".
SelectPi build_select_pi(std::span<const ReflectionOracle> reflections,
                         unsigned mirror_width = 0);

struct SqrtEncoding {
    PreparePi prepare;
    SelectPi select;
    AncillaLayout layout;
    double normalization = 0.0;  // (sum_k sqrt(beta_k))^2

    // U_pi = (PREPARE^dagger (x) 1) SELECT (PREPARE (x) 1); an involution.
    void apply_u_pi(std::vector<cd>& v) const;
    DenseOperator u_pi_dense() const;
};

SqrtEncoding build_u_pi(PreparePi prepare, SelectPi select);

// Amplitude-estimation instance for one encoded group: combined preparation
// U_pi (1 (x) O_psi (x) 1) |0...0> and the reflection marking the
// (k, y) = (0, 0) subspace.  The Born probability of the marked subspace is
// <psi| A_j |psi> / normalization.
struct SuccessProbabilityInstance {
    StatePrepOracle combined_prep;
    ReflectionOracle marked;
    AncillaLayout layout;
    double normalization = 0.0;
};

SuccessProbabilityInstance success_probability_instance(
    const SqrtEncoding& enc, const StatePrepOracle& system_prep);

// ---------------------------------------------------------------------------
// Signed convex combinations of projectors plus a classical offset:
// A = sum_j sign_j sum_k beta_jk P_jk + offset * 1.
// ---------------------------------------------------------------------------

struct ProjectorGroup {
    int sign = +1;
    std::vector<double> betas;
    std::vector<ReflectionOracle> reflections;
};

struct ProjectorSum {
    std::vector<ProjectorGroup> groups;
    double offset = 0.0;

    std::size_t system_dim() const;
    DenseOperator to_matrix() const;
};

}  // namespace aae

#endif
