#ifndef AAE_ESTIMATION_HPP
#define AAE_ESTIMATION_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "aae/oracles.hpp"
#include "aae/rng.hpp"

namespace aae {

// ---------------------------------------------------------------------------
// Amplitude estimation on walk operators.
//
// The qpe backend runs textbook phase estimation on the walk: t phase bits,
// M = 2^t grid points, M - 1 walk applications per run, and a median over r
// independent runs.  The final state is simulated once and the r measurement
// outcomes are drawn from its phase-register marginal, which is statistically
// identical to r separate runs; the query counters are charged for all r
// runs.  The exact_subspace backend instead restricts the walk to the
// invariant plane spanned by the input state and its image, reads the
// rotation angle off the trace, and charges nothing; it is the noiseless
// reference used when phase-grid noise is not under study.
// ---------------------------------------------------------------------------

enum class AeBackend { qpe, exact_subspace };

struct AeConfig {
    AeBackend backend = AeBackend::qpe;
    // t = ceil(log2(1/ae_epsilon)) + extra_phase_bits
    int extra_phase_bits = 3;
    // r = ceil(repetition_scale * ln(1/failure_probability)), minimum 1
    double repetition_scale = 8.0;
    int max_phase_bits = 24;
};

struct AmplitudeEstimateResult {
    double p_hat = 0.0;  // marked probability of the walk axis
    int phase_bits = 0;
    int repetitions = 0;
    std::vector<double> run_estimates;  // per-run values (qpe backend only)
};

// Estimates the marked-subspace probability of the walk's reflection axis.
// input_prep supplies the initial state; it must lie in the walk's invariant
// plane (any state prepared from the same oracle the walk was built on does).
AmplitudeEstimateResult amplitude_estimate(const Walk& walk,
                                           const StatePrepOracle& input_prep,
                                           double ae_epsilon,
                                           double failure_probability,
                                           const AeConfig& cfg, Rng& rng);

// ---------------------------------------------------------------------------
// Boost bookkeeping.
// ---------------------------------------------------------------------------

// Probability ceiling sin^2(pi / (2 (2 mu + 1))) attained by a mu-fold
// boosted walk when the underlying probability reaches it.
double canonical_p0(int mu);

// Largest mu with canonical_p0(mu) >= p, clamped to cap; returns 0 when even
// mu = 1 does not qualify (p > 1/4).
int largest_mu_with_p0_at_least(double p, int cap = 1000000);

// Maps a boosted-probability estimate back through
// p = sin^2( arcsin(sqrt(p1)) / (2 mu + 1) ); the result always lies in
// [0, canonical_p0(mu)].
double invert_boost(double p1_hat, int mu);

// Query-cost model sqrt(p0) * ln(1/failure) * (p0/delta_abs) / epsilon used
// by the scaling experiments (unit constant).
double predicted_queries(double p0, double delta_abs, double epsilon,
                         double failure_probability);

// ---------------------------------------------------------------------------
// Boosted estimation of one projector expectation.
// ---------------------------------------------------------------------------

struct AaeParams {
    int mu = 1;
    double epsilon = 1e-3;
    double failure_probability = 0.05;
    // Assumed lower bound on p0 - p; 0 selects the default p0 / 2.
    double assumed_delta_abs = 0.0;
};

struct EstimateReport {
    double estimate = 0.0;  // estimate of the marked probability
    double p_hat = 0.0;     // raw boosted estimate before inversion
    double p0 = 0.0;
    int mu = 0;
    double epsilon = 0.0;
    double failure_probability = 0.0;
    double ae_epsilon = 0.0;
    int phase_bits = 0;
    int repetitions = 0;
    QuerySnapshot queries;
    long long total_queries = 0;
};

// Estimates <psi|P|psi> under the prior p <= canonical_p0(mu).  Throws
// PriorViolationError when the inverted estimate lands within epsilon of the
// ceiling, which is where prior violations alias to.
EstimateReport aae_estimate(const StatePrepOracle& prep,
                            const ReflectionOracle& r_pi,
                            const AaeParams& params, const AeConfig& cfg,
                            Rng& rng);

// ---------------------------------------------------------------------------
// Classical sampling baseline: n = ceil(p_ceiling (1 - p_ceiling) / eps^2)
// Bernoulli samples of the marked outcome, one preparation query each.
// ---------------------------------------------------------------------------

struct ClassicalBaselineResult {
    double estimate = 0.0;
    long long samples = 0;
    QuerySnapshot queries;
    long long total_queries = 0;
};

ClassicalBaselineResult classical_baseline(const StatePrepOracle& prep,
                                           const ProjectorRep& marked,
                                           double epsilon, double p_ceiling,
                                           Rng& rng);

// ---------------------------------------------------------------------------
// Signed projector-sum estimation.
//
// Each nonempty group j is estimated through its square-root encoding at
// normalized tolerance epsilon / nu, nu = sum_j (sum_k sqrt(beta_jk))^2, and
// per-group failure probability failure / J.  The total then carries error
// at most epsilon with failure probability at most failure.
// ---------------------------------------------------------------------------

struct GroupPrior {
    int mu = 1;
    double assumed_delta_abs = 0.0;  // 0 -> default p0 / 2
};

using GroupPriors = std::vector<GroupPrior>;

struct GroupEstimate {
    std::size_t group = 0;
    int sign = +1;
    double normalization = 0.0;  // (sum_k sqrt(beta_jk))^2 of the encoded part
    double classical_part = 0.0;
    bool quantum = false;
    EstimateReport report;         // normalized-probability estimate
    double scaled_estimate = 0.0;  // sign * (normalization * p + classical)
};

struct ProjectorSumEstimate {
    double value = 0.0;
    double epsilon = 0.0;
    double failure_probability = 0.0;
    double beta_norm_1_half = 0.0;  // sum_j (sum_k sqrt(beta_jk))^2
    std::vector<GroupEstimate> groups;
    QuerySnapshot queries;  // merged by counter name over all groups
    long long total_queries = 0;
};

ProjectorSumEstimate estimate_projector_sum(const ProjectorSum& sum,
                                            const StatePrepOracle& system_prep,
                                            const GroupPriors& priors,
                                            double epsilon,
                                            double failure_probability,
                                            const AeConfig& cfg, Rng& rng);

// ---------------------------------------------------------------------------
// Classically assisted variant.  Terms listed in the prior set are folded in
// at their supplied values; the remaining terms of each such group are
// estimated quantumly at half the group budget.  Supplied values must carry
// error at most classical_prior_tolerance(...) for the group totals to stay
// within budget.  Groups without classical coverage run exactly as in
// estimate_projector_sum.
// ---------------------------------------------------------------------------

struct ClassicalTermPrior {
    std::size_t group = 0;
    std::size_t term = 0;
    double value = 0.0;
};

// ---------------------------------------------------------------------------
// Automatic prior construction.  Exact term expectations are read off the
// simulator; groups whose normalized probability is too close to the valid
// regime's edge get their heaviest terms covered classically (at the exact
// values) until the encoded remainder sits below residual_ceiling.  The
// boost order is then the tightest one whose ceiling clears the remainder by
// twice the per-group tolerance, so the violation flag cannot fire on a
// sound instance, and the assumed offset floor is set to that actual margin.
// ---------------------------------------------------------------------------

struct AutoPriorResult {
    GroupPriors priors;
    std::vector<ClassicalTermPrior> classical;
    std::vector<double> residual_probabilities;  // per group, encoded part
};

AutoPriorResult auto_priors(const ProjectorSum& sum,
                            const StatePrepOracle& system_prep, double epsilon,
                            int mu_cap = 12, double residual_ceiling = 0.2);

double classical_prior_tolerance(const ProjectorSum& sum, std::size_t group,
                                 std::span<const std::size_t> covered_terms,
                                 double epsilon);

ProjectorSumEstimate estimate_with_classical_priors(
    const ProjectorSum& sum, const StatePrepOracle& system_prep,
    std::span<const ClassicalTermPrior> classical, const GroupPriors& priors,
    double epsilon, double failure_probability, const AeConfig& cfg, Rng& rng);

}  // namespace aae

#endif
