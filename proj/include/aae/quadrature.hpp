#ifndef AAE_QUADRATURE_HPP
#define AAE_QUADRATURE_HPP

#include <vector>

#include "aae/estimation.hpp"
#include "aae/fermion.hpp"
#include "aae/oracles.hpp"
#include "aae/rng.hpp"

namespace aae {

// ---------------------------------------------------------------------------
// Closed Newton-Cotes rules on [-1, 1].  Weights are computed in exact
// rational arithmetic and only converted to double at the end, so they are
// correctly rounded for every order below the cap.  High orders carry large
// oscillating weights; abs_weight_sum is what error propagation has to pay.
// ---------------------------------------------------------------------------

struct QuadratureRule {
    int order = 0;  // polynomial degree n; n + 1 nodes
    std::vector<double> nodes;
    std::vector<double> weights;
    double abs_weight_sum = 0.0;
};

QuadratureRule newton_cotes_rule(int order);

// Kahan-compensated sum of weights[k] * values[k].
double integrate(const QuadratureRule& rule,
                 const std::vector<double>& values);

// Interpolation truncation bound (5/3) * gamma * (3/4)^(order + 1) for an
// integrand analytic in the standard contour neighborhood with derivative
// bound gamma.
double truncation_bound(int order, double gamma);

struct QuadratureParameters {
    int order = 1;
    double node_epsilon = 0.0;  // per-node tolerance
    double truncation = 0.0;
    double abs_weight_sum = 0.0;
};

// Smallest odd order whose truncation gets under epsilon/2, with a per-node
// tolerance small enough that both the signed and the absolute weight sums
// keep the propagated error under epsilon/2.
QuadratureParameters select_parameters(double epsilon, double gamma);

// ---------------------------------------------------------------------------
// Analyticity budget: max |dE0/dz| over the contour
// z(phi) = 1 + 3 exp(i phi) + exp(-i phi)/3, estimated by eigenvalue
// continuation from phi = 0 and central differences, inflated by a safety
// factor.
// ---------------------------------------------------------------------------

struct AnalyticityBudget {
    double gamma = 0.0;    // raw_max * safety
    double raw_max = 0.0;
    int samples = 0;
};

AnalyticityBudget estimate_gamma(const HamiltonianPath& path,
                                 int samples = 256, double safety = 1.2,
                                 double step = 1e-5);

// ---------------------------------------------------------------------------
// Gradient operator dH/dx at x as a signed projector sum (requires the path
// terms to be hermitian involutions or identity).
// ---------------------------------------------------------------------------

ProjectorSum gradient_operator(const HamiltonianPath& path, double x);

// ---------------------------------------------------------------------------
// Energy difference E(1) - E(-1) by quadrature over the gradient
// expectation.  The x = -1 node is evaluated from exact projector
// expectations at zero query cost (endpoint data is assumed classically
// known); every later node estimates its gradient through the projector-sum
// protocol, with probability ceilings propagated from the previous node via
// the drift bounds.
// ---------------------------------------------------------------------------

struct EnergyDifferenceOptions {
    double epsilon = 1e-2;
    double failure_probability = 0.05;
    int gamma_samples = 256;
    double gamma_safety = 1.2;
    double gamma_override = 0.0;  // > 0 skips contour estimation
    int gap_samples = 64;
    // Used when a propagated ceiling leaves the valid regime (or a group
    // appears that the previous node did not have).
    GroupPriors fallback_priors;
};

struct NodeRecord {
    double x = 0.0;
    double weight = 0.0;
    bool classical = false;
    double gradient_estimate = 0.0;
    double exact_gradient = 0.0;  // simulator reference
    std::vector<int> mus;         // boost per group (quantum nodes)
    GroundStateCostModel cost;
    ProjectorSumEstimate estimate;  // empty for the classical node
};

struct EnergyDifferenceResult {
    double value = 0.0;
    double exact = 0.0;  // eigensolver reference
    double epsilon = 0.0;
    double gamma = 0.0;
    int order = 0;
    double node_epsilon = 0.0;
    std::vector<NodeRecord> nodes;
    QuerySnapshot queries;
    long long total_queries = 0;
};

EnergyDifferenceResult energy_difference(const HamiltonianPath& path,
                                         const EnergyDifferenceOptions& opts,
                                         const AeConfig& cfg, Rng& rng);

}  // namespace aae

#endif
