#include "aae/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

#include "aae/errors.hpp"
#include "aae/kernels.hpp"
#include "aae/spectral.hpp"

namespace aae {

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

constexpr int kMaxOrder = 33;

cpp_int factorial(int n) {
    cpp_int f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

QuadratureRule newton_cotes_rule(int order) {
    if (order < 1 || order % 2 == 0) {
        throw ArgumentError("quadrature order must be odd and positive");
    }
    if (order > kMaxOrder) {
        throw ResourceError("quadrature order " + std::to_string(order) +
                            " is over the cap " + std::to_string(kMaxOrder));
    }
    const int n = order;
    QuadratureRule rule;
    rule.order = n;
    rule.nodes.resize(n + 1);
    rule.weights.resize(n + 1);
    cpp_rational exact_sum = 0;
    for (int k = 0; k <= n; ++k) {
        rule.nodes[k] = -1.0 + 2.0 * k / n;
        // prod_{i != k} (t - i) as integer coefficients in t
        std::vector<cpp_int> poly{1};
        for (int i = 0; i <= n; ++i) {
            if (i == k) continue;
            std::vector<cpp_int> next(poly.size() + 1);
            for (std::size_t j = 0; j < poly.size(); ++j) {
                next[j + 1] += poly[j];
                next[j] -= cpp_int(i) * poly[j];
            }
            poly = std::move(next);
        }
        cpp_rational integral = 0;
        cpp_int npow = n;
        for (std::size_t j = 0; j < poly.size(); ++j) {
            integral += cpp_rational(poly[j] * npow, j + 1);
            npow *= n;
        }
        cpp_int denom = factorial(k) * factorial(n - k);
        if ((n - k) & 1) denom = -denom;
        const cpp_rational w =
            cpp_rational(2) * integral / (cpp_rational(n) * denom);
        exact_sum += w;
        rule.weights[k] = w.convert_to<double>();
        rule.abs_weight_sum += std::abs(rule.weights[k]);
    }
    if (exact_sum != 2) {
        throw ContractError("newton-cotes weights do not sum to 2");
    }
    return rule;
}

double integrate(const QuadratureRule& rule,
                 const std::vector<double>& values) {
    if (values.size() != rule.weights.size()) {
        throw ShapeError("integrate: expected " +
                         std::to_string(rule.weights.size()) +
                         " node values, got " + std::to_string(values.size()));
    }
    double sum = 0.0;
    double c = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double term = rule.weights[k] * values[k];
        const double y = term - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum;
}

double truncation_bound(int order, double gamma) {
    if (order < 0) throw RangeError("quadrature order must be >= 0");
    if (!(gamma >= 0.0)) throw ArgumentError("gamma must be >= 0");
    return (5.0 / 3.0) * gamma * std::pow(0.75, order + 1);
}

QuadratureParameters select_parameters(double epsilon, double gamma) {
    if (!(epsilon > 0.0)) throw ArgumentError("tolerance must be positive");
    if (!(gamma >= 0.0)) throw ArgumentError("gamma must be >= 0");
    const double ln43 = std::log(4.0 / 3.0);
    // gamma == 0 (a constant integrand) gives big_l = -inf and lands in the
    // order-1 branch with zero truncation.
    const double big_l = std::log(10.0 * gamma / (3.0 * epsilon));

    QuadratureParameters out;
    if (big_l <= 0.0) {
        out.order = 1;
        out.node_epsilon = epsilon / 8.0;
    } else {
        int n = static_cast<int>(std::ceil(big_l / ln43 - 1.0 - 1e-12));
        if (n < 1) n = 1;
        if (n % 2 == 0) ++n;
        out.order = n;
        out.node_epsilon = ln43 * epsilon / (4.0 * big_l);
    }
    if (out.order > kMaxOrder) {
        throw ResourceError(
            "tolerance/analyticity combination needs quadrature order " +
            std::to_string(out.order) + ", over the cap " +
            std::to_string(kMaxOrder));
    }
    const QuadratureRule rule = newton_cotes_rule(out.order);
    out.abs_weight_sum = rule.abs_weight_sum;
    // Both the absolute-weight propagation and the 2(n+1) budget of the
    // selection rule must stay under epsilon/2; high orders have absolute
    // weight sums far above 2, which is what actually binds there.
    const double cap = (epsilon / 2.0) /
                       std::max(rule.abs_weight_sum, 2.0 * (out.order + 1));
    out.node_epsilon = std::min(out.node_epsilon, cap);
    out.truncation = truncation_bound(out.order, gamma);
    return out;
}

// ---------------------------------------------------------------------------
// Analyticity budget.
// ---------------------------------------------------------------------------

namespace {

cd contour_point(double phi) {
    const cd up = std::polar(1.0, phi);
    const cd down = std::polar(1.0, -phi);
    return 1.0 + 3.0 * up + down / 3.0;
}

cd nearest_eigenvalue(const std::vector<cd>& evs, cd ref) {
    cd best = evs.front();
    double best_dist = std::abs(best - ref);
    for (const cd& e : evs) {
        const double dist = std::abs(e - ref);
        if (dist < best_dist) {
            best_dist = dist;
            best = e;
        }
    }
    return best;
}

}  // namespace

AnalyticityBudget estimate_gamma(const HamiltonianPath& path, int samples,
                                 double safety, double step) {
    if (samples < 8) throw ArgumentError("gamma estimation: too few samples");
    if (!(safety >= 1.0)) throw ArgumentError("safety factor must be >= 1");
    if (!(step > 0.0)) throw ArgumentError("difference step must be positive");

    auto eigenvalues_at = [&](cd z) {
        return complex_eigenvalues(path.matrix_at(z));
    };
    // Seed at phi = 0: the contour point is real, the matrix hermitian, and
    // the ground branch is the smallest real eigenvalue.
    std::vector<cd> evs = eigenvalues_at(contour_point(0.0));
    cd branch = evs.front();
    for (const cd& e : evs) {
        if (e.real() < branch.real()) branch = e;
    }

    AnalyticityBudget out;
    out.samples = samples;
    for (int i = 0; i < samples; ++i) {
        const double phi = 2.0 * std::numbers::pi * i / samples;
        const cd z = contour_point(phi);
        branch = nearest_eigenvalue(eigenvalues_at(z), branch);
        const cd ep = nearest_eigenvalue(eigenvalues_at(z + step), branch);
        const cd em = nearest_eigenvalue(eigenvalues_at(z - step), branch);
        const double deriv = std::abs(ep - em) / (2.0 * step);
        out.raw_max = std::max(out.raw_max, deriv);
    }
    out.gamma = out.raw_max * safety;
    return out;
}

ProjectorSum gradient_operator(const HamiltonianPath& path, double x) {
    if (path.coeffs.size() != path.terms.size() || path.terms.empty()) {
        throw ShapeError("path: coefficient/term count mismatch");
    }
    if (x < -1.0 || x > 1.0) {
        throw RangeError("gradient: x outside [-1, 1]");
    }
    std::vector<double> weights(path.terms.size());
    for (std::size_t j = 0; j < path.coeffs.size(); ++j) {
        const cd d = path.coeffs[j].df(cd(x));
        if (std::abs(d.imag()) > 1e-10) {
            throw ContractError(
                "gradient: coefficient derivative is complex at x = " +
                std::to_string(x));
        }
        weights[j] = d.real();
    }
    return signed_projector_split(weights, path.terms, 0.0);
}

// ---------------------------------------------------------------------------
// Energy difference.
// ---------------------------------------------------------------------------

namespace {

struct PrevGroupState {
    bool present = false;
    double p = 0.0;    // latest normalized-probability estimate
    double eps = 0.0;  // its tolerance
};

double group_beta_sum(const ProjectorGroup& g) {
    double s = 0.0;
    for (const double b : g.betas) s += b;
    return s;
}

double group_sqrt_norm(const ProjectorGroup& g) {
    double s = 0.0;
    for (const double b : g.betas) s += std::sqrt(b);
    return s * s;
}

}  // namespace

EnergyDifferenceResult energy_difference(const HamiltonianPath& path,
                                         const EnergyDifferenceOptions& opts,
                                         const AeConfig& cfg, Rng& rng) {
    if (!(opts.epsilon > 0.0)) throw ArgumentError("tolerance must be positive");
    if (!(opts.failure_probability > 0.0) ||
        !(opts.failure_probability < 1.0)) {
        throw ArgumentError("failure probability must lie in (0, 1)");
    }
    if (opts.gap_samples < 2) throw ArgumentError("too few gap samples");

    // Gap and motion budget over the stretch.
    double gap_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < opts.gap_samples; ++i) {
        const double x = -1.0 + 2.0 * i / (opts.gap_samples - 1);
        const SpectralData sd = exact_eigensolve(path.at(x));
        if (sd.gap < 1e-6) {
            throw GapError("spectral gap collapses near x = " +
                           std::to_string(x) + " (gap " +
                           std::to_string(sd.gap) + ")");
        }
        gap_min = std::min(gap_min, sd.gap);
    }
    const double hdot_max = path.max_derivative_norm(opts.gap_samples);
    const double drift_rate = projector_drift_bound(hdot_max, gap_min);

    const double gamma =
        opts.gamma_override > 0.0
            ? opts.gamma_override
            : estimate_gamma(path, opts.gamma_samples, opts.gamma_safety)
                  .gamma;
    const QuadratureParameters qp = select_parameters(opts.epsilon, gamma);
    const QuadratureRule rule = newton_cotes_rule(qp.order);
    const int n = qp.order;
    const double dx = 2.0 / n;

    EnergyDifferenceResult out;
    out.epsilon = opts.epsilon;
    out.gamma = gamma;
    out.order = n;
    out.node_epsilon = qp.node_epsilon;
    out.exact = exact_eigensolve(path.at(1.0)).ground_energy -
                exact_eigensolve(path.at(-1.0)).ground_energy;

    std::vector<PrevGroupState> prev;
    std::vector<double> values(n + 1, 0.0);

    for (int k = 0; k <= n; ++k) {
        const double x = rule.nodes[k];
        const ProjectorSum dsum = gradient_operator(path, x);
        const GroundStatePrep gsp = ground_state_prep(path.at(x));

        NodeRecord node;
        node.x = x;
        node.weight = rule.weights[k];
        node.cost = gsp.cost;
        {
            const DenseOperator hdot = path.derivative_at(x);
            const std::vector<cd> hv = apply(hdot, gsp.ground_state);
            node.exact_gradient =
                kernels::vdot(gsp.ground_state.data(), hv.data(), hv.size())
                    .real();
        }

        if (prev.empty()) prev.resize(dsum.groups.size());
        if (prev.size() != dsum.groups.size()) {
            throw ContractError("gradient group structure changed between "
                                "nodes; cannot propagate priors");
        }

        if (k == 0) {
            // Endpoint data is classical: exact projector expectations seed
            // the propagation chain and cost nothing.
            node.classical = true;
            double f = dsum.offset;
            for (std::size_t j = 0; j < dsum.groups.size(); ++j) {
                const ProjectorGroup& g = dsum.groups[j];
                const double norm = group_sqrt_norm(g);
                if (!(norm > 0.0)) {
                    prev[j] = PrevGroupState{};
                    continue;
                }
                double acc = 0.0;
                for (std::size_t t = 0; t < g.betas.size(); ++t) {
                    std::vector<cd> v = gsp.ground_state;
                    g.reflections[t].projector().project(v);
                    acc += g.betas[t] * kernels::norm2(v.data(), v.size());
                }
                f += g.sign * acc;
                prev[j] = PrevGroupState{true, acc / norm, 0.0};
            }
            node.gradient_estimate = f;
        } else {
            double nu = 0.0;
            for (const auto& g : dsum.groups) nu += group_sqrt_norm(g);
            if (!(nu > 0.0)) {
                // The gradient reduced to a multiple of the identity (or to
                // nothing); its expectation is the offset, no queries needed.
                node.classical = true;
                node.gradient_estimate = dsum.offset;
                for (auto& pg : prev) pg = PrevGroupState{};
                values[k] = node.gradient_estimate;
                out.nodes.push_back(std::move(node));
                continue;
            }
            const double node_failure = opts.failure_probability / (n + 1);
            const double eps_norm = qp.node_epsilon / nu;

            GroupPriors priors(dsum.groups.size());
            node.mus.assign(dsum.groups.size(), 0);
            for (std::size_t j = 0; j < dsum.groups.size(); ++j) {
                const ProjectorGroup& g = dsum.groups[j];
                const double norm = group_sqrt_norm(g);
                if (!(norm > 0.0)) continue;
                double p_bar = 0.0;
                bool have_bar = false;
                if (prev[j].present) {
                    const double drift =
                        drift_rate * dx * group_beta_sum(g) / norm;
                    p_bar = prev[j].p + prev[j].eps + drift;
                    have_bar = true;
                }
                const double floor = p_bar + 2.0 * eps_norm + 1e-12;
                if (have_bar && floor < 0.25) {
                    const int mu = largest_mu_with_p0_at_least(floor);
                    priors[j].mu = mu;
                    priors[j].assumed_delta_abs = canonical_p0(mu) - p_bar;
                } else if (j < opts.fallback_priors.size() &&
                           opts.fallback_priors[j].mu >= 1) {
                    priors[j] = opts.fallback_priors[j];
                } else {
                    throw ArgumentError(
                        "no usable probability ceiling for group " +
                        std::to_string(j) + " at x = " + std::to_string(x) +
                        "; supply fallback priors");
                }
                node.mus[j] = priors[j].mu;
            }

            ProjectorSumEstimate est = estimate_projector_sum(
                dsum, gsp.oracle, priors, qp.node_epsilon, node_failure, cfg,
                rng);
            node.gradient_estimate = est.value;
            for (const auto& ge : est.groups) {
                if (ge.quantum) {
                    prev[ge.group] =
                        PrevGroupState{true, ge.report.estimate,
                                       ge.report.epsilon};
                } else {
                    prev[ge.group] = PrevGroupState{};
                }
            }
            for (const auto& [name, q] : est.queries) out.queries[name] += q;
            node.estimate = std::move(est);
        }
        values[k] = node.gradient_estimate;
        out.nodes.push_back(std::move(node));
    }

    out.value = integrate(rule, values);
    for (const auto& [name, q] : out.queries) out.total_queries += q;
    return out;
}

}  // namespace aae
