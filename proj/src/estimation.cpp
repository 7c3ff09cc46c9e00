#include "aae/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "aae/errors.hpp"
#include "aae/kernels.hpp"

namespace aae {

namespace {

constexpr double kPi = std::numbers::pi;

void require_probability(double x, const char* what) {
    if (!(x > 0.0) || !(x < 1.0)) {
        throw ArgumentError(std::string(what) + " must lie in (0, 1), got " +
                            std::to_string(x));
    }
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

long long sum_counts(const QuerySnapshot& q) {
    long long total = 0;
    for (const auto& [name, n] : q) total += n;
    return total;
}

std::vector<CounterPtr> merged_counters(const ChargeSet& a,
                                        const ChargeSet& b) {
    std::vector<CounterPtr> out = a.counters();
    for (const auto& c : b.counters()) {
        if (std::find(out.begin(), out.end(), c) == out.end()) {
            out.push_back(c);
        }
    }
    return out;
}

// Inverse discrete Fourier transform over the block index:
// out[m] = (1/sqrt(M)) sum_a exp(-2 pi i m a / M) in[a], where every index
// addresses a contiguous block of block_size amplitudes.  Iterative radix-2
// with twiddles recomputed from polar form, so the error stays near the
// rounding floor for every grid size this project uses.
void inverse_fourier_blocks(std::vector<cd>& v, std::size_t m_count,
                            std::size_t block_size) {
    const std::size_t m = m_count;
    // Bit-reversal permutation of blocks.
    for (std::size_t i = 1, j = 0; i < m; ++i) {
        std::size_t bit = m >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap_ranges(v.begin() + i * block_size,
                             v.begin() + (i + 1) * block_size,
                             v.begin() + j * block_size);
        }
    }
    for (std::size_t len = 2; len <= m; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::size_t half = len / 2;
        for (std::size_t start = 0; start < m; start += len) {
            for (std::size_t j = 0; j < half; ++j) {
                const cd w = std::polar(1.0, ang * static_cast<double>(j));
                cd* lo = v.data() + (start + j) * block_size;
                cd* hi = v.data() + (start + j + half) * block_size;
                for (std::size_t s = 0; s < block_size; ++s) {
                    const cd u = lo[s];
                    const cd t = w * hi[s];
                    lo[s] = u + t;
                    hi[s] = u - t;
                }
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (cd& x : v) x *= scale;
}

AmplitudeEstimateResult subspace_estimate(const Walk& walk,
                                          const StateVector& input) {
    constexpr double kResidualTol = 1e-8;
    const std::size_t d = input.amps.size();
    const std::vector<cd>& e1 = input.amps;
    std::vector<cd> w1 = e1;
    walk.apply(w1);
    const cd m11 = kernels::vdot(e1.data(), w1.data(), d);
    std::vector<cd> resid(d);
    for (std::size_t i = 0; i < d; ++i) resid[i] = w1[i] - m11 * e1[i];
    const double rnorm = std::sqrt(kernels::norm2(resid.data(), d));

    AmplitudeEstimateResult out;
    if (rnorm <= kResidualTol) {
        // Input is an eigenvector of the walk; the rotation angle is its
        // eigenphase and p = (1 - cos) / 2 reads it off directly.
        out.p_hat = clamp01((1.0 - m11.real()) / 2.0);
        return out;
    }
    std::vector<cd> e2(d);
    for (std::size_t i = 0; i < d; ++i) e2[i] = resid[i] / rnorm;
    std::vector<cd> w2 = e2;
    walk.apply(w2);
    const cd m12 = kernels::vdot(e1.data(), w2.data(), d);
    const cd m22 = kernels::vdot(e2.data(), w2.data(), d);
    for (std::size_t i = 0; i < d; ++i) {
        resid[i] = w2[i] - m12 * e1[i] - m22 * e2[i];
    }
    const double leak = std::sqrt(kernels::norm2(resid.data(), d));
    if (leak > kResidualTol) {
        throw ContractError(
            "walk does not close on the plane spanned by the input state and "
            "its image (residual " + std::to_string(leak) + ")");
    }
    const double tr = (m11 + m22).real();
    out.p_hat = clamp01((2.0 - tr) / 4.0);
    return out;
}

AmplitudeEstimateResult qpe_estimate(const Walk& walk,
                                     const StatePrepOracle& input_prep,
                                     double ae_epsilon,
                                     double failure_probability,
                                     const AeConfig& cfg, Rng& rng) {
    if (!(ae_epsilon > 0.0) || ae_epsilon >= 1.0) {
        throw ArgumentError("amplitude estimation tolerance must lie in "
                            "(0, 1), got " + std::to_string(ae_epsilon));
    }
    require_probability(failure_probability, "failure probability");

    int t = static_cast<int>(std::ceil(std::log2(1.0 / ae_epsilon) - 1e-9)) +
            cfg.extra_phase_bits;
    if (t < 1) t = 1;
    if (t > cfg.max_phase_bits) {
        throw ResourceError("phase register needs " + std::to_string(t) +
                            " bits, cap is " +
                            std::to_string(cfg.max_phase_bits));
    }
    const std::size_t m_count = std::size_t{1} << t;
    const std::size_t d = walk.dim();
    if (m_count > (std::size_t{1} << 26) / d) {
        throw ResourceError("phase estimation state of " + std::to_string(t) +
                            " + " + std::to_string(input_prep.dim()) +
                            "-dim register exceeds the memory budget");
    }
    const int reps = std::max(
        1, static_cast<int>(std::ceil(
               cfg.repetition_scale * std::log(1.0 / failure_probability) -
               1e-9)));

    // Final state of one run: (F^dagger (x) 1) sum_a |a> W^a |phi> / sqrt(M).
    std::vector<cd> full(m_count * d);
    std::vector<cd> u = input_prep.prepared_state().amps;
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m_count));
    for (std::size_t s = 0; s < d; ++s) full[s] = u[s] * inv_sqrt_m;
    for (std::size_t a = 1; a < m_count; ++a) {
        walk.apply(u);
        cd* block = full.data() + a * d;
        for (std::size_t s = 0; s < d; ++s) block[s] = u[s] * inv_sqrt_m;
    }
    inverse_fourier_blocks(full, m_count, d);

    std::vector<double> cdf(m_count);
    double acc = 0.0;
    for (std::size_t a = 0; a < m_count; ++a) {
        acc += kernels::norm2(full.data() + a * d, d);
        cdf[a] = acc;
    }

    AmplitudeEstimateResult out;
    out.phase_bits = t;
    out.repetitions = reps;
    out.run_estimates.reserve(reps);
    for (int i = 0; i < reps; ++i) {
        const double x = uniform01(rng) * acc;
        const std::size_t a = static_cast<std::size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), x) - cdf.begin());
        const std::size_t a_clamped = std::min(a, m_count - 1);
        const double angle =
            kPi * static_cast<double>(a_clamped) / static_cast<double>(m_count);
        const double s = std::sin(angle);
        out.run_estimates.push_back(s * s);
    }
    std::vector<double> sorted = out.run_estimates;
    std::sort(sorted.begin(), sorted.end());
    if (reps % 2 == 1) {
        out.p_hat = sorted[reps / 2];
    } else {
        out.p_hat = 0.5 * (sorted[reps / 2 - 1] + sorted[reps / 2]);
    }

    input_prep.charges().charge(reps);
    walk.charges().charge(static_cast<long long>(m_count - 1) * reps);
    return out;
}

}  // namespace

AmplitudeEstimateResult amplitude_estimate(const Walk& walk,
                                           const StatePrepOracle& input_prep,
                                           double ae_epsilon,
                                           double failure_probability,
                                           const AeConfig& cfg, Rng& rng) {
    if (input_prep.dim() != walk.dim()) {
        throw ShapeError("amplitude estimation: input state and walk "
                         "dimension mismatch");
    }
    if (cfg.backend == AeBackend::exact_subspace) {
        return subspace_estimate(walk, input_prep.prepared_state());
    }
    return qpe_estimate(walk, input_prep, ae_epsilon, failure_probability,
                        cfg, rng);
}

double canonical_p0(int mu) {
    if (mu < 0) throw ArgumentError("boost order must be >= 0");
    const double s = std::sin(kPi / (2.0 * (2.0 * mu + 1.0)));
    return s * s;
}

int largest_mu_with_p0_at_least(double p, int cap) {
    if (!(p > 0.0)) throw ArgumentError("probability floor must be positive");
    if (cap < 1) throw ArgumentError("mu cap must be >= 1");
    if (p > canonical_p0(1)) return 0;
    // canonical_p0 is decreasing in mu; solve sin(pi/(2(2mu+1))) >= sqrt(p).
    const double root = std::asin(std::min(1.0, std::sqrt(p)));
    int mu = static_cast<int>(std::floor((kPi / (2.0 * root) - 1.0) / 2.0));
    if (mu < 1) mu = 1;
    if (mu > cap) return cap;
    while (mu > 1 && canonical_p0(mu) < p) --mu;
    while (mu < cap && canonical_p0(mu + 1) >= p) ++mu;
    return mu;
}

double invert_boost(double p1_hat, int mu) {
    if (mu < 0) throw ArgumentError("boost order must be >= 0");
    const double p1 = clamp01(p1_hat);
    const double theta = std::asin(std::sqrt(p1)) / (2.0 * mu + 1.0);
    const double s = std::sin(theta);
    return s * s;
}

double predicted_queries(double p0, double delta_abs, double epsilon,
                         double failure_probability) {
    require_probability(p0, "probability ceiling");
    require_probability(failure_probability, "failure probability");
    if (!(delta_abs > 0.0)) throw ArgumentError("offset must be positive");
    if (!(epsilon > 0.0)) throw ArgumentError("tolerance must be positive");
    return std::sqrt(p0) * std::log(1.0 / failure_probability) *
           (p0 / delta_abs) / epsilon;
}

EstimateReport aae_estimate(const StatePrepOracle& prep,
                            const ReflectionOracle& r_pi,
                            const AaeParams& params, const AeConfig& cfg,
                            Rng& rng) {
    if (params.mu < 1) {
        throw ArgumentError("boosted estimation needs mu >= 1, got " +
                            std::to_string(params.mu));
    }
    if (!(params.epsilon > 0.0) || params.epsilon >= 1.0) {
        throw ArgumentError("tolerance must lie in (0, 1)");
    }
    require_probability(params.failure_probability, "failure probability");

    const double p0 = canonical_p0(params.mu);
    double delta_abs = params.assumed_delta_abs;
    if (delta_abs == 0.0) delta_abs = p0 / 2.0;
    if (!(delta_abs > 0.0) || delta_abs > p0 * (1.0 + 1e-12)) {
        throw ArgumentError("assumed offset must lie in (0, p0]");
    }
    if (params.epsilon > p0 * p0 / delta_abs * (1.0 + 1e-12)) {
        throw ArgumentError(
            "tolerance " + std::to_string(params.epsilon) +
            " is outside the validity regime epsilon <= p0^2/|delta| = " +
            std::to_string(p0 * p0 / delta_abs));
    }
    const double ae_eps = params.epsilon * delta_abs / (p0 * p0);

    const Walk walk = make_boosted_walk(prep, r_pi, params.mu);
    const std::vector<CounterPtr> counters =
        merged_counters(walk.charges(), prep.charges());
    const QuerySnapshot before = snapshot_counters(counters);
    const AmplitudeEstimateResult ae = amplitude_estimate(
        walk, prep, ae_eps, params.failure_probability, cfg, rng);
    const QuerySnapshot after = snapshot_counters(counters);

    EstimateReport rep;
    rep.p_hat = ae.p_hat;
    rep.p0 = p0;
    rep.mu = params.mu;
    rep.epsilon = params.epsilon;
    rep.failure_probability = params.failure_probability;
    rep.ae_epsilon = ae_eps;
    rep.phase_bits = ae.phase_bits;
    rep.repetitions = ae.repetitions;
    rep.queries = snapshot_delta(before, after);
    rep.total_queries = sum_counts(rep.queries);
    rep.estimate = invert_boost(ae.p_hat, params.mu);
    if (rep.estimate > p0 - params.epsilon) {
        throw PriorViolationError(
            "estimate " + std::to_string(rep.estimate) +
            " is within epsilon of the promised ceiling p0 = " +
            std::to_string(p0) + "; the prior p <= p0 looks violated",
            rep.estimate, p0);
    }
    return rep;
}

ClassicalBaselineResult classical_baseline(const StatePrepOracle& prep,
                                           const ProjectorRep& marked,
                                           double epsilon, double p_ceiling,
                                           Rng& rng) {
    if (!(epsilon > 0.0)) throw ArgumentError("tolerance must be positive");
    require_probability(p_ceiling, "probability ceiling");
    if (marked.dim() != prep.dim()) {
        throw ShapeError("classical baseline: projector/prep dim mismatch");
    }
    const double variance = p_ceiling * (1.0 - p_ceiling);
    const long long n = std::max(
        1LL, static_cast<long long>(std::ceil(variance / (epsilon * epsilon) -
                                              1e-9)));
    std::vector<cd> v = prep.prepared_state().amps;
    marked.project(v);
    const double p_true = clamp01(kernels::norm2(v.data(), v.size()));

    long long hits = 0;
    for (long long i = 0; i < n; ++i) {
        if (uniform01(rng) < p_true) ++hits;
    }
    const QuerySnapshot before = snapshot_counters(prep.charges().counters());
    prep.charges().charge(n);
    const QuerySnapshot after = snapshot_counters(prep.charges().counters());

    ClassicalBaselineResult out;
    out.estimate = static_cast<double>(hits) / static_cast<double>(n);
    out.samples = n;
    out.queries = snapshot_delta(before, after);
    out.total_queries = sum_counts(out.queries);
    return out;
}

namespace {

double group_norm_1_half(const ProjectorGroup& g) {
    double s = 0.0;
    for (const double b : g.betas) {
        if (!(b >= 0.0)) {
            throw ArgumentError("projector sum: negative weight");
        }
        s += std::sqrt(b);
    }
    return s * s;
}

void validate_sum(const ProjectorSum& sum) {
    for (const auto& g : sum.groups) {
        if (g.sign != 1 && g.sign != -1) {
            throw ArgumentError("projector sum: sign must be +1 or -1");
        }
        if (g.betas.size() != g.reflections.size()) {
            throw ArgumentError("projector sum: weight/term count mismatch");
        }
    }
}

struct GroupTask {
    std::size_t index = 0;
    std::vector<double> betas;                 // encoded (quantum) part
    std::vector<ReflectionOracle> reflections; // matching terms
    double classical_part = 0.0;
    double full_norm = 0.0;    // (sum_k sqrt(beta_jk))^2 over all terms
    bool halve_budget = false; // true when classical priors cover part of it
};

// Shared tail of the two protocol entry points: estimates every task's
// encoded part at tolerance (budget fraction) * epsilon / nu and failure
// failure / J, then assembles the signed total.
ProjectorSumEstimate run_group_estimates(const ProjectorSum& sum,
                                         const StatePrepOracle& system_prep,
                                         const GroupPriors& priors,
                                         std::vector<GroupTask> tasks,
                                         double epsilon,
                                         double failure_probability,
                                         const AeConfig& cfg, Rng& rng) {
    if (priors.size() != sum.groups.size()) {
        throw ShapeError("one prior per group is required (" +
                         std::to_string(priors.size()) + " priors, " +
                         std::to_string(sum.groups.size()) + " groups)");
    }
    if (!(epsilon > 0.0)) throw ArgumentError("tolerance must be positive");
    require_probability(failure_probability, "failure probability");

    double nu = 0.0;
    for (const auto& g : sum.groups) nu += group_norm_1_half(g);
    if (!(nu > 0.0)) {
        throw ArgumentError("projector sum has no nonzero weights");
    }

    std::size_t quantum_count = 0;
    for (const auto& task : tasks) {
        double s = 0.0;
        for (const double b : task.betas) s += std::sqrt(b);
        if (s > 0.0) ++quantum_count;
    }

    ProjectorSumEstimate out;
    out.epsilon = epsilon;
    out.failure_probability = failure_probability;
    out.beta_norm_1_half = nu;

    for (auto& task : tasks) {
        const ProjectorGroup& g = sum.groups[task.index];
        GroupEstimate ge;
        ge.group = task.index;
        ge.sign = g.sign;
        ge.classical_part = task.classical_part;

        double enc_sqrt_sum = 0.0;
        for (const double b : task.betas) enc_sqrt_sum += std::sqrt(b);
        if (enc_sqrt_sum > 0.0) {
            // Drop zero-weight terms; the encoding wants strictly positive
            // weights and they contribute nothing.
            std::vector<double> betas;
            std::vector<ReflectionOracle> refls;
            for (std::size_t k = 0; k < task.betas.size(); ++k) {
                if (task.betas[k] > 0.0) {
                    betas.push_back(task.betas[k]);
                    refls.push_back(task.reflections[k]);
                }
            }
            PreparePi prep_pi = build_prepare_pi(betas);
            SelectPi sel_pi = build_select_pi(refls);
            SqrtEncoding enc = build_u_pi(std::move(prep_pi),
                                          std::move(sel_pi));
            SuccessProbabilityInstance inst =
                success_probability_instance(enc, system_prep);
            ge.quantum = true;
            ge.normalization = inst.normalization;

            // Absolute budget for this group, from its full weight norm; with
            // classical coverage the encoded remainder gets half of it.
            const double eps_group = task.full_norm * epsilon / nu;
            AaeParams params;
            params.mu = priors[task.index].mu;
            params.assumed_delta_abs = priors[task.index].assumed_delta_abs;
            params.epsilon =
                (task.halve_budget ? 0.5 : 1.0) * eps_group / ge.normalization;
            params.failure_probability =
                failure_probability / static_cast<double>(quantum_count);
            ge.report = aae_estimate(inst.combined_prep, inst.marked, params,
                                     cfg, rng);
            ge.scaled_estimate =
                g.sign * (ge.normalization * ge.report.estimate +
                          task.classical_part);
        } else {
            ge.quantum = false;
            ge.normalization = 0.0;
            ge.scaled_estimate = g.sign * task.classical_part;
        }
        out.groups.push_back(std::move(ge));
    }

    out.value = sum.offset;
    for (const auto& ge : out.groups) out.value += ge.scaled_estimate;
    for (const auto& ge : out.groups) {
        for (const auto& [name, n] : ge.report.queries) {
            out.queries[name] += n;
        }
    }
    out.total_queries = sum_counts(out.queries);
    return out;
}

}  // namespace

ProjectorSumEstimate estimate_projector_sum(const ProjectorSum& sum,
                                            const StatePrepOracle& system_prep,
                                            const GroupPriors& priors,
                                            double epsilon,
                                            double failure_probability,
                                            const AeConfig& cfg, Rng& rng) {
    validate_sum(sum);
    std::vector<GroupTask> tasks;
    for (std::size_t j = 0; j < sum.groups.size(); ++j) {
        GroupTask t;
        t.index = j;
        t.betas = sum.groups[j].betas;
        t.reflections = sum.groups[j].reflections;
        t.full_norm = group_norm_1_half(sum.groups[j]);
        tasks.push_back(std::move(t));
    }
    return run_group_estimates(sum, system_prep, priors, std::move(tasks),
                               epsilon, failure_probability, cfg, rng);
}

AutoPriorResult auto_priors(const ProjectorSum& sum,
                            const StatePrepOracle& system_prep, double epsilon,
                            int mu_cap, double residual_ceiling) {
    validate_sum(sum);
    if (!(epsilon > 0.0)) throw ArgumentError("tolerance must be positive");
    if (mu_cap < 1) throw ArgumentError("boost cap must be >= 1");
    if (!(residual_ceiling > 0.0) || !(residual_ceiling < 0.25)) {
        throw ArgumentError("residual ceiling must lie in (0, 1/4)");
    }
    const std::size_t d = sum.system_dim();
    if (d == 0) throw ArgumentError("projector sum has no terms");
    const StateVector psi = system_prep.prepared_state();
    if (psi.amps.size() != d) {
        throw ShapeError("auto priors: state/operator dimension mismatch");
    }

    double nu = 0.0;
    for (const auto& g : sum.groups) nu += group_norm_1_half(g);
    if (!(nu > 0.0)) {
        throw ArgumentError("projector sum has no nonzero weights");
    }

    AutoPriorResult out;
    out.priors.resize(sum.groups.size());
    out.residual_probabilities.assign(sum.groups.size(), 0.0);

    for (std::size_t j = 0; j < sum.groups.size(); ++j) {
        const ProjectorGroup& g = sum.groups[j];
        const double full_norm = group_norm_1_half(g);
        if (!(full_norm > 0.0)) continue;

        std::vector<double> e(g.betas.size(), 0.0);
        for (std::size_t k = 0; k < g.betas.size(); ++k) {
            if (!(g.betas[k] > 0.0)) continue;
            std::vector<cd> v = psi.amps;
            g.reflections[k].projector().project(v);
            e[k] = kernels::norm2(v.data(), v.size());
        }

        std::vector<bool> covered(g.betas.size(), false);
        bool any_covered = false;
        double p_res = 0.0;
        double eps_norm = 0.0;
        for (;;) {
            double sqrt_sum = 0.0;
            double num = 0.0;
            for (std::size_t k = 0; k < g.betas.size(); ++k) {
                if (covered[k] || !(g.betas[k] > 0.0)) continue;
                sqrt_sum += std::sqrt(g.betas[k]);
                num += g.betas[k] * e[k];
            }
            if (!(sqrt_sum > 0.0)) {
                // Fully covered; nothing left to encode.
                p_res = 0.0;
                eps_norm = 0.0;
                break;
            }
            const double norm_res = sqrt_sum * sqrt_sum;
            p_res = num / norm_res;
            eps_norm = (any_covered ? 0.5 : 1.0) * full_norm * epsilon /
                       (nu * norm_res);
            if (p_res + 2.0 * eps_norm <= residual_ceiling) break;
            if (!(num > 0.0)) {
                // The marked probability is already zero; covering more terms
                // only shrinks the normalization and inflates the per-run
                // tolerance.  Take the whole group classical instead.
                for (std::size_t k = 0; k < g.betas.size(); ++k) {
                    if (!covered[k] && g.betas[k] > 0.0) {
                        covered[k] = true;
                        out.classical.push_back({j, k, e[k]});
                    }
                }
                any_covered = true;
                p_res = 0.0;
                eps_norm = 0.0;
                break;
            }
            std::size_t best = 0;
            double best_val = -1.0;
            for (std::size_t k = 0; k < g.betas.size(); ++k) {
                if (covered[k] || !(g.betas[k] > 0.0)) continue;
                const double val = g.betas[k] * e[k];
                if (val > best_val) {
                    best = k;
                    best_val = val;
                }
            }
            covered[best] = true;
            out.classical.push_back({j, best, e[best]});
            any_covered = true;
        }

        out.residual_probabilities[j] = p_res;
        if (!(eps_norm > 0.0)) continue;  // fully classical group

        const double floor_p = p_res + 2.0 * eps_norm + 1e-12;
        const int mu = largest_mu_with_p0_at_least(floor_p, mu_cap);
        out.priors[j].mu = mu;
        out.priors[j].assumed_delta_abs = canonical_p0(mu) - p_res;
    }
    return out;
}

double classical_prior_tolerance(const ProjectorSum& sum, std::size_t group,
                                 std::span<const std::size_t> covered_terms,
                                 double epsilon) {
    validate_sum(sum);
    if (group >= sum.groups.size()) {
        throw RangeError("group index out of range");
    }
    if (!(epsilon > 0.0)) throw ArgumentError("tolerance must be positive");
    if (covered_terms.empty()) {
        throw ArgumentError("no covered terms; no classical tolerance applies");
    }
    const ProjectorGroup& g = sum.groups[group];
    double covered_weight = 0.0;
    for (const std::size_t i : covered_terms) {
        if (i >= g.betas.size()) throw RangeError("term index out of range");
        covered_weight += g.betas[i];
    }
    if (!(covered_weight > 0.0)) {
        throw ArgumentError("covered terms carry no weight");
    }
    double nu = 0.0;
    for (const auto& gj : sum.groups) nu += group_norm_1_half(gj);
    const double group_norm = group_norm_1_half(g);
    return epsilon / (2.0 * covered_weight) * (group_norm / nu);
}

ProjectorSumEstimate estimate_with_classical_priors(
    const ProjectorSum& sum, const StatePrepOracle& system_prep,
    std::span<const ClassicalTermPrior> classical, const GroupPriors& priors,
    double epsilon, double failure_probability, const AeConfig& cfg,
    Rng& rng) {
    validate_sum(sum);
    std::vector<GroupTask> tasks;
    for (std::size_t j = 0; j < sum.groups.size(); ++j) {
        GroupTask t;
        t.index = j;
        t.betas = sum.groups[j].betas;
        t.reflections = sum.groups[j].reflections;
        t.full_norm = group_norm_1_half(sum.groups[j]);
        tasks.push_back(std::move(t));
    }
    for (const auto& cp : classical) {
        if (cp.group >= tasks.size()) {
            throw RangeError("classical prior: group index out of range");
        }
        GroupTask& t = tasks[cp.group];
        if (cp.term >= t.betas.size()) {
            throw RangeError("classical prior: term index out of range");
        }
        if (!(cp.value >= 0.0) || !(cp.value <= 1.0)) {
            throw ArgumentError(
                "classical prior: projector expectation must lie in [0, 1]");
        }
        if (t.betas[cp.term] < 0.0) {
            throw ArgumentError("classical prior: duplicate term " +
                                std::to_string(cp.term) + " in group " +
                                std::to_string(cp.group));
        }
        t.classical_part += sum.groups[cp.group].betas[cp.term] * cp.value;
        t.betas[cp.term] = -1.0;  // consumed marker
        t.halve_budget = true;
    }
    for (auto& t : tasks) {
        for (double& b : t.betas) {
            if (b < 0.0) b = 0.0;
        }
    }
    return run_group_estimates(sum, system_prep, priors, std::move(tasks),
                               epsilon, failure_probability, cfg, rng);
}

}  // namespace aae
