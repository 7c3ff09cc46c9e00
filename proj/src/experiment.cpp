#include "aae/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <vector>

#include "aae/errors.hpp"
#include "aae/statevector.hpp"

namespace aae {

ScalingInstance scaling_instance(double p) {
    if (!(p >= 0.0) || !(p <= 1.0)) {
        throw ArgumentError("scaling instance: p must lie in [0, 1]");
    }
    StateVector psi = state_from_amplitudes(
        1, {cd(std::sqrt(1.0 - p)), cd(std::sqrt(p))});
    ScalingInstance inst;
    inst.prep = StatePrepOracle::for_state(psi, "state_prep");
    inst.marked =
        ReflectionOracle(ProjectorRep::bitmask(1, 1, 2), "marked_reflection");
    inst.p = p;
    return inst;
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ArgumentError("slope fit needs at least two matched samples");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw ArgumentError("slope fit needs positive samples");
        }
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw ArgumentError("slope fit: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

const char* sweep_method_name(SweepMethod m) {
    switch (m) {
        case SweepMethod::aae: return "aae";
        case SweepMethod::standard_ae: return "standard_ae";
        case SweepMethod::classical: return "classical";
    }
    return "unknown";
}

namespace {

constexpr SweepMethod kMethods[] = {SweepMethod::aae, SweepMethod::standard_ae,
                                    SweepMethod::classical};

SweepPoint run_point(const SweepOptions& opts, int index, SweepMethod method,
                     double epsilon) {
    SweepPoint pt;
    pt.index = index;
    pt.method = method;
    pt.epsilon = epsilon;
    pt.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(index));

    int mu = largest_mu_with_p0_at_least(4.0 * epsilon);
    if (mu < 1) mu = 1;
    const double p0 = canonical_p0(mu);
    const double delta = opts.delta_fraction * p0;
    pt.mu = mu;
    pt.p0 = p0;
    pt.p_true = p0 - delta;

    ScalingInstance inst = scaling_instance(pt.p_true);
    Rng rng(pt.seed);

    switch (method) {
        case SweepMethod::aae: {
            AaeParams params;
            params.mu = mu;
            params.epsilon = epsilon;
            params.failure_probability = opts.failure_probability;
            params.assumed_delta_abs = delta;
            const EstimateReport rep =
                aae_estimate(inst.prep, inst.marked, params, opts.ae, rng);
            pt.estimate = rep.estimate;
            pt.queries = rep.total_queries;
            break;
        }
        case SweepMethod::standard_ae: {
            const Walk walk = make_walk(inst.prep, inst.marked);
            std::vector<CounterPtr> counters = inst.prep.charges().counters();
            for (const auto& c : walk.charges().counters()) {
                counters.push_back(c);
            }
            const QuerySnapshot before = snapshot_counters(counters);
            const AmplitudeEstimateResult res =
                amplitude_estimate(walk, inst.prep, epsilon,
                                   opts.failure_probability, opts.ae, rng);
            const QuerySnapshot after = snapshot_counters(counters);
            pt.estimate = res.p_hat;
            for (const auto& [name, n] : snapshot_delta(before, after)) {
                pt.queries += n;
            }
            break;
        }
        case SweepMethod::classical: {
            const ClassicalBaselineResult res = classical_baseline(
                inst.prep, inst.marked.projector(), epsilon, p0, rng);
            pt.estimate = res.estimate;
            pt.queries = res.total_queries;
            break;
        }
    }
    pt.abs_error = std::abs(pt.estimate - pt.p_true);
    return pt;
}

}  // namespace

SweepResult run_sweep(const SweepOptions& opts) {
    if (opts.log2_eps_start < 1 || opts.log2_eps_stop < opts.log2_eps_start) {
        throw ArgumentError("sweep: bad tolerance grid exponents");
    }
    if (!(opts.delta_fraction > 0.0) || !(opts.delta_fraction < 1.0)) {
        throw ArgumentError("sweep: delta fraction must lie in (0, 1)");
    }
    const int grid = opts.log2_eps_stop - opts.log2_eps_start + 1;
    const int total = grid * 3;

    SweepResult out;
    out.points.resize(total);

    auto task = [&](int index) {
        const int g = index / 3;
        const SweepMethod method = kMethods[index % 3];
        const double epsilon =
            std::ldexp(1.0, -(opts.log2_eps_start + g));
        out.points[index] = run_point(opts, index, method, epsilon);
    };

    const int workers = std::max(1, std::min(opts.workers, total));
    if (workers == 1) {
        for (int i = 0; i < total; ++i) task(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    const int i = next.fetch_add(1);
                    if (i >= total) return;
                    task(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    std::vector<double> inv_eps;
    std::vector<double> q_aae, q_std, q_cls;
    for (int g = 0; g < grid; ++g) {
        inv_eps.push_back(1.0 / out.points[g * 3].epsilon);
        q_aae.push_back(static_cast<double>(out.points[g * 3].queries));
        q_std.push_back(static_cast<double>(out.points[g * 3 + 1].queries));
        q_cls.push_back(static_cast<double>(out.points[g * 3 + 2].queries));
    }
    out.slope_aae = fit_loglog_slope(inv_eps, q_aae);
    out.slope_standard = fit_loglog_slope(inv_eps, q_std);
    out.slope_classical = fit_loglog_slope(inv_eps, q_cls);
    return out;
}

}  // namespace aae
