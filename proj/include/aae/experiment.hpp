#ifndef AAE_EXPERIMENT_HPP
#define AAE_EXPERIMENT_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "aae/estimation.hpp"
#include "aae/oracles.hpp"
#include "aae/rng.hpp"

namespace aae {

// ---------------------------------------------------------------------------
// Query-scaling sweep.  For each tolerance on the grid the instance is a
// single qubit sqrt(1-p)|0> + sqrt(p)|1> with the |1><1| marked projector,
// where p sits half a ceiling below the tightest boost order that keeps
// p0 >= 4 eps.  Three estimators run on every instance: the boosted protocol
// at its assumed offset, plain amplitude estimation at tolerance eps, and
// Bernoulli sampling with the ceiling as the variance proxy.
// ---------------------------------------------------------------------------

struct ScalingInstance {
    StatePrepOracle prep;
    ReflectionOracle marked;
    double p = 0.0;
};

ScalingInstance scaling_instance(double p);

// Least-squares slope of log y against log x.
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

enum class SweepMethod { aae, standard_ae, classical };

const char* sweep_method_name(SweepMethod m);

struct SweepPoint {
    int index = 0;  // position in the emitted table
    SweepMethod method = SweepMethod::aae;
    double epsilon = 0.0;
    int mu = 0;
    double p0 = 0.0;
    double p_true = 0.0;
    double estimate = 0.0;
    double abs_error = 0.0;
    long long queries = 0;
    std::uint64_t seed = 0;  // derived per-point stream seed
};

struct SweepOptions {
    int log2_eps_start = 4;  // grid eps = 2^-start .. 2^-stop, inclusive
    int log2_eps_stop = 12;
    double delta_fraction = 0.5;  // |delta| as a fraction of p0
    double failure_probability = 0.05;
    std::uint64_t seed = 1;
    int workers = 1;
    AeConfig ae;
};

struct SweepResult {
    std::vector<SweepPoint> points;  // deterministic order: grid-major
    double slope_aae = 0.0;       // log queries vs log(1/eps)
    double slope_standard = 0.0;
    double slope_classical = 0.0;
};

// Points run concurrently up to opts.workers; every point draws from its own
// stream derived from (seed, point index), so the result does not depend on
// the worker count.
SweepResult run_sweep(const SweepOptions& opts);

}  // namespace aae

#endif
