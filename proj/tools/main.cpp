// Configuration-driven runner: single estimations, query-scaling sweeps and
// quadrature utilities, with machine-readable output for external plotting.
//
// Exit codes: 0 success, 1 flag/config validation failure, 2 pipeline error
// (prior violation, gap collapse and friends).  Pipeline errors still write
// a structured error record and the manifest before exiting.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "aae/errors.hpp"
#include "aae/estimation.hpp"
#include "aae/experiment.hpp"
#include "aae/fermion.hpp"
#include "aae/quadrature.hpp"
#include "aae/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct ValidationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Config plumbing.  The config file is a flat JSON object; unknown keys are
// rejected by name, types are checked per field, and command-line flags win
// over config values, which win over the defaults.
// ---------------------------------------------------------------------------

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationFailure("config: cannot open " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const json::parse_error& e) {
        throw ValidationFailure("config: " + std::string(e.what()));
    }
    if (!cfg.is_object()) throw ValidationFailure("config: not an object");
    return cfg;
}

void reject_unknown_keys(const json& cfg,
                         const std::vector<std::string>& allowed) {
    for (const auto& [key, value] : cfg.items()) {
        (void)value;
        bool ok = false;
        for (const auto& a : allowed) {
            if (key == a) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ValidationFailure("config: unknown key \"" + key + "\"");
    }
}

double number_or(const json& cfg, const char* key, double def) {
    if (!cfg.contains(key)) return def;
    const json& v = cfg.at(key);
    if (!v.is_number()) {
        throw ValidationFailure("config: \"" + std::string(key) +
                                "\" must be a number");
    }
    return v.get<double>();
}

std::int64_t integer_or(const json& cfg, const char* key, std::int64_t def) {
    if (!cfg.contains(key)) return def;
    const json& v = cfg.at(key);
    if (!v.is_number_integer()) {
        throw ValidationFailure("config: \"" + std::string(key) +
                                "\" must be an integer");
    }
    return v.get<std::int64_t>();
}

std::string string_or(const json& cfg, const char* key,
                      const std::string& def) {
    if (!cfg.contains(key)) return def;
    const json& v = cfg.at(key);
    if (!v.is_string()) {
        throw ValidationFailure("config: \"" + std::string(key) +
                                "\" must be a string");
    }
    return v.get<std::string>();
}

struct Settings {
    std::string mode;
    json cfg = json::object();
    fs::path out_dir;
    std::uint64_t seed = 1;
    int workers = 1;
    aae::AeConfig ae;
    std::string backend = "qpe";
};

aae::AeBackend parse_backend(const std::string& name) {
    if (name == "qpe") return aae::AeBackend::qpe;
    if (name == "exact") return aae::AeBackend::exact_subspace;
    throw ValidationFailure("backend must be \"qpe\" or \"exact\", got \"" +
                            name + "\"");
}

// ---------------------------------------------------------------------------
// Output files.
// ---------------------------------------------------------------------------

void write_ndjson(const fs::path& path, const std::vector<json>& records) {
    std::ofstream out(path);
    if (!out) throw aae::Error("cannot write " + path.string());
    for (const auto& r : records) out << r.dump() << "\n";
}

// Wall-clock seconds land only here: the records files stay bit-for-bit
// reproducible for a fixed config and seed, the manifest does not.
void write_manifest(const Settings& s, const std::vector<std::string>& files,
                    double wall_seconds, const json& extra) {
    json m{{"version", kVersion},
           {"mode", s.mode},
           {"seed", s.seed},
           {"workers", s.workers},
           {"backend", s.backend},
           {"config", s.cfg},
           {"files", files},
           {"wall_clock_seconds", wall_seconds}};
    for (const auto& [key, value] : extra.items()) m[key] = value;
    std::ofstream out(s.out_dir / "manifest.json");
    if (!out) {
        throw aae::Error("cannot write " +
                         (s.out_dir / "manifest.json").string());
    }
    out << m.dump(2) << "\n";
}

json queries_json(const aae::QuerySnapshot& q) {
    json out = json::object();
    for (const auto& [name, n] : q) out[name] = n;
    return out;
}

// ---------------------------------------------------------------------------
// Modes.
// ---------------------------------------------------------------------------

std::vector<json> run_aae_mode(const Settings& s) {
    const double p = number_or(s.cfg, "p", 0.2);
    const double epsilon = number_or(s.cfg, "epsilon", 1e-3);
    aae::AaeParams params;
    params.mu = static_cast<int>(integer_or(s.cfg, "mu", 1));
    params.epsilon = epsilon;
    params.failure_probability = number_or(s.cfg, "failure", 0.05);
    params.assumed_delta_abs = number_or(s.cfg, "assumed_delta", 0.0);

    aae::ScalingInstance inst = aae::scaling_instance(p);
    aae::Rng rng(s.seed);
    const aae::EstimateReport rep =
        aae::aae_estimate(inst.prep, inst.marked, params, s.ae, rng);

    const double err = std::abs(rep.estimate - p);
    std::cout << "estimate " << rep.estimate << "  true " << p
              << "  abs error " << err << "  (target " << epsilon << ")\n"
              << "mu " << rep.mu << "  p0 " << rep.p0 << "  phase bits "
              << rep.phase_bits << "  repetitions " << rep.repetitions
              << "  queries " << rep.total_queries << "\n";

    json rec{{"id", "aae-" + std::to_string(s.seed)},
             {"mode", "aae"},
             {"estimate", rep.estimate},
             {"true_value", p},
             {"abs_error", err},
             {"epsilon", epsilon},
             {"mu", rep.mu},
             {"p0", rep.p0},
             {"ae_epsilon", rep.ae_epsilon},
             {"phase_bits", rep.phase_bits},
             {"repetitions", rep.repetitions},
             {"queries", queries_json(rep.queries)},
             {"total_queries", rep.total_queries},
             {"seed", s.seed},
             {"version", kVersion}};
    return {rec};
}

std::vector<json> run_operator_mode(const Settings& s) {
    aae::ObservableJob job;
    const std::string file = string_or(s.cfg, "observable_file", "");
    unsigned orbitals =
        static_cast<unsigned>(integer_or(s.cfg, "orbitals", 3));
    if (!file.empty()) {
        job.observable = aae::load_one_body(file);
        orbitals = job.observable.n_orbitals;
    } else {
        job.observable = aae::builtin_one_body(orbitals);
    }
    job.hamiltonian = aae::builtin_hamiltonian(orbitals);
    job.epsilon = number_or(s.cfg, "epsilon", 1e-3);
    job.failure_probability = number_or(s.cfg, "failure", 0.05);
    job.mu_cap = static_cast<int>(integer_or(s.cfg, "mu_cap", 12));
    job.residual_ceiling = number_or(s.cfg, "residual_ceiling", 0.2);

    aae::Rng rng(s.seed);
    const aae::ObservableEstimate est =
        aae::measure_one_body_on_ground_state(job, s.ae, rng);

    const double err = std::abs(est.estimate.value - est.exact_value);
    std::cout << "estimate " << est.estimate.value << "  exact "
              << est.exact_value << "  abs error " << err << "  (target "
              << job.epsilon << ")\n"
              << "ground energy " << est.ground_energy << "  queries "
              << est.estimate.total_queries << "\n";

    json mus = json::array();
    for (const auto& pr : est.priors.priors) mus.push_back(pr.mu);
    json rec{{"id", "operator-" + std::to_string(s.seed)},
             {"mode", "operator"},
             {"orbitals", orbitals},
             {"estimate", est.estimate.value},
             {"true_value", est.exact_value},
             {"abs_error", err},
             {"epsilon", job.epsilon},
             {"ground_energy", est.ground_energy},
             {"queries_per_preparation", est.cost.queries_per_preparation},
             {"mus", mus},
             {"classical_priors", est.priors.classical.size()},
             {"residual_probabilities", est.priors.residual_probabilities},
             {"queries", queries_json(est.estimate.queries)},
             {"total_queries", est.estimate.total_queries},
             {"seed", s.seed},
             {"version", kVersion}};
    return {rec};
}

std::vector<json> run_energy_diff_mode(const Settings& s) {
    aae::EnergyDifferenceOptions opts;
    opts.epsilon = number_or(s.cfg, "epsilon", 1e-2);
    opts.failure_probability = number_or(s.cfg, "failure", 0.05);
    opts.gamma_override = number_or(s.cfg, "gamma_override", 0.0);
    opts.gamma_samples =
        static_cast<int>(integer_or(s.cfg, "gamma_samples", 256));
    opts.gamma_safety = number_or(s.cfg, "gamma_safety", 1.2);
    opts.gap_samples = static_cast<int>(integer_or(s.cfg, "gap_samples", 64));

    const aae::HamiltonianPath path = aae::builtin_path();
    aae::Rng rng(s.seed);
    const aae::EnergyDifferenceResult res =
        aae::energy_difference(path, opts, s.ae, rng);

    const double err = std::abs(res.value - res.exact);
    std::cout << "energy difference " << res.value << "  exact " << res.exact
              << "  abs error " << err << "  (target " << res.epsilon << ")\n"
              << "order " << res.order << "  gamma " << res.gamma
              << "  node tolerance " << res.node_epsilon << "  queries "
              << res.total_queries << "\n";

    std::vector<json> recs;
    for (std::size_t k = 0; k < res.nodes.size(); ++k) {
        const aae::NodeRecord& node = res.nodes[k];
        json mus = json::array();
        for (const int m : node.mus) mus.push_back(m);
        recs.push_back(
            json{{"id", "energy-diff-" + std::to_string(s.seed) + "-node" +
                            std::to_string(k)},
                 {"mode", "energy-diff-node"},
                 {"x", node.x},
                 {"weight", node.weight},
                 {"classical", node.classical},
                 {"estimate", node.gradient_estimate},
                 {"true_value", node.exact_gradient},
                 {"abs_error",
                  std::abs(node.gradient_estimate - node.exact_gradient)},
                 {"mus", mus},
                 {"queries", queries_json(node.estimate.queries)},
                 {"total_queries", node.estimate.total_queries},
                 {"seed", s.seed},
                 {"version", kVersion}});
    }
    recs.push_back(json{{"id", "energy-diff-" + std::to_string(s.seed)},
                        {"mode", "energy-diff"},
                        {"estimate", res.value},
                        {"true_value", res.exact},
                        {"abs_error", err},
                        {"epsilon", res.epsilon},
                        {"gamma", res.gamma},
                        {"order", res.order},
                        {"node_epsilon", res.node_epsilon},
                        {"queries", queries_json(res.queries)},
                        {"total_queries", res.total_queries},
                        {"seed", s.seed},
                        {"version", kVersion}});
    return recs;
}

std::vector<json> run_weights_mode(const Settings& s) {
    const int order = static_cast<int>(integer_or(s.cfg, "order", 3));
    const aae::QuadratureRule rule = aae::newton_cotes_rule(order);

    std::cout << "order " << rule.order << "  weights";
    for (const double w : rule.weights) std::cout << " " << w;
    std::cout << "\nabs weight sum " << rule.abs_weight_sum << "\n";

    json rec{{"id", "weights-" + std::to_string(order)},
             {"mode", "weights"},
             {"order", rule.order},
             {"nodes", rule.nodes},
             {"weights", rule.weights},
             {"abs_weight_sum", rule.abs_weight_sum},
             {"seed", s.seed},
             {"version", kVersion}};
    if (s.cfg.contains("epsilon") || s.cfg.contains("gamma")) {
        const double epsilon = number_or(s.cfg, "epsilon", 1e-3);
        const double gamma = number_or(s.cfg, "gamma", 1.0);
        const aae::QuadratureParameters qp =
            aae::select_parameters(epsilon, gamma);
        rec["selected_order"] = qp.order;
        rec["node_epsilon"] = qp.node_epsilon;
        rec["truncation"] = qp.truncation;
        std::cout << "selected order " << qp.order << "  node tolerance "
                  << qp.node_epsilon << "  truncation " << qp.truncation
                  << "\n";
    }
    return {rec};
}

std::string run_sweep_mode(const Settings& s, json& manifest_extra) {
    aae::SweepOptions opts;
    opts.log2_eps_start =
        static_cast<int>(integer_or(s.cfg, "log2_eps_start", 4));
    opts.log2_eps_stop =
        static_cast<int>(integer_or(s.cfg, "log2_eps_stop", 12));
    opts.delta_fraction = number_or(s.cfg, "delta_fraction", 0.5);
    opts.failure_probability = number_or(s.cfg, "failure", 0.05);
    opts.seed = s.seed;
    opts.workers = s.workers;
    opts.ae = s.ae;

    const aae::SweepResult res = aae::run_sweep(opts);

    const fs::path csv_path = s.out_dir / "sweep.csv";
    std::ofstream csv(csv_path);
    if (!csv) throw aae::Error("cannot write " + csv_path.string());
    csv << "epsilon,method,queries,abs_error,seed\n";
    csv.precision(17);
    for (const auto& pt : res.points) {
        csv << pt.epsilon << "," << aae::sweep_method_name(pt.method) << ","
            << pt.queries << "," << pt.abs_error << "," << pt.seed << "\n";
    }

    std::cout << "slopes (log queries vs log 1/eps): aae " << res.slope_aae
              << "  standard " << res.slope_standard << "  classical "
              << res.slope_classical << "\n";

    manifest_extra["slope_aae"] = res.slope_aae;
    manifest_extra["slope_standard"] = res.slope_standard;
    manifest_extra["slope_classical"] = res.slope_classical;
    manifest_extra["points"] = res.points.size();
    return "sweep.csv";
}

json error_record(const std::string& mode, const std::exception& e) {
    std::string tag = "error";
    json rec{{"mode", mode}, {"message", e.what()}, {"version", kVersion}};
    if (const auto* pv = dynamic_cast<const aae::PriorViolationError*>(&e)) {
        tag = "prior_violation";
        rec["estimate"] = pv->estimate;
        rec["p0"] = pv->p0;
    } else if (dynamic_cast<const aae::GapError*>(&e)) {
        tag = "gap";
    } else if (dynamic_cast<const aae::OverlapError*>(&e)) {
        tag = "overlap";
    } else if (dynamic_cast<const aae::ResourceError*>(&e)) {
        tag = "resource";
    } else if (dynamic_cast<const aae::ContractError*>(&e)) {
        tag = "contract";
    } else if (dynamic_cast<const aae::ParseError*>(&e)) {
        tag = "parse";
    }
    rec["error"] = tag;
    return rec;
}

const std::vector<std::string> kCommonKeys = {"mode", "seed", "backend",
                                              "out", "workers"};

std::vector<std::string> allowed_keys_for(const std::string& mode) {
    std::vector<std::string> keys = kCommonKeys;
    auto extend = [&keys](std::initializer_list<const char*> more) {
        for (const char* k : more) keys.emplace_back(k);
    };
    if (mode == "aae") {
        extend({"p", "mu", "epsilon", "failure", "assumed_delta"});
    } else if (mode == "operator") {
        extend({"orbitals", "observable_file", "epsilon", "failure", "mu_cap",
                "residual_ceiling"});
    } else if (mode == "energy-diff") {
        extend({"epsilon", "failure", "gamma_override", "gamma_samples",
                "gamma_safety", "gap_samples"});
    } else if (mode == "sweep") {
        extend({"log2_eps_start", "log2_eps_stop", "delta_fraction",
                "failure"});
    } else if (mode == "weights") {
        extend({"order", "epsilon", "gamma"});
    }
    return keys;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"query-counted amplitude estimation runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_flag;
    std::string backend_flag;
    std::uint64_t seed_flag = 0;
    int workers_flag = 0;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out_flag, "output directory");
    app.add_option("--seed", seed_flag, "base RNG seed");
    app.add_option("--workers", workers_flag, "sweep worker count");
    app.add_option("--backend", backend_flag,
                   "amplitude estimation backend: qpe | exact");

    for (const char* name :
         {"aae", "operator", "energy-diff", "sweep", "weights"}) {
        app.add_subcommand(name)->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    Settings s;
    std::vector<json> records;
    try {
        s.mode = app.get_subcommands().at(0)->get_name();
        if (!config_path.empty()) s.cfg = load_config(config_path);
        reject_unknown_keys(s.cfg, allowed_keys_for(s.mode));
        const std::string cfg_mode = string_or(s.cfg, "mode", s.mode);
        if (cfg_mode != s.mode) {
            throw ValidationFailure("config: \"mode\" is \"" + cfg_mode +
                                    "\" but the subcommand is \"" + s.mode +
                                    "\"");
        }

        // Flags > environment > config > defaults.
        std::string out =
            string_or(s.cfg, "out", "out");
        if (const char* env = std::getenv("AAE_OUT_DIR")) out = env;
        if (!out_flag.empty()) out = out_flag;
        s.out_dir = out;

        std::int64_t workers = integer_or(s.cfg, "workers", 1);
        if (const char* env = std::getenv("AAE_WORKERS")) {
            try {
                workers = std::stoll(env);
            } catch (...) {
                throw ValidationFailure("AAE_WORKERS is not an integer");
            }
        }
        if (workers_flag > 0) workers = workers_flag;
        if (workers < 1) throw ValidationFailure("workers must be >= 1");
        s.workers = static_cast<int>(workers);

        std::int64_t seed = integer_or(s.cfg, "seed", 1);
        if (seed_flag != 0) seed = static_cast<std::int64_t>(seed_flag);
        s.seed = static_cast<std::uint64_t>(seed);

        s.backend = string_or(s.cfg, "backend", "qpe");
        if (!backend_flag.empty()) s.backend = backend_flag;
        s.ae.backend = parse_backend(s.backend);

        std::error_code ec;
        fs::create_directories(s.out_dir, ec);
        if (ec) {
            throw ValidationFailure("cannot create output directory " +
                                    s.out_dir.string());
        }
    } catch (const ValidationFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&t0]() {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             t0)
            .count();
    };

    try {
        json manifest_extra = json::object();
        std::vector<std::string> files;
        if (s.mode == "sweep") {
            files.push_back(run_sweep_mode(s, manifest_extra));
        } else {
            if (s.mode == "aae") {
                records = run_aae_mode(s);
            } else if (s.mode == "operator") {
                records = run_operator_mode(s);
            } else if (s.mode == "energy-diff") {
                records = run_energy_diff_mode(s);
            } else {
                records = run_weights_mode(s);
            }
            write_ndjson(s.out_dir / "records.ndjson", records);
            files.push_back("records.ndjson");
        }
        write_manifest(s, files, elapsed(), manifest_extra);
        std::cout << "wrote " << (s.out_dir / files.front()).string() << "\n";
        return 0;
    } catch (const ValidationFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        try {
            write_ndjson(s.out_dir / "records.ndjson",
                         {error_record(s.mode, e)});
            write_manifest(s, {"records.ndjson"}, elapsed(),
                           json{{"error", true}});
        } catch (const std::exception& io) {
            std::cerr << "error: " << io.what() << "\n";
        }
        return 2;
    }
}
