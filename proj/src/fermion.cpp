#include "aae/fermion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include "aae/errors.hpp"
#include "aae/kernels.hpp"
#include "aae/spectral.hpp"

namespace aae {

namespace {

constexpr double kSymTol = 1e-10;
constexpr double kStructureTol = 1e-10;

void require_symmetric(const OneBodyOperator& op) {
    for (unsigned p = 0; p < op.n_orbitals; ++p) {
        for (unsigned q = p + 1; q < op.n_orbitals; ++q) {
            if (std::abs(op.at(p, q) - op.at(q, p)) > kSymTol) {
                throw ArgumentError(
                    "one-body matrix must be symmetric; entries (" +
                    std::to_string(p) + "," + std::to_string(q) +
                    ") disagree");
            }
        }
    }
}

}  // namespace

OneBodyOperator make_one_body(unsigned n_orbitals,
                              std::vector<double> entries) {
    if (n_orbitals == 0) throw ArgumentError("one-body matrix: no orbitals");
    if (entries.size() != std::size_t{n_orbitals} * n_orbitals) {
        throw ShapeError("one-body matrix: expected " +
                         std::to_string(n_orbitals) + "^2 entries, got " +
                         std::to_string(entries.size()));
    }
    OneBodyOperator op;
    op.n_orbitals = n_orbitals;
    op.a = std::move(entries);
    require_symmetric(op);
    return op;
}

OneBodyOperator one_body_from_matrix(const DenseOperator& m) {
    std::vector<double> entries(m.dim * m.dim);
    for (std::size_t r = 0; r < m.dim; ++r) {
        for (std::size_t c = 0; c < m.dim; ++c) {
            const cd v = m.at(r, c);
            if (std::abs(v.imag()) > kSymTol) {
                throw ArgumentError(
                    "one-body matrix: complex entries are not supported");
            }
            entries[r * m.dim + c] = v.real();
        }
    }
    return make_one_body(static_cast<unsigned>(m.dim), std::move(entries));
}

OneBodyOperator load_one_body(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open one-body matrix file " + path);
    std::string text;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        text += line;
        text += ' ';
    }
    std::istringstream tokens(text);
    long long n = 0;
    if (!(tokens >> n) || n < 1) {
        throw ParseError("one-body matrix file " + path +
                         ": expected a positive orbital count first");
    }
    if (n > 24) {
        throw ResourceError("one-body matrix file " + path + ": " +
                            std::to_string(n) + " orbitals is over the cap");
    }
    std::vector<double> entries;
    entries.reserve(static_cast<std::size_t>(n * n));
    double v = 0.0;
    while (tokens >> v) entries.push_back(v);
    if (entries.size() != static_cast<std::size_t>(n * n)) {
        throw ParseError("one-body matrix file " + path + ": expected " +
                         std::to_string(n * n) + " entries, found " +
                         std::to_string(entries.size()));
    }
    return make_one_body(static_cast<unsigned>(n), std::move(entries));
}

void save_one_body(const OneBodyOperator& op, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write one-body matrix file " + path);
    out << op.n_orbitals << "\n";
    out.precision(17);
    for (unsigned p = 0; p < op.n_orbitals; ++p) {
        for (unsigned q = 0; q < op.n_orbitals; ++q) {
            out << op.at(p, q) << (q + 1 == op.n_orbitals ? "\n" : " ");
        }
    }
}

DenseOperator one_body_matrix(const OneBodyOperator& op) {
    require_symmetric(op);
    const unsigned n = op.n_orbitals;
    const std::size_t dim = std::size_t{1} << n;
    DenseOperator m(dim, OpKind::hermitian);
    for (std::size_t ket = 0; ket < dim; ++ket) {
        for (unsigned q = 0; q < n; ++q) {
            if (!((ket >> q) & 1)) continue;
            const std::size_t mid = ket ^ (std::size_t{1} << q);
            const int sign_q =
                (std::popcount(mid & ((std::size_t{1} << q) - 1)) & 1) ? -1
                                                                       : 1;
            for (unsigned p = 0; p < n; ++p) {
                const double apq = op.at(p, q);
                if (apq == 0.0) continue;
                if ((mid >> p) & 1) continue;
                const std::size_t bra = mid | (std::size_t{1} << p);
                const int sign_p =
                    (std::popcount(mid & ((std::size_t{1} << p) - 1)) & 1)
                        ? -1
                        : 1;
                m.at(bra, ket) += apq * sign_q * sign_p;
            }
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Pauli strings.
// ---------------------------------------------------------------------------

bool PauliString::is_identity() const {
    for (const std::uint8_t c : codes) {
        if (c != 0) return false;
    }
    return true;
}

std::string PauliString::label() const {
    static const char kNames[] = {'I', 'X', 'Y', 'Z'};
    std::string out;
    out.reserve(codes.size());
    for (const std::uint8_t c : codes) out.push_back(kNames[c & 3]);
    return out;
}

DenseOperator PauliString::matrix() const {
    const unsigned n = n_qubits();
    if (n == 0) throw ArgumentError("pauli string: no qubits");
    if (n > 24) throw ResourceError("pauli string: too many qubits");
    std::uint64_t x_mask = 0;
    for (unsigned q = 0; q < n; ++q) {
        const std::uint8_t c = codes[q];
        if (c > 3) throw ArgumentError("pauli string: bad code");
        if (c == 1 || c == 2) x_mask |= std::uint64_t{1} << q;
    }
    const std::size_t dim = std::size_t{1} << n;
    DenseOperator m(dim, OpKind::hermitian);
    for (std::size_t col = 0; col < dim; ++col) {
        cd v = coeff;
        for (unsigned q = 0; q < n; ++q) {
            const bool bit = (col >> q) & 1;
            switch (codes[q]) {
                case 2:  // <r|Y|c> with r = c^1: i for c=0, -i for c=1
                    v *= bit ? cd(0.0, -1.0) : cd(0.0, 1.0);
                    break;
                case 3:
                    if (bit) v = -v;
                    break;
                default:
                    break;
            }
        }
        m.at(col ^ x_mask, col) = v;
    }
    return m;
}

std::vector<PauliString> jordan_wigner_one_body(const OneBodyOperator& op) {
    require_symmetric(op);
    const unsigned n = op.n_orbitals;
    std::vector<PauliString> out;
    for (unsigned p = 0; p < n; ++p) {
        const double app = op.at(p, p);
        if (app == 0.0) continue;
        PauliString id;
        id.coeff = app / 2.0;
        id.codes.assign(n, 0);
        out.push_back(id);
        PauliString z = id;
        z.coeff = -app / 2.0;
        z.codes[p] = 3;
        out.push_back(std::move(z));
    }
    for (unsigned p = 0; p < n; ++p) {
        for (unsigned q = p + 1; q < n; ++q) {
            const double apq = op.at(p, q);
            if (apq == 0.0) continue;
            PauliString xs;
            xs.coeff = apq / 2.0;
            xs.codes.assign(n, 0);
            xs.codes[p] = 1;
            xs.codes[q] = 1;
            for (unsigned r = p + 1; r < q; ++r) xs.codes[r] = 3;
            PauliString ys = xs;
            ys.codes[p] = 2;
            ys.codes[q] = 2;
            out.push_back(std::move(xs));
            out.push_back(std::move(ys));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Projector splits.
// ---------------------------------------------------------------------------

ProjectorSum signed_projector_split(std::span<const double> weights,
                                    std::span<const DenseOperator> unitaries,
                                    double identity_offset,
                                    std::span<const std::string> labels) {
    if (weights.size() != unitaries.size()) {
        throw ShapeError("projector split: weight/term count mismatch");
    }
    if (!labels.empty() && labels.size() != weights.size()) {
        throw ShapeError("projector split: label count mismatch");
    }
    ProjectorSum out;
    out.groups.resize(2);
    out.groups[0].sign = +1;
    out.groups[1].sign = -1;
    out.offset = identity_offset;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double w = weights[i];
        if (w == 0.0) continue;
        const DenseOperator& u = unitaries[i];
        const DenseOperator eye = DenseOperator::identity(u.dim);
        if (max_abs_diff(u, eye) <= kStructureTol) {
            out.offset += w;
            continue;
        }
        if (hermiticity_defect(u) > kStructureTol ||
            unitarity_defect(u) > kStructureTol) {
            throw ArgumentError(
                "projector split: term " + std::to_string(i) +
                " is not a hermitian involution");
        }
        DenseOperator pi = scale(0.5, add(eye, u));
        pi.kind = OpKind::projector;
        const std::string name =
            labels.empty() ? "term" + std::to_string(i) : labels[i];
        ProjectorGroup& g = out.groups[w > 0.0 ? 0 : 1];
        g.betas.push_back(2.0 * std::abs(w));
        g.reflections.emplace_back(ProjectorRep::dense(std::move(pi)), name);
        out.offset -= w;
    }
    return out;
}

ProjectorSum projector_decomposition(std::span<const PauliString> strings) {
    if (strings.empty()) throw ArgumentError("decomposition: no strings");
    const unsigned n = strings[0].n_qubits();
    double identity_offset = 0.0;
    std::vector<double> weights;
    std::vector<DenseOperator> unitaries;
    std::vector<std::string> labels;
    for (const auto& s : strings) {
        if (s.n_qubits() != n) {
            throw ShapeError("decomposition: strings of mixed width");
        }
        if (s.coeff == 0.0) continue;
        if (s.is_identity()) {
            identity_offset += s.coeff;
            continue;
        }
        PauliString unit = s;
        unit.coeff = 1.0;
        weights.push_back(s.coeff);
        unitaries.push_back(unit.matrix());
        labels.push_back(unit.label());
    }
    return signed_projector_split(weights, unitaries, identity_offset, labels);
}

BetaNorms beta_norms(const ProjectorSum& sum) {
    BetaNorms out;
    for (const auto& g : sum.groups) {
        double sq = 0.0;
        for (const double b : g.betas) {
            if (!(b >= 0.0)) {
                throw ArgumentError("beta norms: negative weight");
            }
            out.norm_11 += b;
            sq += std::sqrt(b);
        }
        out.norm_1_half += sq * sq;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Drift bounds.
// ---------------------------------------------------------------------------

namespace {

void require_positive(double x, const char* what) {
    if (!(x > 0.0)) {
        throw ArgumentError(std::string(what) + " must be positive");
    }
}

}  // namespace

double state_motion_bound(double hdot_max, double gap) {
    require_positive(gap, "spectral gap");
    if (hdot_max < 0.0) throw ArgumentError("derivative norm must be >= 0");
    return hdot_max / gap;
}

double projector_drift_bound(double hdot_max, double gap) {
    return 2.0 * state_motion_bound(hdot_max, gap);
}

double extrapolation_radius(double hdot_max, double gap, double epsilon,
                            double beta_norm_11, double p0_max) {
    require_positive(gap, "spectral gap");
    require_positive(epsilon, "tolerance");
    require_positive(beta_norm_11, "weight norm");
    if (!(p0_max > 0.0) || p0_max >= 1.0) {
        throw ArgumentError("probability ceiling must lie in (0, 1)");
    }
    if (hdot_max < 0.0) throw ArgumentError("derivative norm must be >= 0");
    if (hdot_max == 0.0) return std::numeric_limits<double>::infinity();
    const double error_limit = gap * epsilon / (4.0 * beta_norm_11 * hdot_max);
    const double ceiling_limit =
        gap * std::max(0.0, 0.25 - p0_max) / (2.0 * hdot_max);
    return std::min(error_limit, ceiling_limit);
}

// ---------------------------------------------------------------------------
// Hamiltonian paths.
// ---------------------------------------------------------------------------

PathCoefficient PathCoefficient::constant(double value) {
    PathCoefficient c;
    c.f = [value](cd) { return cd(value); };
    c.df = [](cd) { return cd(0.0); };
    return c;
}

PathCoefficient PathCoefficient::linear(double slope) {
    PathCoefficient c;
    c.f = [slope](cd z) { return slope * z; };
    c.df = [slope](cd) { return cd(slope); };
    return c;
}

PathCoefficient PathCoefficient::affine(double value, double slope) {
    PathCoefficient c;
    c.f = [value, slope](cd z) { return value + slope * z; };
    c.df = [slope](cd) { return cd(slope); };
    return c;
}

PathCoefficient PathCoefficient::exponential(double value, double rate) {
    PathCoefficient c;
    c.f = [value, rate](cd z) { return value * std::exp(rate * z); };
    c.df = [value, rate](cd z) { return value * rate * std::exp(rate * z); };
    return c;
}

PathCoefficient PathCoefficient::sine(double value, double freq) {
    PathCoefficient c;
    c.f = [value, freq](cd z) { return value * std::sin(freq * z); };
    c.df = [value, freq](cd z) { return value * freq * std::cos(freq * z); };
    return c;
}

std::size_t HamiltonianPath::dim() const {
    if (terms.empty()) throw ArgumentError("path: no terms");
    return terms[0].dim;
}

DenseOperator HamiltonianPath::matrix_at(cd z) const {
    if (coeffs.size() != terms.size() || terms.empty()) {
        throw ShapeError("path: coefficient/term count mismatch");
    }
    const std::size_t d = dim();
    DenseOperator m(d, OpKind::general);
    for (std::size_t j = 0; j < terms.size(); ++j) {
        if (terms[j].dim != d) throw ShapeError("path: mixed dimensions");
        const cd a = coeffs[j].f(z);
        for (std::size_t i = 0; i < d * d; ++i) m.a[i] += a * terms[j].a[i];
    }
    return m;
}

DenseOperator HamiltonianPath::at(double x) const {
    DenseOperator m = matrix_at(cd(x));
    if (hermiticity_defect(m) > 1e-8) {
        throw ContractError("path: H(x) is not hermitian at x = " +
                            std::to_string(x));
    }
    m.kind = OpKind::hermitian;
    return m;
}

DenseOperator HamiltonianPath::derivative_at(double x) const {
    if (coeffs.size() != terms.size() || terms.empty()) {
        throw ShapeError("path: coefficient/term count mismatch");
    }
    const std::size_t d = dim();
    DenseOperator m(d, OpKind::general);
    for (std::size_t j = 0; j < terms.size(); ++j) {
        const cd a = coeffs[j].df(cd(x));
        if (std::abs(a.imag()) > 1e-10) {
            throw ContractError(
                "path: coefficient derivative is complex on the real axis");
        }
        for (std::size_t i = 0; i < d * d; ++i) m.a[i] += a * terms[j].a[i];
    }
    if (hermiticity_defect(m) > 1e-8) {
        throw ContractError("path: dH/dx is not hermitian at x = " +
                            std::to_string(x));
    }
    m.kind = OpKind::hermitian;
    return m;
}

double HamiltonianPath::max_derivative_norm(int samples) const {
    if (samples < 2) throw ArgumentError("path: need at least 2 samples");
    double best = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double x = -1.0 + 2.0 * i / (samples - 1);
        const SpectralData sd = exact_eigensolve(derivative_at(x));
        const double lo = std::abs(sd.eigenvalues.front());
        const double hi = std::abs(sd.eigenvalues.back());
        best = std::max(best, std::max(lo, hi));
    }
    return best;
}

double HamiltonianPath::min_gap(int samples) const {
    if (samples < 2) throw ArgumentError("path: need at least 2 samples");
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        const double x = -1.0 + 2.0 * i / (samples - 1);
        const SpectralData sd = exact_eigensolve(at(x));
        worst = std::min(worst, sd.gap);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Ground-state preparation.
// ---------------------------------------------------------------------------

GroundStatePrep ground_state_prep(const DenseOperator& h,
                                  const GroundStateOptions& opts) {
    const SpectralData sd = exact_eigensolve(h);
    if (sd.gap < 1e-8) {
        throw GapError("ground state is degenerate within tolerance (gap " +
                       std::to_string(sd.gap) + ")");
    }
    std::vector<cd> ground(h.dim);
    for (std::size_t i = 0; i < h.dim; ++i) ground[i] = sd.eigenvectors.at(i, 0);

    long long ref = opts.reference_basis_state;
    if (ref < 0) {
        std::size_t best = 0;
        double best_mag = -1.0;
        for (std::size_t i = 0; i < ground.size(); ++i) {
            const double mag = std::abs(ground[i]);
            if (mag > best_mag + 1e-15) {
                best_mag = mag;
                best = i;
            }
        }
        ref = static_cast<long long>(best);
    }
    if (ref >= static_cast<long long>(h.dim)) {
        throw RangeError("reference basis state out of range");
    }
    const double overlap = std::abs(ground[static_cast<std::size_t>(ref)]);
    if (overlap < 1e-12) {
        throw OverlapError(
            "reference basis state has no overlap with the ground state");
    }

    double alpha_norm = opts.alpha_norm;
    if (alpha_norm == 0.0) {
        alpha_norm = std::max(std::abs(sd.eigenvalues.front()),
                              std::abs(sd.eigenvalues.back()));
    }
    if (!(alpha_norm > 0.0)) {
        throw ArgumentError("block-encoding normalization must be positive");
    }

    GroundStatePrep out;
    out.ground_energy = sd.ground_energy;
    out.gap = sd.gap;
    out.ground_state = ground;
    out.block_counter = make_counter("hamiltonian_block_encoding");
    out.cost.alpha_norm = alpha_norm;
    out.cost.gap = sd.gap;
    out.cost.overlap = overlap;
    out.cost.queries_per_preparation = std::max(
        1LL, static_cast<long long>(
                 std::ceil(alpha_norm / (overlap * sd.gap) - 1e-9)));
    out.cost.phase_bits = std::max(
        1, static_cast<int>(std::ceil(std::log2(alpha_norm / sd.gap) - 1e-9)));
    out.cost.eps_psi = opts.eps_psi;

    if ((h.dim & (h.dim - 1)) != 0) {
        throw ShapeError("hamiltonian dimension is not a power of two");
    }
    ChargeSet fanout;
    fanout.add(out.block_counter, out.cost.queries_per_preparation);
    out.oracle = StatePrepOracle(prep_unitary(ground), "state_prep",
                                 std::move(fanout));
    return out;
}

ObservableEstimate measure_one_body_on_ground_state(const ObservableJob& job,
                                                    const AeConfig& cfg,
                                                    Rng& rng) {
    if (job.observable.n_orbitals == 0) {
        throw ArgumentError("observable has no orbitals");
    }
    const std::size_t d = std::size_t{1} << job.observable.n_orbitals;
    if (job.hamiltonian.dim != d) {
        throw ShapeError("hamiltonian dimension does not match the "
                         "observable's orbital count");
    }

    const GroundStatePrep gsp = ground_state_prep(job.hamiltonian, job.ground);
    const std::vector<PauliString> strings =
        jordan_wigner_one_body(job.observable);
    const ProjectorSum sum = projector_decomposition(strings);

    ObservableEstimate out;
    out.cost = gsp.cost;
    out.ground_energy = gsp.ground_energy;
    {
        const DenseOperator a = one_body_matrix(job.observable);
        const std::vector<cd> av = apply(a, gsp.ground_state);
        out.exact_value = kernels::vdot(gsp.ground_state.data(), av.data(),
                                        av.size())
                              .real();
    }
    out.priors = auto_priors(sum, gsp.oracle, job.epsilon, job.mu_cap,
                             job.residual_ceiling);
    out.estimate = estimate_with_classical_priors(
        sum, gsp.oracle, out.priors.classical, out.priors.priors, job.epsilon,
        job.failure_probability, cfg, rng);
    return out;
}

// ---------------------------------------------------------------------------
// Built-ins.
// ---------------------------------------------------------------------------

OneBodyOperator builtin_one_body(unsigned n_orbitals) {
    if (n_orbitals == 0) throw ArgumentError("builtin one-body: no orbitals");
    std::vector<double> a(std::size_t{n_orbitals} * n_orbitals, 0.0);
    for (unsigned p = 0; p < n_orbitals; ++p) {
        a[p * n_orbitals + p] = 0.20 + 0.05 * p;
        if (p + 1 < n_orbitals) {
            const double t = 0.15 + 0.02 * p;
            a[p * n_orbitals + (p + 1)] = t;
            a[(p + 1) * n_orbitals + p] = t;
        }
    }
    return make_one_body(n_orbitals, std::move(a));
}

DenseOperator builtin_hamiltonian(unsigned n_orbitals) {
    if (n_orbitals == 0) throw ArgumentError("builtin hamiltonian: empty");
    std::vector<double> t(std::size_t{n_orbitals} * n_orbitals, 0.0);
    for (unsigned p = 0; p < n_orbitals; ++p) {
        // Staggered on-site energies with one clearly lowest mode, plus a
        // weak hop; keeps the gap wide and the ground state close to one
        // occupation basis state.
        t[p * n_orbitals + p] = (p == 0) ? -1.0 : 0.7 + 0.3 * p;
        if (p + 1 < n_orbitals) {
            t[p * n_orbitals + (p + 1)] = 0.2;
            t[(p + 1) * n_orbitals + p] = 0.2;
        }
    }
    return one_body_matrix(make_one_body(n_orbitals, std::move(t)));
}

HamiltonianPath builtin_path() {
    HamiltonianPath path;
    auto pauli = [](std::initializer_list<std::uint8_t> codes) {
        PauliString s;
        s.codes.assign(codes.begin(), codes.end());
        return s.matrix();
    };
    path.terms.push_back(pauli({3, 0}));  // Z on qubit 0
    path.terms.push_back(pauli({0, 3}));  // Z on qubit 1
    path.terms.push_back(pauli({1, 0}));  // X on qubit 0
    path.terms.push_back(pauli({0, 1}));  // X on qubit 1
    path.terms.push_back(pauli({3, 3}));  // Z Z
    // The transverse coupling stays strictly positive across the stretch, so
    // the X projector expectations keep a wide margin below 1/2 and the
    // propagated probability ceilings stay inside the valid regime at every
    // node; only the X terms carry a gradient.
    path.coeffs.push_back(PathCoefficient::constant(-1.0));
    path.coeffs.push_back(PathCoefficient::constant(-0.55));
    path.coeffs.push_back(PathCoefficient::affine(0.35, 0.08));
    path.coeffs.push_back(PathCoefficient::affine(0.35, 0.08));
    path.coeffs.push_back(PathCoefficient::constant(0.15));
    return path;
}

}  // namespace aae
