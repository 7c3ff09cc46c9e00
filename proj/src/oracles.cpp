#include "aae/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "aae/errors.hpp"
#include "aae/kernels.hpp"

namespace aae {

namespace {

constexpr double kStructureTol = 1e-10;

unsigned log2_exact(std::size_t d, const char* what) {
    if (d == 0 || (d & (d - 1)) != 0) {
        throw ShapeError(std::string(what) + " dimension " +
                         std::to_string(d) + " is not a power of two");
    }
    unsigned w = 0;
    while ((std::size_t{1} << w) < d) ++w;
    return w;
}

unsigned ceil_log2(std::size_t x) {
    unsigned w = 0;
    while ((std::size_t{1} << w) < x) ++w;
    return w;
}

void require_normalized(const std::vector<cd>& v, const char* what) {
    const double n2 = kernels::norm2(v.data(), v.size());
    if (std::abs(n2 - 1.0) > kStructureTol) {
        throw ArgumentError(std::string(what) + " is not normalized (|v|^2 = " +
                            std::to_string(n2) + ")");
    }
}

// Completes a unit vector to a unitary whose first column is that vector.
// Householder reflection against e0, with a global phase so complex leading
// entries work too.
DenseOperator unitary_with_first_column(const std::vector<cd>& v) {
    const std::size_t n = v.size();
    require_normalized(v, "target column");
    double theta = 0.0;
    if (std::abs(v[0]) > 0.0) theta = std::arg(v[0]);
    const cd phase = std::polar(1.0, theta);
    std::vector<cd> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::conj(phase) * v[i];
    w[0] -= 1.0;
    double ww = 0.0;
    for (const cd& x : w) ww += std::norm(x);
    DenseOperator u(n, OpKind::unitary);
    if (ww < 1e-24) {
        for (std::size_t i = 0; i < n; ++i) u.at(i, i) = phase;
        return u;
    }
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            cd e = (r == c) ? cd(1.0) : cd(0.0);
            u.at(r, c) = phase * (e - 2.0 * w[r] * std::conj(w[c]) / ww);
        }
    }
    return u;
}

// Applies u (dim R) to the register r of composite index (a*R + r)*inner + b,
// for every (a, b) slice.
template <class SliceFn>
void for_each_register_slice(std::vector<cd>& v, std::size_t reg_dim,
                             std::size_t inner, SliceFn&& fn) {
    const std::size_t total = v.size();
    const std::size_t outer = total / (reg_dim * inner);
    std::vector<cd> slice(reg_dim);
    for (std::size_t a = 0; a < outer; ++a) {
        const std::size_t base = a * reg_dim * inner;
        for (std::size_t b = 0; b < inner; ++b) {
            for (std::size_t r = 0; r < reg_dim; ++r) {
                slice[r] = v[base + r * inner + b];
            }
            fn(slice);
            for (std::size_t r = 0; r < reg_dim; ++r) {
                v[base + r * inner + b] = slice[r];
            }
        }
    }
}

void apply_dense_on_register(std::vector<cd>& v, const DenseOperator& u,
                             std::size_t inner, bool adjoint_of_u) {
    const DenseOperator& m = u;
    DenseOperator ad;
    const DenseOperator* op = &m;
    if (adjoint_of_u) {
        ad = adjoint(u);
        op = &ad;
    }
    std::vector<cd> out(op->dim);
    for_each_register_slice(v, op->dim, inner, [&](std::vector<cd>& slice) {
        kernels::matvec(op->a.data(), slice.data(), out.data(), op->dim);
        slice = out;
    });
}

}  // namespace

// ---------------------------------------------------------------------------
// Counters.
// ---------------------------------------------------------------------------

CounterPtr make_counter(std::string name) {
    auto c = std::make_shared<QueryCounter>();
    c->name = std::move(name);
    return c;
}

void ChargeSet::add(CounterPtr counter, long long per_application) {
    if (!counter) throw ArgumentError("null counter in charge set");
    for (auto& [c, per] : items) {
        if (c == counter) {
            per += per_application;
            return;
        }
    }
    items.emplace_back(std::move(counter), per_application);
}

void ChargeSet::extend(const ChargeSet& other, long long factor) {
    for (const auto& [c, per] : other.items) add(c, per * factor);
}

ChargeSet ChargeSet::scaled(long long factor) const {
    ChargeSet out;
    for (const auto& [c, per] : items) out.add(c, per * factor);
    return out;
}

void ChargeSet::charge(long long times) const {
    for (const auto& [c, per] : items) c->count += per * times;
}

std::vector<CounterPtr> ChargeSet::counters() const {
    std::vector<CounterPtr> out;
    out.reserve(items.size());
    for (const auto& [c, per] : items) out.push_back(c);
    return out;
}

QuerySnapshot snapshot_counters(std::span<const CounterPtr> counters) {
    QuerySnapshot out;
    for (const auto& c : counters) {
        if (c) out[c->name] += c->count;
    }
    return out;
}

QuerySnapshot snapshot_delta(const QuerySnapshot& before,
                             const QuerySnapshot& after) {
    QuerySnapshot out;
    for (const auto& [name, n] : after) {
        auto it = before.find(name);
        const long long b = (it == before.end()) ? 0 : it->second;
        if (n - b != 0) out[name] = n - b;
    }
    for (const auto& [name, b] : before) {
        if (!after.count(name) && b != 0) out[name] = -b;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Projector representations.
// ---------------------------------------------------------------------------

ProjectorRep ProjectorRep::bitmask(std::uint64_t mask, std::uint64_t value,
                                   std::size_t dim) {
    if ((value & ~mask) != 0) {
        throw ArgumentError("mask projector: value has bits outside the mask");
    }
    if (dim == 0) throw ShapeError("mask projector: empty dimension");
    ProjectorRep p;
    p.rep_ = BitmaskProjector{mask, value, dim};
    return p;
}

ProjectorRep ProjectorRep::dense(DenseOperator pi) {
    if (pi.kind != OpKind::projector && pi.kind != OpKind::hermitian) {
        throw ArgumentError("dense projector: operator kind must be projector "
                            "or hermitian");
    }
    if (hermiticity_defect(pi) > kStructureTol) {
        throw ArgumentError("dense projector: matrix is not hermitian");
    }
    if (idempotency_defect(pi) > kStructureTol) {
        throw ArgumentError("dense projector: matrix is not idempotent");
    }
    pi.kind = OpKind::projector;
    ProjectorRep p;
    p.rep_ = std::move(pi);
    return p;
}

ProjectorRep ProjectorRep::rank1(std::vector<cd> phi) {
    require_normalized(phi, "rank-1 projector state");
    ProjectorRep p;
    p.rep_ = std::move(phi);
    return p;
}

std::size_t ProjectorRep::dim() const {
    if (const auto* b = std::get_if<BitmaskProjector>(&rep_)) return b->dim;
    if (const auto* d = std::get_if<DenseOperator>(&rep_)) return d->dim;
    return std::get<std::vector<cd>>(rep_).size();
}

void ProjectorRep::project(std::vector<cd>& v) const {
    if (v.size() != dim()) throw ShapeError("projector/vector dim mismatch");
    if (const auto* b = std::get_if<BitmaskProjector>(&rep_)) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if ((i & b->mask) != b->value) v[i] = 0.0;
        }
        return;
    }
    if (const auto* d = std::get_if<DenseOperator>(&rep_)) {
        std::vector<cd> out(v.size());
        kernels::matvec(d->a.data(), v.data(), out.data(), v.size());
        v = std::move(out);
        return;
    }
    const auto& phi = std::get<std::vector<cd>>(rep_);
    const cd c = kernels::vdot(phi.data(), v.data(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = c * phi[i];
}

void ProjectorRep::reflect(std::vector<cd>& v) const {
    if (v.size() != dim()) throw ShapeError("projector/vector dim mismatch");
    if (const auto* b = std::get_if<BitmaskProjector>(&rep_)) {
        kernels::flip_sign_masked(v.data(), v.size(), b->mask, b->value);
        return;
    }
    if (const auto* d = std::get_if<DenseOperator>(&rep_)) {
        std::vector<cd> pv(v.size());
        kernels::matvec(d->a.data(), v.data(), pv.data(), v.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= 2.0 * pv[i];
        return;
    }
    const auto& phi = std::get<std::vector<cd>>(rep_);
    kernels::reflect_about_state(v.data(), phi.data(), v.size());
}

DenseOperator ProjectorRep::projector_dense() const {
    if (const auto* b = std::get_if<BitmaskProjector>(&rep_)) {
        DenseOperator p(b->dim, OpKind::projector);
        for (std::size_t i = 0; i < b->dim; ++i) {
            if ((i & b->mask) == b->value) p.at(i, i) = 1.0;
        }
        return p;
    }
    if (const auto* d = std::get_if<DenseOperator>(&rep_)) return *d;
    const auto& phi = std::get<std::vector<cd>>(rep_);
    DenseOperator p(phi.size(), OpKind::projector);
    for (std::size_t r = 0; r < phi.size(); ++r) {
        for (std::size_t c = 0; c < phi.size(); ++c) {
            p.at(r, c) = phi[r] * std::conj(phi[c]);
        }
    }
    return p;
}

DenseOperator ProjectorRep::reflection_dense() const {
    DenseOperator r = subtract(DenseOperator::identity(dim()),
                               scale(2.0, projector_dense()));
    r.kind = OpKind::unitary;
    return r;
}

ReflectionOracle::ReflectionOracle(ProjectorRep rep, std::string name)
    : rep_(std::move(rep)), counter_(make_counter(std::move(name))) {}

// ---------------------------------------------------------------------------
// State preparation.
// ---------------------------------------------------------------------------

namespace {

class DensePrepImpl final : public PrepImpl {
  public:
    explicit DensePrepImpl(DenseOperator u) : u_(std::move(u)) {
        if (unitarity_defect(u_) > kStructureTol) {
            throw ArgumentError("state prep oracle: matrix is not unitary");
        }
        u_.kind = OpKind::unitary;
        u_dag_ = adjoint(u_);
    }

    std::size_t dim() const override { return u_.dim; }

    void apply(std::vector<cd>& v) const override {
        std::vector<cd> out(v.size());
        kernels::matvec(u_.a.data(), v.data(), out.data(), v.size());
        v = std::move(out);
    }

    void apply_inverse(std::vector<cd>& v) const override {
        std::vector<cd> out(v.size());
        kernels::matvec(u_dag_.a.data(), v.data(), out.data(), v.size());
        v = std::move(out);
    }

  private:
    DenseOperator u_;
    DenseOperator u_dag_;
};

}  // namespace

StatePrepOracle::StatePrepOracle(DenseOperator u, std::string name)
    : impl_(std::make_shared<DensePrepImpl>(std::move(u))),
      counter_(make_counter(std::move(name))) {
    charges_.add(counter_, 1);
}

StatePrepOracle::StatePrepOracle(DenseOperator u, std::string name,
                                 ChargeSet extra_fanout)
    : impl_(std::make_shared<DensePrepImpl>(std::move(u))),
      counter_(make_counter(std::move(name))) {
    charges_.add(counter_, 1);
    charges_.extend(extra_fanout);
}

StatePrepOracle::StatePrepOracle(std::shared_ptr<const PrepImpl> impl,
                                 std::string name, ChargeSet fanout)
    : impl_(std::move(impl)), counter_(make_counter(std::move(name))) {
    if (!impl_) throw ArgumentError("state prep oracle: null implementation");
    charges_.add(counter_, 1);
    charges_.extend(fanout);
}

StatePrepOracle StatePrepOracle::for_state(const StateVector& psi,
                                           std::string name) {
    return StatePrepOracle(unitary_with_first_column(psi.amps),
                           std::move(name));
}

std::size_t StatePrepOracle::dim() const {
    if (!impl_) throw ArgumentError("state prep oracle: empty");
    return impl_->dim();
}

void StatePrepOracle::apply(std::vector<cd>& v) const {
    if (!impl_) throw ArgumentError("state prep oracle: empty");
    if (v.size() != impl_->dim()) throw ShapeError("prep/vector dim mismatch");
    impl_->apply(v);
}

void StatePrepOracle::apply_inverse(std::vector<cd>& v) const {
    if (!impl_) throw ArgumentError("state prep oracle: empty");
    if (v.size() != impl_->dim()) throw ShapeError("prep/vector dim mismatch");
    impl_->apply_inverse(v);
}

StateVector StatePrepOracle::prepared_state() const {
    const std::size_t d = dim();
    const unsigned n = log2_exact(d, "state prep");
    std::vector<cd> v(d, cd(0.0));
    v[0] = 1.0;
    impl_->apply(v);
    return state_from_amplitudes(n, v, false);
}

DenseOperator StatePrepOracle::to_dense() const {
    const std::size_t d = dim();
    DenseOperator u(d, OpKind::unitary);
    std::vector<cd> v(d);
    for (std::size_t col = 0; col < d; ++col) {
        std::fill(v.begin(), v.end(), cd(0.0));
        v[col] = 1.0;
        impl_->apply(v);
        for (std::size_t r = 0; r < d; ++r) u.at(r, col) = v[r];
    }
    return u;
}

ReflectionOracle reflection_from_prep(const StatePrepOracle& prep) {
    return ReflectionOracle(ProjectorRep::rank1(prep.prepared_state().amps),
                            prep.counter()->name + ".reflection");
}

DenseOperator prep_unitary(const std::vector<cd>& target) {
    return unitary_with_first_column(target);
}

// ---------------------------------------------------------------------------
// Walks.
// ---------------------------------------------------------------------------

Walk::Walk(std::vector<cd> axis, ProjectorRep marked, ChargeSet charges,
           int mu)
    : axis_(std::move(axis)),
      marked_(std::move(marked)),
      charges_(std::move(charges)),
      mu_(mu) {
    if (axis_.size() != marked_.dim()) {
        throw ShapeError("walk: axis and marked projector dim mismatch");
    }
    require_normalized(axis_, "walk axis");
}

void Walk::apply(std::vector<cd>& v) const {
    if (v.size() != axis_.size()) throw ShapeError("walk/vector dim mismatch");
    marked_.reflect(v);
    const cd c = kernels::vdot(axis_.data(), v.data(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = 2.0 * c * axis_[i] - v[i];
    }
}

void Walk::apply_inverse(std::vector<cd>& v) const {
    if (v.size() != axis_.size()) throw ShapeError("walk/vector dim mismatch");
    const cd c = kernels::vdot(axis_.data(), v.data(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = 2.0 * c * axis_[i] - v[i];
    }
    marked_.reflect(v);
}

DenseOperator Walk::to_dense() const {
    const std::size_t d = dim();
    DenseOperator w(d, OpKind::unitary);
    std::vector<cd> v(d);
    for (std::size_t col = 0; col < d; ++col) {
        std::fill(v.begin(), v.end(), cd(0.0));
        v[col] = 1.0;
        apply(v);
        for (std::size_t r = 0; r < d; ++r) w.at(r, col) = v[r];
    }
    return w;
}

Walk make_walk(const StatePrepOracle& prep, const ReflectionOracle& r_pi) {
    if (prep.dim() != r_pi.dim()) {
        throw ShapeError("walk: prep and reflection dim mismatch");
    }
    ChargeSet charges = prep.charges().scaled(2);
    charges.add(r_pi.counter(), 1);
    return Walk(prep.prepared_state().amps, r_pi.projector(),
                std::move(charges), 0);
}

Walk make_boosted_walk(const StatePrepOracle& prep,
                       const ReflectionOracle& r_pi, int mu) {
    if (mu < 0) throw ArgumentError("boosted walk: mu must be >= 0");
    const Walk base = make_walk(prep, r_pi);
    std::vector<cd> axis = base.axis();
    for (int i = 0; i < mu; ++i) base.apply(axis);
    ChargeSet charges = prep.charges().scaled(2 * mu + 2);
    charges.add(r_pi.counter(), mu + 1);
    return Walk(std::move(axis), r_pi.projector(), std::move(charges), mu);
}

// ---------------------------------------------------------------------------
// Block encoding.
// ---------------------------------------------------------------------------

BlockEncodedOperator block_encode(std::span<const double> alphas,
                                  std::span<const DenseOperator> unitaries) {
    if (alphas.empty() || alphas.size() != unitaries.size()) {
        throw ArgumentError("block encoding: weight/unitary count mismatch");
    }
    double alpha = 0.0;
    for (const double a : alphas) {
        if (!(a > 0.0)) {
            throw ArgumentError("block encoding: weights must be positive");
        }
        alpha += a;
    }
    const std::size_t d = unitaries[0].dim;
    for (const auto& u : unitaries) {
        if (u.dim != d) throw ShapeError("block encoding: mixed dimensions");
        if (unitarity_defect(u) > kStructureTol) {
            throw ArgumentError("block encoding: term is not unitary");
        }
    }
    const std::size_t j_count = alphas.size();
    const unsigned anc_width = ceil_log2(j_count);
    const std::size_t anc_dim = std::size_t{1} << anc_width;

    std::vector<cd> col(anc_dim, cd(0.0));
    for (std::size_t j = 0; j < j_count; ++j) {
        col[j] = std::sqrt(alphas[j] / alpha);
    }
    BlockEncodedOperator enc;
    enc.prepare = unitary_with_first_column(col);
    enc.select = DenseOperator(anc_dim * d, OpKind::unitary);
    for (std::size_t j = 0; j < anc_dim; ++j) {
        const DenseOperator& u =
            (j < j_count) ? unitaries[j] : DenseOperator::identity(d);
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t c = 0; c < d; ++c) {
                enc.select.at(j * d + r, j * d + c) = u.at(r, c);
            }
        }
    }
    const DenseOperator prep_full =
        kron(enc.prepare, DenseOperator::identity(d));
    enc.u_a = multiply(adjoint(prep_full), multiply(enc.select, prep_full));
    enc.u_a.kind = OpKind::unitary;
    enc.alpha = alpha;
    enc.ancilla_dim = anc_dim;
    enc.system_dim = d;
    enc.prepare_counter = make_counter("block_prepare");
    enc.select_counter = make_counter("block_select");
    return enc;
}

DenseOperator encoded_block(const BlockEncodedOperator& enc) {
    DenseOperator b(enc.system_dim, OpKind::general);
    for (std::size_t r = 0; r < enc.system_dim; ++r) {
        for (std::size_t c = 0; c < enc.system_dim; ++c) {
            b.at(r, c) = enc.u_a.at(r, c);
        }
    }
    return b;
}

// ---------------------------------------------------------------------------
// Square-root encoding.
// ---------------------------------------------------------------------------

PreparePi build_prepare_pi(std::span<const double> betas) {
    if (betas.empty()) throw ArgumentError("prepare: no weights");
    double sqrt_sum = 0.0;
    for (const double b : betas) {
        if (!(b >= 0.0)) throw ArgumentError("prepare: negative weight");
        sqrt_sum += std::sqrt(b);
    }
    if (!(sqrt_sum > 0.0)) {
        throw ArgumentError("prepare: all weights vanish");
    }
    const std::size_t k_count = betas.size();
    const unsigned k_width = ceil_log2(k_count + 1);
    const std::size_t dim = std::size_t{1} << (k_width + 1);

    std::vector<cd> col(dim, cd(0.0));
    const double denom = std::sqrt(2.0) * std::sqrt(sqrt_sum);
    for (std::size_t i = 0; i < k_count; ++i) {
        const double amp = std::pow(betas[i], 0.25) / denom;
        const std::size_t k = i + 1;
        col[k * 2 + 0] = amp;
        col[k * 2 + 1] = amp;
    }
    PreparePi out;
    out.u = unitary_with_first_column(col);
    out.betas.assign(betas.begin(), betas.end());
    out.sqrt_beta_sum = sqrt_sum;
    out.k_width = k_width;
    out.counter = make_counter("prepare_pi");
    return out;
}

SelectPi build_select_pi(std::span<const ReflectionOracle> reflections,
                         unsigned mirror_width) {
    if (reflections.empty()) throw ArgumentError("select: no reflections");
    const std::size_t k_count = reflections.size();
    const std::size_t sys_dim = reflections[0].dim();
    for (const auto& r : reflections) {
        if (r.dim() != sys_dim) {
            throw ShapeError("select: reflections of mixed dimension");
        }
    }
    const unsigned k_width = ceil_log2(k_count + 1);
    if (mirror_width == 0) mirror_width = k_width;
    if ((std::size_t{1} << mirror_width) < k_count + 1) {
        throw ShapeError("select: mirror register too small for " +
                         std::to_string(k_count) + " terms");
    }
    SelectPi out;
    out.layout.k_width = k_width;
    out.layout.mirror_width = mirror_width;
    out.layout.system_qubits = log2_exact(sys_dim, "select system");
    out.reflections.reserve(k_count);
    for (const auto& r : reflections) {
        out.reflections.push_back(r.reflection_dense());
    }
    out.counter = make_counter("select_pi");
    return out;
}

void SelectPi::apply(std::vector<cd>& v) const {
    if (v.size() != layout.total_dim()) {
        throw ShapeError("select/vector dim mismatch");
    }
    const std::size_t k_dim = layout.k_dim();
    const std::size_t s_dim = layout.system_dim();
    const std::size_t m_dim = layout.mirror_dim();
    const std::size_t k_count = reflections.size();

    std::vector<cd> out(v.size(), cd(0.0));
    std::vector<cd> x(s_dim), y(s_dim);
    for (std::size_t k = 0; k < k_dim; ++k) {
        const bool active = (k >= 1 && k <= k_count);
        for (std::size_t ybit = 0; ybit < 2; ++ybit) {
            const double sign = (ybit == 1) ? -1.0 : 1.0;
            const std::size_t base = (k * 2 + ybit) * s_dim * m_dim;
            for (std::size_t m = 0; m < m_dim; ++m) {
                std::size_t m_out = m;
                if (active) {
                    if (m == 0) m_out = k;
                    else if (m == k) m_out = 0;
                }
                if (active && ybit == 1) {
                    const DenseOperator& r = reflections[k - 1];
                    for (std::size_t s = 0; s < s_dim; ++s) {
                        x[s] = v[base + s * m_dim + m];
                    }
                    kernels::matvec(r.a.data(), x.data(), y.data(), s_dim);
                    for (std::size_t s = 0; s < s_dim; ++s) {
                        out[base + s * m_dim + m_out] = sign * y[s];
                    }
                } else {
                    for (std::size_t s = 0; s < s_dim; ++s) {
                        out[base + s * m_dim + m_out] =
                            sign * v[base + s * m_dim + m];
                    }
                }
            }
        }
    }
    v = std::move(out);
}

DenseOperator SelectPi::to_dense() const {
    const std::size_t d = layout.total_dim();
    DenseOperator u(d, OpKind::unitary);
    std::vector<cd> v(d);
    for (std::size_t col = 0; col < d; ++col) {
        std::fill(v.begin(), v.end(), cd(0.0));
        v[col] = 1.0;
        apply(v);
        for (std::size_t r = 0; r < d; ++r) u.at(r, col) = v[r];
    }
    return u;
}

void SqrtEncoding::apply_u_pi(std::vector<cd>& v) const {
    const std::size_t inner = layout.system_dim() * layout.mirror_dim();
    apply_dense_on_register(v, prepare.u, inner, false);
    select.apply(v);
    apply_dense_on_register(v, prepare.u, inner, true);
}

DenseOperator SqrtEncoding::u_pi_dense() const {
    const std::size_t d = layout.total_dim();
    DenseOperator u(d, OpKind::unitary);
    std::vector<cd> v(d);
    for (std::size_t col = 0; col < d; ++col) {
        std::fill(v.begin(), v.end(), cd(0.0));
        v[col] = 1.0;
        apply_u_pi(v);
        for (std::size_t r = 0; r < d; ++r) u.at(r, col) = v[r];
    }
    return u;
}

SqrtEncoding build_u_pi(PreparePi prepare, SelectPi select) {
    if (prepare.k_width != select.layout.k_width) {
        throw ShapeError("encoding: prepare/select k-register mismatch");
    }
    if (prepare.betas.size() != select.reflections.size()) {
        throw ArgumentError("encoding: weight/reflection count mismatch");
    }
    SqrtEncoding enc;
    enc.layout = select.layout;
    enc.normalization = prepare.sqrt_beta_sum * prepare.sqrt_beta_sum;
    enc.prepare = std::move(prepare);
    enc.select = std::move(select);
    return enc;
}

// ---------------------------------------------------------------------------
// Success-probability instances.
// ---------------------------------------------------------------------------

namespace {

class CombinedPrepImpl final : public PrepImpl {
  public:
    CombinedPrepImpl(SqrtEncoding enc, StatePrepOracle system_prep)
        : enc_(std::move(enc)), system_prep_(std::move(system_prep)) {}

    std::size_t dim() const override { return enc_.layout.total_dim(); }

    void apply(std::vector<cd>& v) const override {
        apply_system(v, false);
        enc_.apply_u_pi(v);
    }

    void apply_inverse(std::vector<cd>& v) const override {
        enc_.apply_u_pi(v);  // involution
        apply_system(v, true);
    }

  private:
    void apply_system(std::vector<cd>& v, bool inverse) const {
        for_each_register_slice(
            v, enc_.layout.system_dim(), enc_.layout.mirror_dim(),
            [&](std::vector<cd>& slice) {
                if (inverse) system_prep_.apply_inverse(slice);
                else system_prep_.apply(slice);
            });
    }

    SqrtEncoding enc_;
    StatePrepOracle system_prep_;
};

}  // namespace

SuccessProbabilityInstance success_probability_instance(
    const SqrtEncoding& enc, const StatePrepOracle& system_prep) {
    if (system_prep.dim() != enc.layout.system_dim()) {
        throw ShapeError("instance: system prep does not match encoding");
    }
    // One combined preparation costs one system preparation plus one
    // application of U_pi, i.e. PREPARE, SELECT, PREPARE^dagger.
    ChargeSet fanout;
    fanout.extend(system_prep.charges());
    fanout.add(enc.prepare.counter, 2);
    fanout.add(enc.select.counter, 1);

    SuccessProbabilityInstance inst;
    inst.layout = enc.layout;
    inst.normalization = enc.normalization;
    inst.combined_prep = StatePrepOracle(
        std::make_shared<CombinedPrepImpl>(enc, system_prep), "combined_prep",
        std::move(fanout));
    const unsigned low = enc.layout.system_qubits + enc.layout.mirror_width;
    const std::uint64_t ky_mask =
        ((std::uint64_t{1} << (enc.layout.k_width + 1)) - 1) << low;
    inst.marked = ReflectionOracle(
        ProjectorRep::bitmask(ky_mask, 0, enc.layout.total_dim()),
        "marked_reflection");
    return inst;
}

// ---------------------------------------------------------------------------
// Projector sums.
// ---------------------------------------------------------------------------

std::size_t ProjectorSum::system_dim() const {
    for (const auto& g : groups) {
        if (!g.reflections.empty()) return g.reflections[0].dim();
    }
    return 0;
}

DenseOperator ProjectorSum::to_matrix() const {
    const std::size_t d = system_dim();
    if (d == 0) {
        throw ArgumentError("projector sum: no terms, dimension unknown");
    }
    DenseOperator m = scale(offset, DenseOperator::identity(d));
    for (const auto& g : groups) {
        if (g.betas.size() != g.reflections.size()) {
            throw ArgumentError("projector sum: weight/term count mismatch");
        }
        if (g.sign != 1 && g.sign != -1) {
            throw ArgumentError("projector sum: sign must be +1 or -1");
        }
        for (std::size_t k = 0; k < g.betas.size(); ++k) {
            if (!(g.betas[k] >= 0.0)) {
                throw ArgumentError("projector sum: negative weight");
            }
            if (g.reflections[k].dim() != d) {
                throw ShapeError("projector sum: mixed dimensions");
            }
            m = add(m, scale(g.sign * g.betas[k],
                             g.reflections[k].projector_dense()));
        }
    }
    m.kind = OpKind::hermitian;
    return m;
}

}  // namespace aae
