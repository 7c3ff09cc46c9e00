#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "aae/dense_operator.hpp"
#include "aae/errors.hpp"
#include "aae/oracles.hpp"
#include "aae/spectral.hpp"
#include "doctest.h"
#include "helpers.hpp"

using aae::cd;
using aae::DenseOperator;

TEST_CASE("charge sets multiply out correctly") {
    auto a = aae::make_counter("a");
    auto b = aae::make_counter("b");

    aae::ChargeSet base;
    base.add(a, 2);
    base.add(b, 1);

    aae::ChargeSet outer;
    outer.add(a, 1);
    outer.extend(base, 3);  // a: 1 + 3*2, b: 3*1 per application

    outer.charge(5);
    CHECK(a->count == 5 * 7);
    CHECK(b->count == 5 * 3);

    const auto scaled = base.scaled(4);
    scaled.charge();
    CHECK(a->count == 5 * 7 + 8);
    CHECK(b->count == 5 * 3 + 4);
}

TEST_CASE("counter snapshots difference by name") {
    auto a = aae::make_counter("alpha");
    auto b = aae::make_counter("beta");
    const std::vector<aae::CounterPtr> cs{a, b};
    const auto before = aae::snapshot_counters(cs);
    a->count += 10;
    b->count += 3;
    const auto after = aae::snapshot_counters(cs);
    const auto delta = aae::snapshot_delta(before, after);
    CHECK(delta.at("alpha") == 10);
    CHECK(delta.at("beta") == 3);
}

TEST_CASE("projector representations agree with their dense forms") {
    aae::Rng rng(41);
    const std::size_t dim = 8;

    const auto dense_p = aae::testing::random_projector(dim, 3, rng);
    const auto phi = aae::testing::random_amplitudes(dim, rng);

    const auto reps = std::vector<aae::ProjectorRep>{
        aae::ProjectorRep::bitmask(0b110, 0b010, dim),
        aae::ProjectorRep::dense(dense_p),
        aae::ProjectorRep::rank1(phi),
    };
    for (const auto& rep : reps) {
        const auto p = rep.projector_dense();
        CHECK(aae::idempotency_defect(p) < 1e-12);

        const auto v = aae::testing::random_amplitudes(dim, rng);
        auto projected = v;
        rep.project(projected);
        const auto want = aae::apply(p, v);
        CHECK(aae::testing::vec_max_abs_diff(projected, want) < 1e-12);

        auto reflected = v;
        rep.reflect(reflected);
        const auto r = rep.reflection_dense();
        const auto want_r = aae::apply(r, v);
        CHECK(aae::testing::vec_max_abs_diff(reflected, want_r) < 1e-12);

        // 1 - 2P is an involution.
        rep.reflect(reflected);
        CHECK(aae::testing::vec_max_abs_diff(reflected, v) < 1e-12);
    }
}

TEST_CASE("prep unitary sends the zero ket to the target") {
    aae::Rng rng(43);
    const auto target = aae::testing::random_amplitudes(16, rng);
    const auto u = aae::prep_unitary(target);
    CHECK(aae::unitarity_defect(u) < 1e-12);
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(std::abs(u.at(i, 0) - target[i]) < 1e-12);
    }
}

TEST_CASE("state preparation oracles round trip") {
    aae::Rng rng(47);
    const auto psi = aae::testing::random_state(3, rng);
    const auto prep = aae::StatePrepOracle::for_state(psi, "prep");

    CHECK(aae::testing::vec_max_abs_diff(prep.prepared_state().amps, psi.amps) <
          1e-12);

    auto v = aae::testing::random_amplitudes(8, rng);
    auto round = v;
    prep.apply(round);
    prep.apply_inverse(round);
    CHECK(aae::testing::vec_max_abs_diff(round, v) < 1e-12);

    // Simulation primitives never touch the counter.
    CHECK(prep.counter()->count == 0);
    prep.charges().charge(3);
    CHECK(prep.counter()->count == 3);
}

TEST_CASE("reflection_from_prep reflects about the prepared state") {
    aae::Rng rng(53);
    const auto psi = aae::testing::random_state(2, rng);
    const auto prep = aae::StatePrepOracle::for_state(psi, "prep");
    const auto refl = aae::reflection_from_prep(prep);

    auto v = aae::testing::random_amplitudes(4, rng);
    auto got = v;
    refl.projector().reflect(got);
    const cd ip = aae::kernels::vdot(psi.amps.data(), v.data(), 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(got[i] - (v[i] - 2.0 * ip * psi.amps[i])) < 1e-12);
    }
}

TEST_CASE("walk operator matches its dense form and inverts cleanly") {
    aae::Rng rng(59);
    const std::size_t dim = 16;
    const auto p = aae::testing::random_projector(dim, 5, rng);
    const auto psi = aae::testing::random_state(4, rng);
    const auto prep = aae::StatePrepOracle::for_state(psi, "prep");
    const aae::ReflectionOracle r_pi(aae::ProjectorRep::dense(p), "marked");

    const auto walk = aae::make_walk(prep, r_pi);
    const auto wd = walk.to_dense();
    CHECK(aae::unitarity_defect(wd) < 1e-11);

    const auto v = aae::testing::random_amplitudes(dim, rng);
    auto applied = v;
    walk.apply(applied);
    const auto want = aae::apply(wd, v);
    CHECK(aae::testing::vec_max_abs_diff(applied, want) < 1e-11);

    walk.apply_inverse(applied);
    CHECK(aae::testing::vec_max_abs_diff(applied, v) < 1e-11);
}

TEST_CASE("walk eigenphases are +-2 arcsin sqrt(p)") {
    aae::Rng rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t dim = 8;
        const auto p = aae::testing::random_projector(dim, 3, rng);
        const double prob = 0.05 + 0.7 * aae::uniform01(rng);
        const auto amps =
            aae::testing::state_with_marked_probability(p, prob, rng);
        const auto prep = aae::StatePrepOracle::for_state(
            aae::state_from_amplitudes(3, amps), "prep");
        const aae::ReflectionOracle r_pi(aae::ProjectorRep::dense(p), "marked");

        auto wd = aae::make_walk(prep, r_pi).to_dense();
        wd.kind = aae::OpKind::general;
        const auto ev = aae::complex_eigenvalues(wd);

        const double theta =
            aae::kWalkPhaseFactor * std::asin(std::sqrt(prob));
        const cd plus = std::polar(1.0, theta);
        const cd minus = std::polar(1.0, -theta);
        double best_plus = 1e9, best_minus = 1e9;
        for (const auto& e : ev) {
            best_plus = std::min(best_plus, std::abs(e - plus));
            best_minus = std::min(best_minus, std::abs(e - minus));
        }
        CHECK(best_plus < 1e-10);
        CHECK(best_minus < 1e-10);
    }
}

TEST_CASE("walk charge model: plain and boosted") {
    aae::Rng rng(67);
    const auto psi = aae::testing::random_state(2, rng);
    const auto prep = aae::StatePrepOracle::for_state(psi, "state_prep");
    const aae::ReflectionOracle r_pi(
        aae::ProjectorRep::bitmask(0b01, 0b01, 4), "marked_reflection");

    const auto w = aae::make_walk(prep, r_pi);
    w.charges().charge(10);
    CHECK(prep.counter()->count == 20);   // 2 preps per application
    CHECK(r_pi.counter()->count == 10);   // 1 reflection per application

    prep.counter()->count = 0;
    r_pi.counter()->count = 0;
    const int mu = 3;
    const auto bw = aae::make_boosted_walk(prep, r_pi, mu);
    bw.charges().charge(1);
    CHECK(prep.counter()->count == 2 * mu + 2);
    CHECK(r_pi.counter()->count == mu + 1);

    // The boosted axis is W^mu applied to the plain axis.
    auto axis = w.axis();
    for (int i = 0; i < mu; ++i) w.apply(axis);
    CHECK(aae::testing::vec_max_abs_diff(axis, bw.axis()) < 1e-11);
}

TEST_CASE("block encoding reproduces A / alpha") {
    aae::Rng rng(71);
    const std::vector<double> alphas{0.7, 0.2, 1.1};
    std::vector<DenseOperator> us;
    us.push_back(aae::kron(aae::pauli_x(), aae::pauli_i()));
    us.push_back(aae::kron(aae::pauli_z(), aae::pauli_z()));
    us.push_back(DenseOperator::identity(4));

    const auto enc = aae::block_encode(alphas, us);
    CHECK(enc.alpha == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(aae::unitarity_defect(enc.prepare) < 1e-12);
    CHECK(aae::unitarity_defect(enc.select) < 1e-12);

    DenseOperator a = DenseOperator::zero(4, aae::OpKind::general);
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        a = aae::add(a, aae::scale(cd{alphas[j], 0.0}, us[j]));
    }
    const auto block = aae::encoded_block(enc);
    const auto want = aae::scale(cd{1.0 / enc.alpha, 0.0}, a);
    CHECK(aae::max_abs_diff(block, want) < 1e-11);
}

TEST_CASE("prepare_pi column carries the fourth roots of the weights") {
    const std::vector<double> betas{0.9, 0.1, 0.4};
    const auto prep = aae::build_prepare_pi(betas);
    CHECK(aae::unitarity_defect(prep.u) < 1e-12);

    double sqrt_sum = 0.0;
    for (double b : betas) sqrt_sum += std::sqrt(b);
    CHECK(prep.sqrt_beta_sum == doctest::Approx(sqrt_sum).epsilon(1e-12));

    // Column 0 on |k>|y>: amplitude beta_k^(1/4) / (sqrt(2) sqrt(sum)) at
    // k = i + 1 for both y values; nothing on k = 0 or unused slots.
    const std::size_t kdim = prep.u.dim / 2;
    for (std::size_t k = 0; k < kdim; ++k) {
        for (std::size_t y = 0; y < 2; ++y) {
            const cd got = prep.u.at(k * 2 + y, 0);
            if (k >= 1 && k <= betas.size()) {
                const double want = std::pow(betas[k - 1], 0.25) /
                                    (std::sqrt(2.0) * std::sqrt(sqrt_sum));
                CHECK(std::abs(got - cd{want, 0.0}) < 1e-12);
            } else {
                CHECK(std::abs(got) < 1e-12);
            }
        }
    }
}

TEST_CASE("select_pi is a hermitian involution") {
    aae::Rng rng(73);
    std::vector<aae::ReflectionOracle> refls;
    for (int i = 0; i < 3; ++i) {
        refls.emplace_back(
            aae::ProjectorRep::dense(aae::testing::random_projector(4, 2, rng)),
            "r" + std::to_string(i));
    }
    const auto sel = aae::build_select_pi(refls);
    const auto sd = sel.to_dense();
    CHECK(aae::unitarity_defect(sd) < 1e-11);
    CHECK(aae::hermiticity_defect(sd) < 1e-11);

    auto v = aae::testing::random_amplitudes(sel.layout.total_dim(), rng);
    auto twice = v;
    sel.apply(twice);
    sel.apply(twice);
    CHECK(aae::testing::vec_max_abs_diff(twice, v) < 1e-11);
}

TEST_CASE("u_pi is an involution that encodes the weighted sum") {
    aae::Rng rng(79);
    const std::vector<double> betas{0.6, 0.3};
    std::vector<aae::ReflectionOracle> refls;
    std::vector<DenseOperator> projs;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        projs.push_back(aae::testing::random_projector(4, 1, rng));
        refls.emplace_back(aae::ProjectorRep::dense(projs.back()),
                           "r" + std::to_string(i));
    }
    auto enc = aae::build_u_pi(aae::build_prepare_pi(betas),
                               aae::build_select_pi(refls));

    double sqrt_sum = 0.0;
    for (double b : betas) sqrt_sum += std::sqrt(b);
    CHECK(enc.normalization ==
          doctest::Approx(sqrt_sum * sqrt_sum).epsilon(1e-12));

    auto v = aae::testing::random_amplitudes(enc.layout.total_dim(), rng);
    auto twice = v;
    enc.apply_u_pi(twice);
    enc.apply_u_pi(twice);
    CHECK(aae::testing::vec_max_abs_diff(twice, v) < 1e-10);

    const auto ud = enc.u_pi_dense();
    CHECK(aae::unitarity_defect(ud) < 1e-10);
    CHECK(aae::hermiticity_defect(ud) < 1e-10);
}

TEST_CASE("success probability equals the normalized expectation") {
    aae::Rng rng(83);
    const std::vector<double> betas{0.8, 0.25, 0.5};
    std::vector<aae::ReflectionOracle> refls;
    std::vector<DenseOperator> projs;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        projs.push_back(aae::testing::random_projector(8, 1 + (i % 2), rng));
        refls.emplace_back(aae::ProjectorRep::dense(projs.back()),
                           "r" + std::to_string(i));
    }
    const auto psi = aae::testing::random_state(3, rng);
    const auto sys_prep = aae::StatePrepOracle::for_state(psi, "sys");

    auto enc = aae::build_u_pi(aae::build_prepare_pi(betas),
                               aae::build_select_pi(refls));
    const auto inst = aae::success_probability_instance(enc, sys_prep);

    auto v = inst.combined_prep.prepared_state().amps;
    inst.marked.projector().project(v);
    const double p_marked = aae::kernels::norm2(v.data(), v.size());

    DenseOperator a = DenseOperator::zero(8, aae::OpKind::hermitian);
    for (std::size_t j = 0; j < betas.size(); ++j) {
        a = aae::add(a, aae::scale(cd{betas[j], 0.0}, projs[j]));
    }
    a.kind = aae::OpKind::hermitian;  // scaling demotes the tag
    const double expect = aae::expectation_value(psi, a);
    CHECK(p_marked ==
          doctest::Approx(expect / inst.normalization).epsilon(1e-10));
}

TEST_CASE("projector sums assemble their matrix") {
    aae::Rng rng(89);
    aae::ProjectorSum sum;
    sum.offset = 0.4;

    aae::ProjectorGroup plus;
    plus.sign = +1;
    plus.betas = {0.5, 0.2};
    aae::ProjectorGroup minus;
    minus.sign = -1;
    minus.betas = {0.3};

    std::vector<DenseOperator> projs;
    for (int i = 0; i < 3; ++i) {
        projs.push_back(aae::testing::random_projector(4, 1, rng));
    }
    plus.reflections.emplace_back(aae::ProjectorRep::dense(projs[0]), "p0");
    plus.reflections.emplace_back(aae::ProjectorRep::dense(projs[1]), "p1");
    minus.reflections.emplace_back(aae::ProjectorRep::dense(projs[2]), "m0");
    sum.groups = {plus, minus};

    CHECK(sum.system_dim() == 4);

    DenseOperator want = aae::scale(cd{0.4, 0.0}, DenseOperator::identity(4));
    want = aae::add(want, aae::scale(cd{0.5, 0.0}, projs[0]));
    want = aae::add(want, aae::scale(cd{0.2, 0.0}, projs[1]));
    want = aae::add(want, aae::scale(cd{-0.3, 0.0}, projs[2]));
    CHECK(aae::max_abs_diff(sum.to_matrix(), want) < 1e-12);
}
