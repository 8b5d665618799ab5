#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "random_systems.hpp"
#include "syncstab/analysis.hpp"
#include "syncstab/modal.hpp"

using namespace syncstab;
using Catch::Matchers::WithinAbs;
using cd = std::complex<double>;

namespace {

constexpr double kW0 = 2 * std::numbers::pi * 50;
const PllGains kGains{6.5, 15782};

SystemSpec single(double l, bool flat = true) {
    SystemSpec s;
    s.nodes = {"g", "a"};
    s.slack_node = "g";
    s.branches = {{"g", "a", l}};
    s.converters = {{"V", "a", kGains}};
    s.options.flat_voltage = flat;
    return s;
}

ModalWeights weights_at(const ReducedNetwork& net, const OperatingPoint& op, double w, Eigen::Index which) {
    const Eigenpairs ep = eigenpairs(build_gnet_sym(w, kW0, net, op));
    return modal_weights(net, op, kW0, w, ep.vectors.col(which), ep.values(which));
}

}  // namespace

TEST_CASE("single converter weights", "[modal]") {
    const double l = 0.25, p = 0.8, q = 0.3;
    for (bool flat : {true, false}) {
        const Analyzer an(single(l, flat));
        const PipelineResult r = an.run({p}, {q});
        REQUIRE(r.weights);
        const double u = r.op.u_pu(0);
        const double b = 1.0 / l;
        CHECK_THAT(std::abs(r.weights->phi(0)), WithinAbs(1.0, 1e-12));
        CHECK_THAT(std::abs(r.weights->phi_b1(0)), WithinAbs(1.0 / std::sqrt(b), 1e-12));
        CHECK_THAT(r.weights->eta(0), WithinAbs(1.0 / (b * u * u), 1e-12));
        CHECK_THAT(r.report.critical->d_net1, WithinAbs(-p / (b * u * u), 1e-10));
        REQUIRE(r.sensitivities);
        CHECK_THAT(r.sensitivities->dd_dp(0), WithinAbs(-1.0 / (b * u * u), 1e-12));
        CHECK(r.sensitivities->dd_dq(0) == 0.0);
        CHECK(r.sensitivities->dominant == 0);
    }
}

TEST_CASE("weighted-sum identities hold on random systems", "[modal][property]") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> fd(1.0, 60.0);
    std::uniform_real_distribution<double> ud(0.9, 1.1);
    for (int t = 0; t < 100; ++t) {
        const auto sys = testing::random_system(rng);
        const ReducedNetwork net = reduce_network(sys.spec);
        std::vector<double> u(sys.p.size());
        for (auto& v : u) v = ud(rng);
        const auto op = OperatingPoint::make(sys.p, sys.q, u);
        const double w = 2 * std::numbers::pi * fd(rng);
        for (Eigen::Index j = 0; j < op.size(); ++j) {
            const ModalWeights m = weights_at(net, op, w, j);
            CHECK_THAT(m.phi.squaredNorm(), WithinAbs(1.0, 1e-12));
            CHECK(m.eta.minCoeff() >= 0.0);
            CHECK_THAT((m.phi_b1.adjoint() * net.b_matrix * m.phi_b1)(0, 0).real(), WithinAbs(1.0, 1e-9));
            const double re = -m.eta.dot(op.p_pu);
            const double im = m.omega_r1 * m.eta.dot(op.q_pu);
            CHECK_THAT(re, WithinAbs(m.lambda1.real(), 1e-9));
            CHECK_THAT(im, WithinAbs(m.lambda1.imag(), 1e-9));
            // Complex-square reading reproduces lambda as a bilinear form.
            if (std::isfinite(m.eta_complex(0).real())) {
                const cd lam = -(m.eta_complex.array() * op.p_pu.array().cast<cd>()).sum() +
                               cd(0, m.omega_r1) * (m.eta_complex.array() * op.q_pu.array().cast<cd>()).sum();
                CHECK(std::abs(lam - m.lambda1) < 1e-8);
            }
        }
    }
}

TEST_CASE("weights do not depend on the eigenvector phase", "[modal][property]") {
    std::mt19937_64 rng(103);
    for (int t = 0; t < 30; ++t) {
        const auto sys = testing::random_system(rng, {.min_converters = 2});
        const ReducedNetwork net = reduce_network(sys.spec);
        const auto op = OperatingPoint::make(sys.p, sys.q, std::vector<double>(sys.p.size(), 1.0));
        const double w = 125.0;
        const Eigenpairs ep = eigenpairs(build_gnet_sym(w, kW0, net, op));
        const ModalWeights a = modal_weights(net, op, kW0, w, ep.vectors.col(0), ep.values(0));
        const Eigen::VectorXcd rotated = ep.vectors.col(0) * std::polar(1.0, 2.1);
        const ModalWeights b = modal_weights(net, op, kW0, w, rotated, ep.values(0));
        CHECK((a.eta - b.eta).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("a tracked value far from every eigenvalue is rejected", "[modal]") {
    const ReducedNetwork net = reduce_network(single(0.2));
    const auto op = OperatingPoint::make({0.5}, {0.1}, {1.0});
    Eigen::VectorXcd phi(1);
    phi(0) = 1.0;
    try {
        (void)modal_weights(net, op, kW0, 120.0, phi, cd(5.0, 0.0));
        FAIL("expected EIGPAIR_MISMATCH");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EigpairMismatch);
    }
}

TEST_CASE("sensitivity signs and dominant tie-break", "[modal]") {
    ModalWeights w;
    w.eta = Eigen::Vector4d(0.2, 0.5, 0.5, 0.1);
    const Sensitivities s = sensitivities(w);
    CHECK(s.dominant == 1);
    CHECK((s.dd_dp.array() <= 0.0).all());
    CHECK(s.dd_dq.isZero());
}

TEST_CASE("finite differences confirm the first-order sensitivity", "[modal]") {
    SECTION("single converter is exact") {
        const Analyzer an(single(0.2), {.root_tol_hz = 1e-10});
        const FiniteDifference fd = finite_difference_check(an, {0.7}, {0.2}, 0, 1e-4);
        CHECK(fd.predicted < 0.0);
        CHECK(fd.rel_err < 1e-6);
    }
    SECTION("random systems, median relative error") {
        std::mt19937_64 rng(107);
        std::vector<double> errs;
        for (int t = 0; t < 40; ++t) {
            const auto sys = testing::random_system(rng, {.max_converters = 5});
            const Analyzer an(sys.spec, {.root_tol_hz = 1e-10});
            if (!an.run(sys.p, sys.q).report.critical) continue;
            for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(sys.p.size()); ++i)
                errs.push_back(finite_difference_check(an, sys.p, sys.q, i, 1e-4).rel_err);
        }
        REQUIRE(errs.size() > 20);
        std::nth_element(errs.begin(), errs.begin() + static_cast<long>(errs.size() / 2), errs.end());
        const double median = errs[errs.size() / 2];
        WARN("finite-difference median relative error " << median << " over " << errs.size() << " samples");
        CHECK(median < 0.1);
    }
    SECTION("reactive step is reported, not assumed zero") {
        std::mt19937_64 rng(109);
        const auto sys = testing::random_system(rng, {.min_converters = 3, .max_converters = 3});
        const Analyzer an(sys.spec, {.root_tol_hz = 1e-10});
        const FiniteDifference fd = finite_difference_check_q(an, sys.p, sys.q, 0, 1e-4);
        CHECK(fd.predicted == 0.0);
        CHECK(std::isfinite(fd.measured));
    }
}

TEST_CASE("identity adjustment changes nothing", "[modal]") {
    std::mt19937_64 rng(113);
    const auto sys = testing::random_system(rng, {.min_converters = 3});
    const Analyzer an(sys.spec);
    const AdjustmentResult a = adjustment_compare(an, sys.p, sys.p, sys.q);
    CHECK(a.d_net1_after == a.d_net1_before);
    CHECK_FALSE(a.improvement);
    for (double d : a.per_converter_delta_p) CHECK(d == 0.0);
    CHECK(a.positive_inertia_before == a.positive_inertia_after);
}

TEST_CASE("single converter generation to consumption flips the indicator", "[modal]") {
    const double l = 0.3, p = 0.6;
    const Analyzer an(single(l));
    const AdjustmentResult a = adjustment_compare(an, {p}, {-p}, {0.0});
    CHECK_THAT(a.d_net1_before, WithinAbs(-p * l, 1e-10));
    CHECK_THAT(a.d_net1_after, WithinAbs(p * l, 1e-10));
    CHECK(a.improvement);
    CHECK(a.positive_inertia_before == 1);
    CHECK(a.positive_inertia_after == 0);
    CHECK(positive_inertia({1.0, -1.0, 0.0, 2.0}) == 2);
}

TEST_CASE("five-converter ranking and storage flip", "[modal][five_converter]") {
    const Analyzer an(load_system_spec(std::string(SYNCSTAB_CONFIG_DIR) + "/paper_testsystem.cfg"));
    const PipelineResult r = an.run_case("2");
    REQUIRE(r.sensitivities);
    const auto& eta = r.sensitivities->eta;
    CHECK(an.spec().converters[static_cast<std::size_t>(r.sensitivities->dominant)].name == "WTG1");
    CHECK(eta(1) > eta(0));
    CHECK(eta(0) > eta(2));

    std::vector<double> p, q, p_after;
    an.spec().case_powers(an.spec().operating_case("2"), p, q);
    an.spec().case_powers(an.spec().operating_case("scenario2"), p_after, q);
    const AdjustmentResult a = adjustment_compare(an, p, p_after, q);
    CHECK(a.improvement);
    CHECK(a.verdict_before == Verdict::Unstable);
    CHECK(a.verdict_after == Verdict::Stable);
    CHECK(a.positive_inertia_after == a.positive_inertia_before - 2);
}

TEST_CASE("generation-to-consumption survey on random systems", "[modal][survey]") {
    std::mt19937_64 rng(127);
    int trials = 0, violations = 0;
    for (int t = 0; t < 60; ++t) {
        const auto sys = testing::random_system(rng, {.min_converters = 2, .max_converters = 6});
        const Analyzer an(sys.spec);
        std::vector<double> after = sys.p;
        bool changed = false;
        for (auto& v : after)
            if (v > 0.0 && !changed) v = -v, changed = true;
        if (!changed) continue;
        try {
            const AdjustmentResult a = adjustment_compare(an, sys.p, after, sys.q);
            ++trials;
            if (!a.improvement) ++violations;
        } catch (const Error&) {
            // No crossing on one side; not a comparable trial.
        }
    }
    WARN("generation-to-consumption survey: " << violations << " of " << trials << " flips did not raise D_net1");
    CHECK(trials > 20);
}
