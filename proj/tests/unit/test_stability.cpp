#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "random_systems.hpp"
#include "syncstab/analysis.hpp"
#include "syncstab/stability.hpp"

using namespace syncstab;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kW0 = 2 * std::numbers::pi * 50;
const PllGains kGains{6.5, 15782};
const double kRootHz = std::sqrt(kGains.ki * kGains.ki / (kGains.ki - kGains.kp * kGains.kp)) / (2 * std::numbers::pi);

SystemSpec single(double l, double p, double q) {
    SystemSpec s;
    s.nodes = {"g", "a"};
    s.slack_node = "g";
    s.branches = {{"g", "a", l}};
    s.converters = {{"V", "a", kGains}};
    s.cases = {{"", {{"V", p, q}}}};
    s.options.flat_voltage = true;
    return s;
}

PipelineResult run_random(const testing::RandomSystem& sys, int points = 1200) {
    SystemSpec s = sys.spec;
    s.options.scan_points = points;
    return Analyzer(s).run(sys.p, sys.q);
}

Analyzer paper() { return Analyzer(load_system_spec(std::string(SYNCSTAB_CONFIG_DIR) + "/paper_testsystem.cfg")); }

}  // namespace

TEST_CASE("verdict bands", "[stability]") {
    CHECK(classify(0.0011) == Verdict::Stable);
    CHECK(classify(-0.0011) == Verdict::Unstable);
    CHECK(classify(0.0009) == Verdict::Marginal);
    CHECK(classify(-0.001) == Verdict::Marginal);
    CHECK(to_string(Verdict::NoCrossing) == "NoCrossing");
}

TEST_CASE("active-only systems cross where the converter spring vanishes", "[stability]") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 20; ++t) {
        auto sys = testing::random_system(rng, {.max_converters = 5});
        std::fill(sys.q.begin(), sys.q.end(), 0.0);
        const PipelineResult r = run_random(sys);
        for (const auto& s : r.report.per_subsystem) {
            REQUIRE(s.crossings.size() == 1);
            CHECK_THAT(s.crossings[0].f_hz, WithinAbs(kRootHz, 2e-4));
        }
    }
}

TEST_CASE("no sign change means no crossing", "[stability]") {
    SystemSpec s = single(0.2, 0.5, 0.0);
    s.options.scan_fmin_hz = 1.0;
    s.options.scan_fmax_hz = 5.0;
    const PipelineResult r = Analyzer(s).run({0.5}, {0.0});
    CHECK(r.report.per_subsystem.at(0).crossings.empty());
    CHECK_FALSE(r.report.critical);
    CHECK(r.report.verdict == Verdict::NoCrossing);
    REQUIRE_FALSE(r.report.notes.empty());
    CHECK(r.report.notes[0].rfind("NO_CROSSING", 0) == 0);
    CHECK_FALSE(r.weights);
}

TEST_CASE("single converter indicator is the scalar closed form", "[stability]") {
    for (double l : {0.05, 0.2, 0.45}) {
        for (double p : {-1.0, 0.3, 1.2}) {
            const PipelineResult r = Analyzer(single(l, p, 0.0)).run({p}, {0.0});
            REQUIRE(r.report.critical);
            CHECK_THAT(r.report.critical->d_net1, WithinAbs(-p * l, 1e-10));
        }
    }
}

TEST_CASE("zero-power single converter is stable by its own damping", "[stability]") {
    const PipelineResult r = Analyzer(single(0.3, 0.0, 0.0)).run({0.0}, {0.0});
    REQUIRE(r.report.critical);
    CHECK(r.report.critical->d_net1 == 0.0);
    CHECK(r.report.critical->d_con_at_c1 > 0.0);
    CHECK(r.report.verdict == Verdict::Stable);
}

TEST_CASE("critical entry is the minimal net damping and matches a fresh eigensolve", "[stability][property]") {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 40; ++t) {
        const auto sys = testing::random_system(rng, {.max_converters = 6});
        const PipelineResult r = run_random(sys);
        if (!r.report.critical) continue;
        double lowest = INFINITY;
        for (const auto& s : r.report.per_subsystem)
            for (const auto& c : s.crossings) lowest = std::min(lowest, c.net_damping);
        CHECK_THAT(r.report.critical->margin, WithinAbs(lowest, 1e-12));

        const ReducedNetwork net = reduce_network(sys.spec);
        const Eigen::VectorXcd ev = eigenpairs(build_gnet(r.report.critical->omega_c1, kW0, net, r.op)).values;
        double nearest = INFINITY;
        for (Eigen::Index i = 0; i < ev.size(); ++i) nearest = std::min(nearest, std::abs(ev(i) - r.report.critical->lambda1));
        CHECK(nearest < 1e-9);
        CHECK_THAT(r.report.critical->lambda1.real(), WithinAbs(r.report.critical->d_net1, 0.0));
    }
}

TEST_CASE("grid refinement does not move the crossing", "[stability][property]") {
    std::mt19937_64 rng(43);
    int compared = 0;
    for (int t = 0; t < 30; ++t) {
        const auto sys = testing::random_system(rng, {.max_converters = 5});
        const PipelineResult a = run_random(sys, 1200);
        const PipelineResult b = run_random(sys, 2400);
        REQUIRE(a.report.critical.has_value() == b.report.critical.has_value());
        if (!a.report.critical) continue;
        ++compared;
        CHECK(std::abs(a.report.critical->f_c1 - b.report.critical->f_c1) < 2 * sys.spec.options.root_tol_hz);
        if (std::abs(a.report.critical->margin) > kMarginalBand) CHECK(a.report.verdict == b.report.verdict);
    }
    CHECK(compared > 10);
}

TEST_CASE("raising one converter's active power does not raise D_net1", "[stability][survey]") {
    std::mt19937_64 rng(47);
    int trials = 0, violations = 0;
    for (int t = 0; t < 60; ++t) {
        const auto sys = testing::random_system(rng, {.max_converters = 5});
        const Analyzer an(sys.spec);
        const PipelineResult base = an.run(sys.p, sys.q);
        if (!base.report.critical) continue;
        for (std::size_t i = 0; i < sys.p.size(); ++i) {
            auto p = sys.p;
            p[i] += 0.1;
            const PipelineResult r = an.run(p, sys.q);
            if (!r.report.critical) continue;
            ++trials;
            if (r.report.critical->d_net1 > base.report.critical->d_net1 + 1e-12) {
                ++violations;
                WARN("D_net1 increased: trial " << t << " converter " << i << " from "
                                                << base.report.critical->d_net1 << " to "
                                                << r.report.critical->d_net1);
            }
        }
    }
    WARN("monotonicity survey: " << violations << " of " << trials << " steps increased D_net1");
    CHECK(trials > 50);
}

TEST_CASE("five-converter cases reproduce the expected verdicts", "[stability][five_converter]") {
    const Analyzer an = paper();
    const PipelineResult c1 = an.run_case("1");
    const PipelineResult c2 = an.run_case("2");
    const PipelineResult c3 = an.run_case("3");
    CHECK(c1.report.verdict == Verdict::Stable);
    CHECK(c3.report.verdict == Verdict::Unstable);
    for (const auto* r : {&c2, &c3}) {
        REQUIRE(r->report.critical);
        CHECK_THAT(r->report.critical->f_c1, WithinAbs(20.3, 1.0));
    }
    CHECK_THAT(c1.report.critical->f_c1, WithinAbs(20.0, 0.5));
    CHECK(c1.report.critical->d_net1 > c2.report.critical->d_net1);
    CHECK(c2.report.critical->d_net1 > c3.report.critical->d_net1);
}
