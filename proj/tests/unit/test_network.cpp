#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>

#include "random_systems.hpp"
#include "syncstab/network.hpp"

using namespace syncstab;
using Catch::Matchers::WithinAbs;

namespace {

SystemSpec star(double l0, double l1, double l2) {
    SystemSpec s;
    s.nodes = {"s", "h", "a", "b"};
    s.slack_node = "s";
    s.branches = {{"s", "h", l0}, {"h", "a", l1}, {"h", "b", l2}};
    s.converters = {{"A", "a", {1, 1}}, {"B", "b", {1, 1}}};
    return s;
}

}  // namespace

TEST_CASE("Laplacian has zero row sums and adds parallel branches", "[network]") {
    SystemSpec s = star(0.1, 0.2, 0.4);
    s.branches.push_back({"a", "h", 0.2});
    const NodeLaplacian lap = assemble_laplacian(s);
    CHECK(lap.node_order == s.nodes);
    for (Eigen::Index r = 0; r < lap.matrix.rows(); ++r) CHECK_THAT(lap.matrix.row(r).sum(), WithinAbs(0.0, 1e-12));
    CHECK_THAT(lap.matrix(1, 2), WithinAbs(-10.0, 1e-12));
    CHECK_THAT(lap.matrix(2, 2), WithinAbs(10.0, 1e-12));
    CHECK((lap.matrix - lap.matrix.transpose()).norm() == 0.0);
}

TEST_CASE("single line reduces to its susceptance", "[network]") {
    SystemSpec s;
    s.nodes = {"g", "a"};
    s.slack_node = "g";
    s.branches = {{"g", "a", 0.25}};
    s.converters = {{"V", "a", {1, 1}}};
    const ReducedNetwork net = reduce_network(s);
    REQUIRE(net.size() == 1);
    CHECK_THAT(net.b_matrix(0, 0), WithinAbs(4.0, 1e-12));
    CHECK_THAT(net.b_inv(0, 0), WithinAbs(0.25, 1e-12));
    CHECK_THAT(net.b_inv_sqrt(0, 0), WithinAbs(0.5, 1e-12));
    CHECK(net.converter_index.at("V") == 0);
}

TEST_CASE("star network matches the hand-eliminated hub", "[network]") {
    const double l0 = 0.1, l1 = 0.2, l2 = 0.4;
    const ReducedNetwork net = reduce_network(star(l0, l1, l2));
    const double y0 = 1 / l0, y1 = 1 / l1, y2 = 1 / l2, sum = y0 + y1 + y2;
    Eigen::Matrix2d expected;
    expected << y1 - y1 * y1 / sum, -y1 * y2 / sum, -y1 * y2 / sum, y2 - y2 * y2 / sum;
    CHECK((net.b_matrix - expected).norm() < 1e-12);
}

TEST_CASE("square-root factors are consistent", "[network]") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 50; ++t) {
        const auto sys = testing::random_system(rng);
        const ReducedNetwork net = reduce_network(sys.spec);
        const auto n = net.size();
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
        const double scale = net.b_matrix.norm() * net.b_inv.norm();
        CHECK((net.b_inv_sqrt * net.b_sqrt - id).norm() < 1e-10 * scale);
        CHECK((net.b_inv_sqrt * net.b_inv_sqrt - net.b_inv).norm() < 1e-10 * net.b_inv.norm());
        CHECK((net.b_matrix * net.b_inv - id).norm() < 1e-10 * scale);
        CHECK((net.b_inv_sqrt - net.b_inv_sqrt.transpose()).norm() == 0.0);
        // Grounded inductive networks: positive diagonal, non-positive off-diagonal.
        for (Eigen::Index i = 0; i < n; ++i) {
            CHECK(net.b_matrix(i, i) > 0.0);
            for (Eigen::Index j = 0; j < n; ++j)
                if (i != j) CHECK(net.b_matrix(i, j) <= 1e-12);
        }
    }
}

TEST_CASE("reordering converters permutes B", "[network][property]") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 100; ++t) {
        auto sys = testing::random_system(rng, {.min_converters = 2});
        const ReducedNetwork a = reduce_network(sys.spec);
        std::vector<std::size_t> perm(sys.spec.converters.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        SystemSpec shuffled = sys.spec;
        for (std::size_t i = 0; i < perm.size(); ++i) shuffled.converters[i] = sys.spec.converters[perm[i]];
        const ReducedNetwork b = reduce_network(shuffled);
        for (std::size_t i = 0; i < perm.size(); ++i)
            for (std::size_t j = 0; j < perm.size(); ++j)
                CHECK_THAT(b.b_matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                           WithinAbs(a.b_matrix(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j])),
                                     1e-9));
        for (const auto& c : shuffled.converters)
            CHECK(b.converter_index.at(c.name) ==
                  static_cast<int>(std::find_if(shuffled.converters.begin(), shuffled.converters.end(),
                                                [&](const ConverterSpec& x) { return x.name == c.name; }) -
                                   shuffled.converters.begin()));
    }
}

TEST_CASE("splitting a branch in series leaves B unchanged", "[network][property]") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> frac(0.1, 0.9);
    for (int t = 0; t < 100; ++t) {
        auto sys = testing::random_system(rng);
        const ReducedNetwork a = reduce_network(sys.spec);
        SystemSpec split = sys.spec;
        std::uniform_int_distribution<std::size_t> pick(0, split.branches.size() - 1);
        const std::size_t k = pick(rng);
        const Branch old = split.branches[k];
        const double f = frac(rng);
        split.nodes.push_back("mid");
        split.branches[k] = {old.from, "mid", f * old.inductance_pu};
        split.branches.push_back({"mid", old.to, (1 - f) * old.inductance_pu});
        const ReducedNetwork b = reduce_network(split);
        CHECK((a.b_matrix - b.b_matrix).norm() < 1e-9 * a.b_matrix.norm());
    }
}

TEST_CASE("ill-conditioned interior is rejected", "[network]") {
    SystemSpec s;
    s.nodes = {"s", "c", "i1", "i2"};
    s.slack_node = "s";
    s.branches = {{"s", "c", 0.1}, {"c", "i1", 1e-8}, {"i1", "i2", 1e6}, {"i2", "s", 1e6}};
    s.converters = {{"C", "c", {1, 1}}};
    try {
        (void)reduce_network(s);
        FAIL("expected SINGULAR_INTERIOR");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularInterior);
    }

    NodeLaplacian lap{Eigen::MatrixXd::Zero(3, 3), {"s", "c", "x"}};
    lap.matrix << 10, -10, 0, -10, 10, 0, 0, 0, 0;  // x floats
    CHECK_THROWS_AS(kron_reduce(lap, "s", {"c"}), Error);
}

TEST_CASE("non-positive-definite input is rejected", "[network]") {
    Eigen::Matrix2d m;
    m << 1, 2, 2, 1;
    try {
        (void)make_reduced_network(m);
        FAIL("expected NOT_POSITIVE_DEFINITE");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotPositiveDefinite);
    }
}
