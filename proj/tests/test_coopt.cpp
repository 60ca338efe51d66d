#include "doctest.h"

#include <cmath>
#include <random>

#include "support.hpp"
#include "tedl/coopt.hpp"
#include "tedl/mapping.hpp"

using namespace tedl;

namespace {

void check_summary_invariants(const ScriptSummary& s, const Tree& x, const Tree& y, const CostModel& c, double distance) {
    const Eigen::Index n = s.rows() - 1;
    const Eigen::Index m = s.cols() - 1;
    CHECK(s.P.minCoeff() >= -1e-12);
    CHECK(s.P.maxCoeff() <= 1.0 + 1e-12);
    CHECK(s.P(n, m) == 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        CHECK(std::abs(s.P.row(i).sum() - 1.0) <= 1e-9);
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        CHECK(std::abs(s.P.col(j).sum() - 1.0) <= 1e-9);
    }
    CHECK(std::abs(summary_cost(s, preorder(x), preorder(y), c) - distance) <= 1e-9);
}

TreeMapping mapping_of(const ScriptSummary& s) {
    TreeMapping mapping;
    for (Eigen::Index i = 0; i + 1 < s.rows(); ++i) {
        for (Eigen::Index j = 0; j + 1 < s.cols(); ++j) {
            if (s.P(i, j) == 1.0) {
                mapping.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
            }
        }
    }
    return mapping;
}

}

TEST_CASE("single backtrace of identical trees is the identity") {
    Alphabet abc({"x", "y", "z", "q"});
    Tree x = parse_bracket("x(y,z)", abc);
    auto unit = ExplicitCostMatrix::unit(abc.size());
    auto dp = ted(x, x, unit);
    ScriptSummary s = single_backtrace(x, x, unit, dp);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 4);
    expected.topLeftCorner(3, 3).setIdentity();
    CHECK(s.P == expected);
}

TEST_CASE("single backtrace of the walkthrough pair") {
    Alphabet abc({"x", "y", "z", "q"});
    Tree x = parse_bracket("x(y,z)", abc);
    Tree y = parse_bracket("q(z(q))", abc);
    auto unit = ExplicitCostMatrix::unit(abc.size());
    auto dp = ted(x, y, unit);
    ScriptSummary s = single_backtrace(x, y, unit, dp);
    // replace x -> q, delete y, keep z, insert the inner q
    CHECK(s.P(0, 0) == 1.0);
    CHECK(s.P(1, 3) == 1.0);
    CHECK(s.P(2, 1) == 1.0);
    CHECK(s.P(3, 2) == 1.0);
    CHECK(s.P.sum() == 4.0);
    check_summary_invariants(s, x, y, unit, 3.0);
}

TEST_CASE("forced deletion") {
    Alphabet xy({"x", "y"});
    Tree x = parse_bracket("x(y)", xy);
    Tree y = parse_bracket("x", xy);
    auto unit = ExplicitCostMatrix::unit(2);
    auto dp = ted(x, y, unit);
    ScriptSummary s = coopt_average(x, y, unit, dp);
    CHECK(s.P(0, 0) == doctest::Approx(1.0));
    CHECK(s.P(1, 1) == doctest::Approx(1.0));
    CHECK(s.log_count == doctest::Approx(0.0));
    CHECK(s.P == single_backtrace(x, y, unit, dp).P);
}

TEST_CASE("chain a(a) vs a has two co-optimal mappings") {
    Alphabet a({"a"});
    Tree x = parse_bracket("a(a)", a);
    Tree y = parse_bracket("a", a);
    auto unit = ExplicitCostMatrix::unit(1);
    auto dp = ted(x, y, unit);
    ScriptSummary s = coopt_average(x, y, unit, dp);
    CHECK(s.P(0, 0) == doctest::Approx(0.5));
    CHECK(s.P(1, 0) == doctest::Approx(0.5));
    CHECK(s.P(0, 1) == doctest::Approx(0.5));
    CHECK(s.P(1, 1) == doctest::Approx(0.5));
    CHECK(std::exp(s.log_count) == doctest::Approx(2.0));

    CooptEnumeration e = enumerate_coopt(x, y, unit);
    CHECK(e.count == 2);
    CHECK((e.summary.P - s.P).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("identical trees under distinct-label costs") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        Tree t = testing::random_tree(rng, 1 + trial % 6, 3);
        auto c = testing::random_embedding(rng, 3, 3);
        CooptEnumeration e = enumerate_coopt(t, t, c);
        CHECK(e.count >= 1);
        // distinct labels embed at distinct points, so keeping every node is the only optimum
        CHECK(e.summary.P.diagonal().head(t.size()).minCoeff() == doctest::Approx(1.0));
    }
}

TEST_CASE("coopt_average matches the enumeration oracle") {
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<int> size(1, 6);
    std::uniform_int_distribution<int> labels(1, 3);
    int with_ties = 0;
    for (int trial = 0; trial < 200; ++trial) {
        int u = labels(rng);
        Tree x = testing::random_tree(rng, size(rng), u);
        Tree y = testing::random_tree(rng, size(rng), u);
        std::unique_ptr<CostModel> c;
        if (trial % 2 == 0) {
            c = std::make_unique<ExplicitCostMatrix>(ExplicitCostMatrix::unit(u));
        } else {
            c = std::make_unique<EmbeddingCostModel>(testing::random_embedding(rng, u, 2));
        }
        auto dp = ted(x, y, *c);
        ScriptSummary s = coopt_average(x, y, *c, dp);
        CooptEnumeration e = enumerate_coopt(x, y, *c);
        CHECK(std::abs(e.optimum - dp.distance) <= 1e-9);
        CHECK((e.summary.P - s.P).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(std::abs(std::exp(s.log_count) - static_cast<double>(e.count)) <= 1e-6 * e.count);
        check_summary_invariants(s, x, y, *c, dp.distance);
        with_ties += e.count >= 2;
    }
    CHECK(with_ties >= 20);
}

TEST_CASE("single backtrace is one valid co-optimal mapping") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> size(1, 9);
    for (int trial = 0; trial < 100; ++trial) {
        Tree x = testing::random_tree(rng, size(rng), 3);
        Tree y = testing::random_tree(rng, size(rng), 3);
        auto unit = ExplicitCostMatrix::unit(3);
        auto dp = ted(x, y, unit);
        ScriptSummary s = single_backtrace(x, y, unit, dp);
        check_summary_invariants(s, x, y, unit, dp.distance);
        TreeMapping mapping = mapping_of(s);
        PreorderView px = preorder(x), py = preorder(y);
        CHECK(is_valid_mapping(px, py, mapping));
        CHECK(mapping_cost(px, py, mapping, unit) == doctest::Approx(dp.distance));
    }
}

TEST_CASE("summaries of larger random pairs keep their invariants") {
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<int> size(5, 25);
    for (int trial = 0; trial < 30; ++trial) {
        Tree x = testing::random_tree(rng, size(rng), 2);
        Tree y = testing::random_tree(rng, size(rng), 2);
        auto unit = ExplicitCostMatrix::unit(2);
        auto dp = ted(x, y, unit);
        check_summary_invariants(coopt_average(x, y, unit, dp), x, y, unit, dp.distance);
    }
}

TEST_CASE("wide stars: counts in log space stay exact") {
    Tree star(0);
    for (int k = 0; k < 300; ++k) {
        star.children.emplace_back(0);
    }
    Tree small(0, {Tree(0), Tree(0)});
    auto unit = ExplicitCostMatrix::unit(1);
    auto dp = ted(star, small, unit);
    ScriptSummary s = coopt_average(star, small, unit, dp);
    // root to root plus any 2 of 300 leaves: C(300, 2) = 44850
    CHECK(std::exp(s.log_count) == doctest::Approx(44850.0));
    CHECK(s.P(1, 1) == doctest::Approx(299.0 / 44850.0));
    check_summary_invariants(s, star, small, unit, dp.distance);
}

TEST_CASE("stale DP tables and size limits are rejected") {
    Alphabet ab({"a", "b"});
    Tree x = parse_bracket("a(b)", ab);
    Tree y = parse_bracket("b", ab);
    auto unit = ExplicitCostMatrix::unit(2);
    auto dp = ted(x, y, unit);
    CHECK_THROWS_AS(coopt_average(y, x, unit, dp), std::logic_error);
    CHECK_THROWS_AS(single_backtrace(x, x, unit, dp), std::logic_error);
    ExplicitCostMatrix doubled(2.0 * unit.entries());
    CHECK_THROWS_AS(coopt_average(x, y, doubled, dp), std::logic_error);

    std::mt19937_64 rng(2);
    Tree big = testing::random_tree(rng, 7, 2);
    CHECK_THROWS_AS(enumerate_coopt(big, big, unit), std::length_error);
}
