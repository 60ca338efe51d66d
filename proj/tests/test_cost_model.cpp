#include "doctest.h"

#include <random>

#include "support.hpp"
#include "tedl/cost_model.hpp"

using namespace tedl;

TEST_CASE("simplex initialization reproduces unit costs") {
    for (size_t u : {1u, 2u, 5u, 12u}) {
        EmbeddingCostModel model = simplex_init(u);
        CHECK(model.dimension() == u);
        ExplicitCostMatrix c = materialize(model);
        Eigen::MatrixXd unit = ExplicitCostMatrix::unit(u).entries();
        CHECK((c.entries() - unit).cwiseAbs().maxCoeff() <= 1e-12);
    }
    // U = 5: all 15 pairwise distances among {0, a(x1..x5)}
    EmbeddingCostModel five = simplex_init(5);
    int pairs = 0;
    for (Label x = 0; x <= 5; ++x) {
        for (Label y = x + 1; y <= 5; ++y) {
            CHECK(std::abs((five.vector(x) - five.vector(y)).norm() - 1.0) <= 1e-12);
            ++pairs;
        }
    }
    CHECK(pairs == 15);
}

TEST_CASE("embedding cost gradient") {
    Eigen::MatrixXd a(2, 2);
    a << 1, 0,
         0, 0;
    EmbeddingCostModel model(a);
    auto [gx, gy] = embedding_cost_gradient(model, 0, model.gap());
    CHECK(gx(0) == doctest::Approx(1.0));
    CHECK(gx(1) == doctest::Approx(0.0));
    CHECK(gy(0) == doctest::Approx(-1.0));

    // a(1) is the origin, same as the gap: zero subgradient
    auto [zx, zy] = embedding_cost_gradient(model, 1, model.gap());
    CHECK(zx.norm() == 0.0);
    CHECK(zy.norm() == 0.0);

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        EmbeddingCostModel m = testing::random_embedding(rng, 4, 3);
        Label x = trial % 5, y = (trial * 3 + 1) % 5;
        if (x == y) {
            continue;
        }
        std::vector<double> analytic(m.num_parameters(), 0.0);
        m.accumulate_gradient(x, y, 1.0, analytic);
        auto numeric = testing::numeric_gradient(
            [&](const std::vector<double>& theta) {
                EmbeddingCostModel probe = m;
                probe.set_parameters(theta);
                return probe.cost(x, y);
            },
            m.parameters());
        CHECK(testing::relative_error(analytic, numeric) <= 1e-6);
    }
}

TEST_CASE("cosine cost model") {
    Eigen::MatrixXd base(3, 3);
    base << 1, 0, 1,
            0, 1, 1,
            0, 0, 0;
    CosineCostModel model(base, std::vector<std::string>{"p", "q", "r"});
    CHECK(model.cost(0, 0) == 0.0);
    CHECK(model.cost(0, 1) == doctest::Approx(0.5));
    CHECK(model.cost(0, model.gap()) == CosineCostModel::gap_cost);
    CHECK(model.cost(model.gap(), 2) == CosineCostModel::gap_cost);
    CHECK(model.cost(model.gap(), model.gap()) == 0.0);
    CHECK(model.cost(0, 2) == doctest::Approx(0.5 - 0.5 / std::sqrt(2.0)));
    CHECK(cosine_cost_gradient(model, 1, 1).norm() == 0.0);

    std::mt19937_64 rng(23);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd b(4, 5), omega(4, 4);
        for (Eigen::Index k = 0; k < b.size(); ++k) b.data()[k] = normal(rng);
        for (Eigen::Index k = 0; k < omega.size(); ++k) omega.data()[k] = normal(rng);
        CosineCostModel m(b, omega);
        Label x = trial % 5, y = (trial + 2) % 5;
        Eigen::MatrixXd g = cosine_cost_gradient(m, x, y);
        std::vector<double> analytic(g.data(), g.data() + g.size());
        auto numeric = testing::numeric_gradient(
            [&](const std::vector<double>& theta) {
                CosineCostModel probe = m;
                probe.set_parameters(theta);
                return probe.cost(x, y);
            },
            m.parameters());
        CHECK(testing::relative_error(analytic, numeric) <= 1e-5);
        double cxy = m.cost(x, y);
        CHECK(cxy >= 0.0);
        CHECK(cxy <= 1.0);
        CHECK(cxy == doctest::Approx(m.cost(y, x)));
    }

    Eigen::MatrixXd squash = Eigen::MatrixXd::Identity(3, 3);
    squash(0, 0) = 0.0;
    squash(1, 1) = 0.0;
    CosineCostModel degenerate(base, squash, {"p", "q", "r"});
    CHECK_THROWS_WITH_AS(degenerate.cost(0, 1), doctest::Contains("'p'"), std::domain_error);
}

TEST_CASE("pseudo-metric validation") {
    CHECK(validate_pseudometric(ExplicitCostMatrix::unit(4)).ok());

    // labels a, b, q and the gap; c(a,b) = 3 > c(a,q) + c(q,b) = 2
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(4, 4, 1.5);
    m.diagonal().setZero();
    m(0, 1) = m(1, 0) = 3.0;
    m(0, 2) = m(2, 0) = 1.0;
    m(2, 1) = m(1, 2) = 1.0;
    PseudometricReport report = validate_pseudometric(ExplicitCostMatrix(m));
    CHECK_FALSE(report.ok());
    CHECK(report.count(AxiomViolation::triangle) >= 1);
    bool found = false;
    for (const auto& v : report.violations) {
        found = found || (v.kind == AxiomViolation::triangle && v.x == 0 && v.y == 1 && v.z == 2);
    }
    CHECK(found);

    Eigen::MatrixXd bad = ExplicitCostMatrix::unit(2).entries();
    bad(0, 1) = -1.0;
    bad(1, 0) = 2.0;
    bad(1, 1) = 0.5;
    PseudometricReport r2 = validate_pseudometric(ExplicitCostMatrix(bad));
    CHECK(r2.count(AxiomViolation::negative) == 1);
    CHECK(r2.count(AxiomViolation::asymmetric) == 1);
    CHECK(r2.count(AxiomViolation::nonzero_self) == 1);

    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 100; ++trial) {
        EmbeddingCostModel e = testing::random_embedding(rng, 2 + trial % 6, 1 + trial % 4);
        CHECK(validate_pseudometric(materialize(e)).ok());
    }
}

TEST_CASE("cost closure") {
    Eigen::MatrixXd m(3, 3);
    m << 0, 1, 10,
         1, 0, 1,
         1, 1, 0;
    ExplicitCostMatrix closed = cost_closure(ExplicitCostMatrix(m));
    CHECK(closed.cost(0, 2) == 2.0);
    CHECK(validate_pseudometric(closed).count(AxiomViolation::triangle) == 0);
    // a pseudo-metric is its own closure
    ExplicitCostMatrix unit = ExplicitCostMatrix::unit(3);
    CHECK(cost_closure(unit).entries() == unit.entries());
}

TEST_CASE("parameter views") {
    ExplicitCostMatrix c = ExplicitCostMatrix::unit(2);
    std::vector<double> theta = c.parameters();
    CHECK(theta.size() == 9);
    theta[8] = 5.0;   // c(-,-) stays pinned
    theta[1] = 4.0;   // column-major: entry (1, 0)
    c.set_parameters(theta);
    CHECK(c.cost(2, 2) == 0.0);
    CHECK(c.cost(1, 0) == 4.0);
    std::vector<double> grad(9, 0.0);
    c.accumulate_gradient(1, 0, 2.0, grad);
    c.accumulate_gradient(2, 2, 2.0, grad);
    CHECK(grad[1] == 2.0);
    CHECK(grad[8] == 0.0);
    CHECK_THROWS(c.set_parameters(std::vector<double>(3)));
}
