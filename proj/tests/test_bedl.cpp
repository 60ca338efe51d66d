#include "doctest.h"

#include <random>

#include "support.hpp"
#include "tedl/bedl.hpp"
#include "tedl/dataset.hpp"
#include "tedl/pairwise.hpp"
#include "tedl/ted.hpp"

using namespace tedl;

namespace {

struct Fixture {
    LabeledDataset data = generate_strings(3, 6);
    Eigen::MatrixXd d;
    PrototypeModel model;

    Fixture() {
        d = pairwise_ted(data.trees, ExplicitCostMatrix::unit(data.alphabet.size()));
        MglvqOptions options;
        options.seed = 1;
        model = median_glvq_fit(d, data.labels, options).model;
    }

    TrainingPairSet pairs(const CostModel& reference, ScriptPolicy policy = ScriptPolicy::average) const {
        return build_training_pairs(data.trees, data.labels, d, model, reference, policy);
    }
};

std::vector<double> flat(const Eigen::MatrixXd& m) {
    return std::vector<double>(m.data(), m.data() + m.size());
}

}

TEST_CASE("training pairs connect every example to its two winners") {
    Fixture f;
    auto unit = ExplicitCostMatrix::unit(f.data.alphabet.size());
    for (ScriptPolicy policy : {ScriptPolicy::single, ScriptPolicy::average}) {
        TrainingPairSet pairs = f.pairs(unit, policy);
        REQUIRE(pairs.size() == f.data.size());
        GlvqState state = glvq_state(prototype_columns(f.d, f.model), f.data.labels, f.model);
        for (size_t i = 0; i < pairs.size(); ++i) {
            CHECK(f.data.labels[pairs.w_plus[i]] == f.data.labels[i]);
            CHECK(f.data.labels[pairs.w_minus[i]] != f.data.labels[i]);
            // scripts taken at c0 reproduce the true distances at c0
            CHECK(pseudo_distance(pairs.plus[i], unit) == doctest::Approx(state.d_plus(i)).epsilon(1e-12));
            CHECK(pseudo_distance(pairs.minus[i], unit) == doctest::Approx(state.d_minus(i)).epsilon(1e-12));
        }
    }
}

TEST_CASE("GLVQ metric gradient matches finite differences") {
    Fixture f;
    std::mt19937_64 rng(404);
    const int u = static_cast<int>(f.data.alphabet.size());
    TrainingPairSet pairs = f.pairs(ExplicitCostMatrix::unit(u));
    for (int trial = 0; trial < 20; ++trial) {
        EmbeddingCostModel c = testing::random_embedding(rng, u, 2 + trial % 3);
        GlvqGradient g = glvq_metric_gradient(pairs, c);
        auto numeric = testing::numeric_gradient(
            [&](const std::vector<double>& theta) {
                EmbeddingCostModel probe = c;
                probe.set_parameters(theta);
                return glvq_metric_gradient(pairs, probe).loss;
            },
            c.parameters());
        CHECK(testing::relative_error(g.gradient, numeric) <= 1e-5);
    }

    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::MatrixXd base(3, u), omega(3, 3);
        for (Eigen::Index k = 0; k < base.size(); ++k) base.data()[k] = normal(rng);
        for (Eigen::Index k = 0; k < omega.size(); ++k) omega.data()[k] = normal(rng);
        CosineCostModel c(base, omega);
        GlvqGradient g = glvq_metric_gradient(pairs, c);
        auto numeric = testing::numeric_gradient(
            [&](const std::vector<double>& theta) {
                CosineCostModel probe = c;
                probe.set_parameters(theta);
                return glvq_metric_gradient(pairs, probe).loss;
            },
            c.parameters());
        CHECK(testing::relative_error(g.gradient, numeric) <= 1e-5);
    }
}

TEST_CASE("regularizers") {
    std::mt19937_64 rng(405);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
        const int v = 2 + trial % 3;
        Eigen::MatrixXd a(v, v + trial % 2);
        for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] = normal(rng);
        auto value = [&](auto regularizer) {
            return testing::numeric_gradient(
                [&](const std::vector<double>& theta) {
                    return regularizer(Eigen::Map<const Eigen::MatrixXd>(theta.data(), a.rows(), a.cols())).value;
                },
                flat(a), 1e-7);
        };
        CHECK(testing::relative_error(flat(log_det_regularizer(a).gradient), value(log_det_regularizer)) <= 1e-4);
        CHECK(testing::relative_error(flat(frobenius_regularizer(a).gradient), value(frobenius_regularizer)) <= 1e-6);
    }

    // orthonormal A: log det = 0 and the gradient is 2 A
    Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(4, 4)).householderQ();
    Regularizer r = log_det_regularizer(q);
    CHECK(std::abs(r.value) <= 1e-10);
    CHECK((r.gradient - 2.0 * q).norm() <= 1e-10);
    CHECK_FALSE(r.floored);

    Regularizer rank1 = log_det_regularizer(Eigen::MatrixXd::Ones(2, 2));
    CHECK(rank1.floored);
    CHECK(std::isfinite(rank1.value));
}

TEST_CASE("regularized loss: beta = 0 reduces to the GLVQ loss, gradients for both signs") {
    Fixture f;
    std::mt19937_64 rng(406);
    const int u = static_cast<int>(f.data.alphabet.size());
    TrainingPairSet pairs = f.pairs(ExplicitCostMatrix::unit(u));
    EmbeddingCostModel c = testing::random_embedding(rng, u, u);
    LossAndGradient plain = regularized_loss_and_grad(c, pairs, 0.0);
    GlvqGradient glvq = glvq_metric_gradient(pairs, c);
    CHECK(plain.value == glvq.loss);
    CHECK(flat(plain.gradient) == glvq.gradient);

    for (LogDetSign sign : {LogDetSign::add, LogDetSign::subtract}) {
        LossAndGradient lg = regularized_loss_and_grad(c, pairs, 0.3, sign);
        auto numeric = testing::numeric_gradient(
            [&](const std::vector<double>& theta) {
                EmbeddingCostModel probe = c;
                probe.set_parameters(theta);
                return regularized_loss_and_grad(probe, pairs, 0.3, sign).value;
            },
            c.parameters());
        CHECK(testing::relative_error(flat(lg.gradient), numeric) <= 1e-5);
    }
}

TEST_CASE("bedl_fit") {
    LabeledDataset data = generate_strings(11, 8);
    BedlConfig config;
    config.beta = 1e-3;
    config.budget = 40;
    config.max_outer = 4;

    SUBCASE("zero budget and beta = 0 keep the simplex") {
        BedlConfig idle = config;
        idle.beta = 0.0;
        idle.budget = 0;
        BedlResult r = bedl_fit(data.trees, data.labels, data.alphabet, idle, 5);
        CHECK(r.embedding.matrix() == simplex_init(data.alphabet.size()).matrix());
        REQUIRE(r.history.size() == 1);
        CHECK(r.history[0].evaluations == 0);
        CHECK(r.history[0].loss_before == r.history[0].loss_after);
    }

    SUBCASE("phases never increase the loss and runs are reproducible") {
        for (ScriptRefresh refresh : {ScriptRefresh::per_phase, ScriptRefresh::frozen}) {
            config.refresh = refresh;
            BedlResult a = bedl_fit(data.trees, data.labels, data.alphabet, config, 5);
            BedlResult b = bedl_fit(data.trees, data.labels, data.alphabet, config, 5);
            REQUIRE_FALSE(a.history.empty());
            for (const BedlPhase& p : a.history) {
                CHECK(p.loss_after <= p.loss_before);
                CHECK(p.evaluations <= config.budget);
                for (size_t t = 1; t < p.solver_trace.size(); ++t) {
                    CHECK(p.solver_trace[t] <= p.solver_trace[t - 1]);
                }
            }
            CHECK(a.embedding.matrix() == b.embedding.matrix());
            CHECK(a.prototypes == b.prototypes);
            CHECK(a.history.size() == b.history.size());
            CHECK_FALSE(a.stop_reason.empty());
        }
    }

    SUBCASE("serial and parallel runs agree") {
        BedlConfig serial = config;
        serial.parallel = false;
        BedlResult a = bedl_fit(data.trees, data.labels, data.alphabet, serial, 5);
        BedlResult b = bedl_fit(data.trees, data.labels, data.alphabet, config, 5);
        CHECK((a.embedding.matrix() - b.embedding.matrix()).cwiseAbs().maxCoeff() <= 1e-9);
    }

    SUBCASE("argument checks") {
        BedlConfig bad = config;
        bad.beta = -1.0;
        CHECK_THROWS_AS(bedl_fit(data.trees, data.labels, data.alphabet, bad, 5), std::invalid_argument);
        CHECK_THROWS_AS(bedl_fit(data.trees, data.labels, data.alphabet, config, 5, simplex_init(2)),
                        std::invalid_argument);
    }
}
