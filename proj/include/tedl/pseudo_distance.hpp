#ifndef tedl_pseudo_distance_hpp
#define tedl_pseudo_distance_hpp

#include <vector>

#include <Eigen/Dense>

#include "tedl/coopt.hpp"
#include "tedl/cost_model.hpp"
#include "tedl/tree.hpp"

namespace tedl {

struct LabelPairWeight {
    Label x, y;
    double weight;
};

/*
 * A tree pair with its script summary P frozen at some reference cost
 * function. The pseudo distance sum_ij P(i, j) c(x_i, y_j) is linear in c;
 * `weights` folds P onto (label, label) cells so that evaluation only touches
 * distinct label pairs.
 */
struct PairContext {
    PreorderView x, y;
    ScriptSummary summary;
    std::vector<LabelPairWeight> weights;

    PairContext() = default;
    PairContext(const Tree& tx, const Tree& ty, ScriptSummary s, Label gap);
    PairContext(PreorderView px, PreorderView py, ScriptSummary s, Label gap);
};

enum class ScriptPolicy { single, average };

// Runs TED under c0 and summarizes the optimal scripts.
PairContext make_context(const Tree& x, const Tree& y, const CostModel& c0, ScriptPolicy policy);

double pseudo_distance(const PairContext& ctx, const CostModel& c);

// Gradient with respect to the explicit cost entries, (U+1) x (U+1).
Eigen::MatrixXd pseudo_distance_grad_matrix(const PairContext& ctx, const ExplicitCostMatrix& c);

// Gradient with respect to a(label), summing over the occurrences of the label
// in both trees. Coincident vectors contribute nothing.
Eigen::VectorXd pseudo_distance_grad_embedding(const PairContext& ctx, const EmbeddingCostModel& model, Label label);

// All per-label gradients assembled as a V x U matrix.
Eigen::MatrixXd pseudo_distance_grad_embedding(const PairContext& ctx, const EmbeddingCostModel& model);

// Gradient with respect to the flat parameter vector of any cost model.
std::vector<double> pseudo_distance_gradient(const PairContext& ctx, const CostModel& c);

}
#endif /* tedl_pseudo_distance_hpp */
