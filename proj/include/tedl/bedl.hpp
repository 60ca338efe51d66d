#ifndef tedl_bedl_hpp
#define tedl_bedl_hpp

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tedl/cost_model.hpp"
#include "tedl/mglvq.hpp"
#include "tedl/pseudo_distance.hpp"
#include "tedl/tree.hpp"

namespace tedl {

// When the script matrices of the training pairs are computed.
enum class ScriptRefresh { per_phase, frozen };

// +1: the log-determinant is added to the loss as printed; -1: it is
// subtracted, which rewards a well-conditioned embedding.
enum class LogDetSign { add, subtract };

struct BedlConfig {
    int k = 1;                     // prototypes per class
    double beta = 0.0;
    int budget = 200;              // gradient evaluations per metric phase
    int max_outer = 10;
    bool average_scripts = true;   // co-optimal averaging, else a single backtrace
    ScriptRefresh refresh = ScriptRefresh::per_phase;
    LogDetSign log_det_sign = LogDetSign::subtract;
    bool parallel = true;
};

/*
 * For every training example i the closest prototype of its own class
 * (plus) and of another class (minus), with the scripts that connect them.
 */
struct TrainingPairSet {
    std::vector<PairContext> plus, minus;
    std::vector<int> w_plus, w_minus;   // training indices of the prototypes

    size_t size() const { return plus.size(); }
};

TrainingPairSet build_training_pairs(const std::vector<Tree>& trees, const std::vector<int>& labels,
                                     const Eigen::MatrixXd& d, const PrototypeModel& model, const CostModel& reference,
                                     ScriptPolicy policy, bool parallel = true);

struct GlvqGradient {
    double loss = 0.0;                // sum_i log(4 + mu_i) over pseudo distances
    std::vector<double> gradient;     // over the flat parameters of the cost model
    int degenerate = 0;               // examples with d+ = d- = 0, skipped
};

// Loss and chain-rule gradient of the GLVQ cost over pseudo edit distances.
GlvqGradient glvq_metric_gradient(const TrainingPairSet& pairs, const CostModel& c, bool parallel = true);

struct Regularizer {
    double value = 0.0;
    Eigen::MatrixXd gradient;
    bool floored = false;
};

// log det(A A^T) with eigenvalues floored at 1e-12; gradient 2 (A^+)^T.
// For square A this equals log det(A^T A).
Regularizer log_det_regularizer(const Eigen::MatrixXd& a);

// ||A||_F^2, gradient 2 A.
Regularizer frobenius_regularizer(const Eigen::MatrixXd& a);

struct LossAndGradient {
    double value = 0.0;
    Eigen::MatrixXd gradient;   // V x U
    int degenerate = 0;
    bool floored = false;
};

// GLVQ loss + sign * beta * log det(A A^T) + beta * ||A||_F^2
LossAndGradient regularized_loss_and_grad(const EmbeddingCostModel& c, const TrainingPairSet& pairs, double beta,
                                          LogDetSign sign = LogDetSign::subtract, bool parallel = true);

struct BedlPhase {
    int outer = 0;
    double loss_before = 0.0;
    double loss_after = 0.0;
    int evaluations = 0;
    bool prototypes_changed = true;
    std::string solver_stop;
    std::vector<double> solver_trace;
};

struct BedlResult {
    EmbeddingCostModel embedding;
    PrototypeModel prototypes;
    std::vector<BedlPhase> history;
    std::string stop_reason;
};

/*
 * Alternates median GLVQ on the current tree edit distances with L-BFGS on
 * the regularized GLVQ loss over the label embedding, starting from the
 * unit simplex (or `init`). Stops when the prototypes no longer change, a
 * metric phase improves the loss by less than 1e-9, or after max_outer
 * phases. The returned prototypes are refitted under the final embedding.
 */
BedlResult bedl_fit(const std::vector<Tree>& trees, const std::vector<int>& labels, const Alphabet& alphabet,
                    const BedlConfig& config, uint64_t seed, std::optional<EmbeddingCostModel> init = {});

}
#endif /* tedl_bedl_hpp */
