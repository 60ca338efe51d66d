#ifndef tedl_mglvq_hpp
#define tedl_mglvq_hpp

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace tedl {

/*
 * Prototypes are training points. `prototypes[k]` indexes the training set
 * and `classes[k]` is its class; prototypes are stored class by class.
 */
struct PrototypeModel {
    std::vector<int> prototypes;
    std::vector<int> classes;

    size_t size() const { return prototypes.size(); }
    bool operator==(const PrototypeModel& other) const = default;
};

/*
 * Per-example distances to the closest prototype of the own class (d+) and
 * of any other class (d-), the relative margin mu = (d+ - d-) / (d+ + d-)
 * and the positions of the two winning prototypes in the model.
 */
struct GlvqState {
    Eigen::VectorXd d_plus, d_minus, mu;
    std::vector<int> w_plus, w_minus;
    int degenerate = 0;   // examples with d+ = d- = 0, given mu = 0

    size_t size() const { return static_cast<size_t>(mu.size()); }
};

// mu for one example; 0 when both distances vanish.
double glvq_mu(double d_plus, double d_minus);

// D_to_prototypes: m x |model|, labels: one class per row.
GlvqState glvq_state(const Eigen::MatrixXd& d_to_prototypes, const std::vector<int>& labels, const PrototypeModel& model);

// sum_i log(4 + mu_i)
double glvq_loss(const GlvqState& state);

// sum_i log(g+_i + g-_i) = sum_i log(4 - mu_i), the quantity the EM scheme increases.
double em_objective(const GlvqState& state);

struct MglvqOptions {
    int k = 1;                  // prototypes per class
    uint64_t seed = 0;
    // warm start; overrides the random draw where it is a valid model for the data
    std::optional<PrototypeModel> init;
    size_t max_swaps = 1000000;
};

struct MglvqFit {
    PrototypeModel model;
    // em_objective after initialization and after every accepted swap
    std::vector<double> objective_trace;
    size_t swaps = 0;
    double training_error = 0.0;
};

/*
 * Median GLVQ by generalized EM on a training distance matrix D (m x m).
 * The M-step visits prototypes in order and candidates of the same class in
 * index order, accepting the first swap that improves the EM lower bound by
 * more than 1e-12; an E-step follows every accepted swap. Stops when no
 * single swap improves the bound.
 */
MglvqFit median_glvq_fit(const Eigen::MatrixXd& d, const std::vector<int>& labels, const MglvqOptions& options);

// Nearest prototype; ties go to the lower prototype position.
std::vector<int> classify_nearest_prototype(const Eigen::MatrixXd& d_to_prototypes, const PrototypeModel& model);

// Columns of d selected by the model's prototypes.
Eigen::MatrixXd prototype_columns(const Eigen::MatrixXd& d, const PrototypeModel& model);

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth);

}
#endif /* tedl_mglvq_hpp */
