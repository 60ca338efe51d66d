#ifndef tedl_experiment_hpp
#define tedl_experiment_hpp

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tedl/bedl.hpp"
#include "tedl/classifiers.hpp"
#include "tedl/dataset.hpp"
#include "tedl/gesl.hpp"

namespace tedl {

// Fold id per item. Every class is shuffled with the seed and dealt
// round-robin, continuing where the previous class stopped, so fold sizes and
// class proportions differ by at most one. Throws if a class has fewer
// members than folds.
std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, uint64_t seed);

enum class Method { none, gesl, bedl };
// Distance used to evaluate a GESL cost matrix: the true edit distance or the
// pseudo distance over unit-cost backtraces.
enum class GeslDistance { ted, pseudo };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct ExperimentConfig {
    int outer_folds = 10;
    int inner_folds = 5;
    uint64_t seed = 0;
    Method method = Method::none;

    std::vector<int> k_grid;               // prototypes per class
    std::vector<int> knn_grid;
    std::vector<double> lambda_grid;
    std::vector<double> beta_scale_grid;   // beta = 2 K m * scale

    BedlConfig bedl;                       // k and beta are set per fold
    GeslConfig gesl;
    GoodnessOptions goodness;
    GeslDistance gesl_distance = GeslDistance::ted;

    ExperimentConfig();
};

nlohmann::json config_to_json(const ExperimentConfig& config);
// Fields missing from j keep their defaults; unknown fields are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);

struct FoldReport {
    int fold = 0;
    size_t train_size = 0, test_size = 0;
    std::map<std::string, double> errors;   // knn, mglvq, goodness
    double seconds = 0.0;                   // metric learning only
    int k = 0;            // MGLVQ prototypes per class chosen on the initial metric
    int k_eval = 0;       // ... re-tuned on the evaluated metric
    int k_knn = 0;
    double lambda = 0.0;
    double beta_scale = 0.0, beta = 0.0;
    std::optional<EmbeddingCostModel> embedding;
    std::optional<ExplicitCostMatrix> costs;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<FoldReport> folds;

    // classifier -> (mean, sample standard deviation) of the test error
    std::map<std::string, std::pair<double, double>> summary() const;
    std::pair<double, double> runtime_summary() const;
    // fold rows followed by mean and std rows; runtime cells are left empty
    // when `runtimes` is false so that reruns compare byte for byte
    void write_csv(std::ostream& out, bool runtimes = true) const;
};

// Nested cross-validation of one metric-learning method; see the README for
// the exact protocol.
ExperimentReport run_experiment(const ExperimentConfig& config, const LabeledDataset& data);

}
#endif /* tedl_experiment_hpp */
