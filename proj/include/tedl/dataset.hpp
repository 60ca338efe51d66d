#ifndef tedl_dataset_hpp
#define tedl_dataset_hpp

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tedl/cost_model.hpp"
#include "tedl/tree.hpp"

namespace tedl {

struct LabeledDataset {
    Alphabet alphabet;
    std::vector<Tree> trees;
    std::vector<int> labels;                // dense class ids in [0, class_names.size())
    std::vector<std::string> class_names;

    size_t size() const { return trees.size(); }
    // Throws if sizes, label ids or tree labels are inconsistent.
    void validate() const;
};

/*
 * Two classes of length-12 strings over {a, b, c, d}, encoded as chains.
 * Class 0: six symbols from {a, b}, one from {c, d}, five from {a, b}.
 * Class 1: five, one, six. Symbols are drawn uniformly.
 */
LabeledDataset generate_strings(uint64_t seed, int per_class = 100);

LabeledDataset subset(const LabeledDataset& data, const std::vector<int>& indices);

/*
 * {"alphabet": [...], "classes": [...], "items": [{"tree": "a(b)", "label": 0}, ...]}
 * "alphabet" may be omitted, in which case labels are collected in order of
 * appearance. "classes" may be omitted when labels are integers.
 */
nlohmann::json dataset_to_json(const LabeledDataset& data);
LabeledDataset dataset_from_json(const nlohmann::json& j);
LabeledDataset read_dataset(const std::string& path);
void write_dataset(const std::string& path, const LabeledDataset& data);

// Plain numeric CSV without header.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

// One integer per line.
void write_labels_csv(const std::string& path, const std::vector<int>& labels);
std::vector<int> read_labels_csv(const std::string& path);

// Header row "label,<x_1>,...,<x_U>,-", then one row per symbol in the same order.
void write_cost_matrix_csv(const std::string& path, const ExplicitCostMatrix& c, const Alphabet& alphabet);
ExplicitCostMatrix read_cost_matrix_csv(const std::string& path, const Alphabet& alphabet);

// Header "label,v1,...,vV", then one row per label (the gap is implicit).
void write_embedding_csv(const std::string& path, const EmbeddingCostModel& model, const Alphabet& alphabet);
EmbeddingCostModel read_embedding_csv(const std::string& path, const Alphabet& alphabet);

}
#endif /* tedl_dataset_hpp */
