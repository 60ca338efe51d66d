#ifndef tedl_tests_support_hpp
#define tedl_tests_support_hpp

#include <functional>
#include <random>
#include <vector>

#include "tedl/cost_model.hpp"
#include "tedl/tree.hpp"

namespace tedl::testing {

// Random ordered tree with `size` nodes grown in pre-order: every new node
// hangs below some node on the current rightmost path.
inline Tree random_tree(std::mt19937_64& rng, int size, int alphabet_size) {
    std::uniform_int_distribution<Label> label(0, alphabet_size - 1);
    Tree root(label(rng));
    std::vector<Tree*> path{&root};
    for (int k = 1; k < size; ++k) {
        std::uniform_int_distribution<size_t> depth(1, path.size());
        path.resize(depth(rng));
        Tree* parent = path.back();
        parent->children.emplace_back(label(rng));
        // pointers into `children` of ancestors stay valid: only the deepest
        // vector on the path grows
        path.push_back(&parent->children.back());
    }
    return root;
}

inline EmbeddingCostModel random_embedding(std::mt19937_64& rng, int alphabet_size, int dim) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd a(dim, alphabet_size);
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        a.data()[k] = normal(rng);
    }
    return EmbeddingCostModel(a);
}

inline Alphabet letters(int count) {
    std::vector<std::string> labels;
    for (int k = 0; k < count; ++k) {
        labels.emplace_back(1, static_cast<char>('a' + k));
    }
    return Alphabet(labels);
}

// Central finite differences of f at theta.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> theta, double h = 1e-6) {
    std::vector<double> grad(theta.size());
    for (size_t k = 0; k < theta.size(); ++k) {
        double keep = theta[k];
        theta[k] = keep + h;
        double up = f(theta);
        theta[k] = keep - h;
        double down = f(theta);
        theta[k] = keep;
        grad[k] = (up - down) / (2 * h);
    }
    return grad;
}

// ||a - b|| / max(||b||, floor)
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-8) {
    double diff = 0.0, norm = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
        diff += (a[k] - b[k]) * (a[k] - b[k]);
        norm += b[k] * b[k];
    }
    return std::sqrt(diff) / std::max(std::sqrt(norm), floor);
}

}
#endif
