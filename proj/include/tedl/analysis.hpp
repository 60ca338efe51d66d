#ifndef tedl_analysis_hpp
#define tedl_analysis_hpp

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tedl/tree.hpp"

namespace tedl {

enum class PcaMode { top2, variance95 };

struct PcaResult {
    Eigen::MatrixXd projected;    // k x n
    Eigen::MatrixXd components;   // D x k, orthonormal columns
    Eigen::VectorXd mean;         // D
    Eigen::VectorXd explained;    // variance ratio of each kept component
    double cumulative = 0.0;      // sum of `explained`
    bool degenerate = false;      // zero total variance

    // mean + components * projected
    Eigen::MatrixXd reconstruct() const;
};

// Principal components of the columns of `vectors` (D x n, n >= 2).
// variance95 keeps the smallest number of components reaching 95%.
PcaResult pca_project(const Eigen::MatrixXd& vectors, PcaMode mode);

// Projection with an explicit component count, 1 <= k <= D.
PcaResult pca_project(const Eigen::MatrixXd& vectors, Eigen::Index k);

struct WordVectors {
    Eigen::MatrixXd base;                 // D x U, columns in alphabet order
    std::vector<std::string> missing;     // tokens replaced by the mean vector
    size_t vocabulary = 0;                // lines read
};

/*
 * Text format "token v_1 ... v_D" per line (GloVe). A leading "count dim"
 * header line is skipped. Only vectors of alphabet tokens are kept.
 */
WordVectors load_word_vectors(const std::string& path, const Alphabet& alphabet);

}
#endif /* tedl_analysis_hpp */
