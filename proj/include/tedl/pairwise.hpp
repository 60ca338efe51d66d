#ifndef tedl_pairwise_hpp
#define tedl_pairwise_hpp

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tedl/cost_model.hpp"
#include "tedl/pseudo_distance.hpp"
#include "tedl/ted.hpp"

namespace tedl {

std::vector<ForestIndex> index_forests(const std::vector<Tree>& trees);

/*
 * D(i, j) = ted(rows[i], cols[j]) under c. The cost model is materialized
 * once so the inner loops never go through a virtual call. Both variants
 * write every cell exactly once and return bitwise identical matrices.
 */
Eigen::MatrixXd pairwise_ted_serial(const std::vector<ForestIndex>& rows, const std::vector<ForestIndex>& cols,
                                    const CostModel& c);
Eigen::MatrixXd pairwise_ted_parallel(const std::vector<ForestIndex>& rows, const std::vector<ForestIndex>& cols,
                                      const CostModel& c);

Eigen::MatrixXd pairwise_ted(const std::vector<Tree>& rows, const std::vector<Tree>& cols, const CostModel& c);
Eigen::MatrixXd pairwise_ted(const std::vector<Tree>& trees, const CostModel& c);

// One context per requested (row tree, column tree) pair, in request order.
std::vector<PairContext> make_contexts_serial(const std::vector<Tree>& rows, const std::vector<Tree>& cols,
                                              const std::vector<std::pair<int, int>>& requests, const CostModel& c0,
                                              ScriptPolicy policy);
std::vector<PairContext> make_contexts_parallel(const std::vector<Tree>& rows, const std::vector<Tree>& cols,
                                                const std::vector<std::pair<int, int>>& requests, const CostModel& c0,
                                                ScriptPolicy policy);

// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int kernel_threads();

}
#endif /* tedl_pairwise_hpp */
