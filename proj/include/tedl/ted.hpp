#ifndef tedl_ted_hpp
#define tedl_ted_hpp

#include <limits>
#include <memory>
#include <vector>

#include "tedl/cost_model.hpp"
#include "tedl/tree.hpp"

namespace tedl {

/*
 * Post-order decomposition of a tree used by the forest DP. Every forest the
 * rightmost-root recurrence visits is a post-order interval [a, b] whose left
 * end a is the leftmost leaf of some node; we call those values left ends.
 */
struct ForestIndex {
    std::vector<Label> labels;        // post-order
    std::vector<int> leftmost;        // post-order index of the leftmost leaf
    std::vector<int> preorder_index;  // post-order -> pre-order
    std::vector<int> left_ends;       // distinct leftmost values, ascending
    std::vector<int> left_end_owner;  // largest node whose leftmost leaf is left_ends[k]
    std::vector<int> left_end_of;     // node -> position of leftmost[node] in left_ends

    ForestIndex() = default;
    explicit ForestIndex(const Tree& t);

    int size() const { return static_cast<int>(labels.size()); }
    bool operator==(const ForestIndex& other) const = default;
};

/*
 * Memoized forest distances for one tree pair. For every pair of left ends
 * (ia, ib) there is a dense block over right ends b in [a-1, owner] and
 * d in [c-1, owner'] where b = a-1 denotes the empty forest.
 *
 * free(F, G): cheapest mapping between forests F and G.
 * must(F, G): cheapest mapping in which the rightmost root of F is mapped
 *             (+inf when G is empty).
 */
class ForestTables {
public:
    static constexpr double infinity = std::numeric_limits<double>::infinity();

    ForestTables() = default;
    ForestTables(const ForestIndex& x, const ForestIndex& y);

    size_t cell(int ia, int ib, int b, int d) const {
        return offsets_[static_cast<size_t>(ia) * num_right_ + ib] +
               static_cast<size_t>(b - left_x_[ia] + 1) * cols_[ib] + static_cast<size_t>(d - left_y_[ib] + 1);
    }
    double free(int ia, int ib, int b, int d) const { return free_table[cell(ia, ib, b, d)]; }
    double must(int ia, int ib, int b, int d) const { return must_table[cell(ia, ib, b, d)]; }
    size_t num_cells() const { return free_table.size(); }

    std::vector<double> free_table;
    std::vector<double> must_table;

private:
    std::vector<size_t> offsets_;
    std::vector<size_t> cols_;
    std::vector<int> left_x_, left_y_;
    size_t num_right_ = 0;
};

/*
 * Distance plus everything needed to backtrace it.
 */
struct DistanceResult {
    double distance = 0.0;
    std::shared_ptr<const ForestIndex> x, y;
    // local(i, j) = c(x_i, y_j) over post-order indices; index n (resp. m) is the gap
    Eigen::MatrixXd local;
    ForestTables tables;

    double local_cost(int i, int j) const { return local(i, j); }
};

// Tree edit distance via the rightmost-root forest recurrence, O(|x|^2 |y|^2).
// For a pseudo-metric c this is the cheapest edit script; otherwise it is the
// cheapest mapping, which may overestimate the edit distance.
DistanceResult ted(const Tree& x, const Tree& y, const CostModel& c);
DistanceResult ted(std::shared_ptr<const ForestIndex> x, std::shared_ptr<const ForestIndex> y, const CostModel& c);

// Distance only; reuses the decompositions.
double ted_distance(const ForestIndex& x, const ForestIndex& y, const CostModel& c);

// Cheapest edit script by exhaustive enumeration of mappings under the
// shortest-path closure of c. Refuses when |x| + |y| > 14.
double brute_force_ted(const Tree& x, const Tree& y, const CostModel& c);

constexpr size_t brute_force_size_limit = 14;

}
#endif /* tedl_ted_hpp */
