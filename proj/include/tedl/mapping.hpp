#ifndef tedl_mapping_hpp
#define tedl_mapping_hpp

#include <functional>
#include <utility>
#include <vector>

#include "tedl/cost_model.hpp"
#include "tedl/tree.hpp"

namespace tedl {

/*
 * One-to-one, ancestry- and order-preserving correspondence between nodes of
 * two trees (pre-order indices). Unmapped nodes are deleted or inserted.
 */
struct TreeMapping {
    std::vector<std::pair<int, int>> pairs;
};

bool is_valid_mapping(const PreorderView& x, const PreorderView& y, const TreeMapping& mapping);

// Replacement costs of mapped pairs plus deletion/insertion costs of unmapped nodes.
double mapping_cost(const PreorderView& x, const PreorderView& y, const TreeMapping& mapping, const CostModel& c);

// Calls visit once per valid mapping. Exponential; meant for small trees.
void for_each_mapping(const PreorderView& x, const PreorderView& y,
                      const std::function<void(const TreeMapping&)>& visit);

}
#endif /* tedl_mapping_hpp */
