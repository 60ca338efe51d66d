#include "tedl/ted.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include "tedl/mapping.hpp"

namespace tedl {

ForestIndex::ForestIndex(const Tree& t) {
    const size_t n = t.size();
    labels.reserve(n);
    leftmost.reserve(n);
    preorder_index.reserve(n);
    int pre_counter = 0;

    std::function<void(const Tree&)> visit = [&](const Tree& node) {
        int pre = pre_counter++;
        int first = static_cast<int>(labels.size());
        for (const auto& child : node.children) {
            visit(child);
        }
        labels.push_back(node.label);
        leftmost.push_back(first);
        preorder_index.push_back(pre);
    };
    visit(t);

    left_end_of.assign(n, 0);
    for (size_t v = 0; v < n; ++v) {
        auto it = std::lower_bound(left_ends.begin(), left_ends.end(), leftmost[v]);
        if (it == left_ends.end() || *it != leftmost[v]) {
            left_ends.insert(it, leftmost[v]);
        }
    }
    left_end_owner.assign(left_ends.size(), -1);
    for (size_t v = 0; v < n; ++v) {
        auto k = std::lower_bound(left_ends.begin(), left_ends.end(), leftmost[v]) - left_ends.begin();
        left_end_of[v] = static_cast<int>(k);
        left_end_owner[k] = std::max(left_end_owner[k], static_cast<int>(v));
    }
}

ForestTables::ForestTables(const ForestIndex& x, const ForestIndex& y)
    : left_x_(x.left_ends), left_y_(y.left_ends), num_right_(y.left_ends.size()) {
    std::vector<size_t> rows(x.left_ends.size());
    for (size_t ia = 0; ia < rows.size(); ++ia) {
        rows[ia] = static_cast<size_t>(x.left_end_owner[ia] - x.left_ends[ia] + 2);
    }
    cols_.resize(num_right_);
    for (size_t ib = 0; ib < num_right_; ++ib) {
        cols_[ib] = static_cast<size_t>(y.left_end_owner[ib] - y.left_ends[ib] + 2);
    }
    offsets_.resize(rows.size() * num_right_);
    size_t total = 0;
    for (size_t ia = 0; ia < rows.size(); ++ia) {
        for (size_t ib = 0; ib < num_right_; ++ib) {
            offsets_[ia * num_right_ + ib] = total;
            total += rows[ia] * cols_[ib];
        }
    }
    free_table.assign(total, infinity);
    must_table.assign(total, infinity);
}

namespace {

Eigen::MatrixXd local_costs(const ForestIndex& x, const ForestIndex& y, const CostModel& c) {
    const int n = x.size();
    const int m = y.size();
    const Label gap = c.gap();
    auto check = [&](const ForestIndex& t) {
        for (Label l : t.labels) {
            if (l < 0 || l >= gap) {
                throw std::invalid_argument("tree label " + std::to_string(l) + " is outside the cost model's alphabet of size " +
                                            std::to_string(c.alphabet_size()));
            }
        }
    };
    check(x);
    check(y);
    Eigen::MatrixXd local(n + 1, m + 1);
    for (int i = 0; i <= n; ++i) {
        Label li = i < n ? x.labels[i] : gap;
        for (int j = 0; j <= m; ++j) {
            Label lj = j < m ? y.labels[j] : gap;
            local(i, j) = c.cost(li, lj);
        }
    }
    return local;
}

void fill_tables(const ForestIndex& x, const ForestIndex& y, const Eigen::MatrixXd& local, ForestTables& t) {
    const int n = x.size();
    const int m = y.size();
    const int nx = static_cast<int>(x.left_ends.size());
    const int ny = static_cast<int>(y.left_ends.size());

    for (int ia = nx - 1; ia >= 0; --ia) {
        const int a = x.left_ends[ia];
        const int owner_x = x.left_end_owner[ia];
        for (int ib = ny - 1; ib >= 0; --ib) {
            const int c = y.left_ends[ib];
            const int owner_y = y.left_end_owner[ib];
            for (int b = a - 1; b <= owner_x; ++b) {
                for (int d = c - 1; d <= owner_y; ++d) {
                    const size_t here = t.cell(ia, ib, b, d);
                    if (b < a && d < c) {
                        t.free_table[here] = 0.0;
                        continue;
                    }
                    if (b < a) {
                        t.free_table[here] = t.free_table[t.cell(ia, ib, b, d - 1)] + local(n, d);
                        continue;
                    }
                    if (d < c) {
                        t.free_table[here] = t.free_table[t.cell(ia, ib, b - 1, d)] + local(b, m);
                        continue;
                    }
                    const int lv = x.leftmost[b];
                    const int lw = y.leftmost[d];
                    const double del = t.free_table[t.cell(ia, ib, b - 1, d)] + local(b, m);
                    const double ins = t.free_table[t.cell(ia, ib, b, d - 1)] + local(n, d);
                    const double match = t.free_table[t.cell(x.left_end_of[b], y.left_end_of[d], b - 1, d - 1)] +
                                         t.free_table[t.cell(ia, ib, lv - 1, lw - 1)] + local(b, d);
                    const double ins_mapped = t.must_table[t.cell(ia, ib, b, d - 1)] + local(n, d);
                    t.free_table[here] = std::min({del, ins, match});
                    t.must_table[here] = std::min(ins_mapped, match);
                }
            }
        }
    }
}

}

DistanceResult ted(std::shared_ptr<const ForestIndex> x, std::shared_ptr<const ForestIndex> y, const CostModel& c) {
    DistanceResult result;
    result.local = local_costs(*x, *y, c);
    result.tables = ForestTables(*x, *y);
    fill_tables(*x, *y, result.local, result.tables);
    result.distance = result.tables.free(0, 0, x->size() - 1, y->size() - 1);
    result.x = std::move(x);
    result.y = std::move(y);
    return result;
}

DistanceResult ted(const Tree& x, const Tree& y, const CostModel& c) {
    return ted(std::make_shared<const ForestIndex>(x), std::make_shared<const ForestIndex>(y), c);
}

double ted_distance(const ForestIndex& x, const ForestIndex& y, const CostModel& c) {
    Eigen::MatrixXd local = local_costs(x, y, c);
    ForestTables tables(x, y);
    fill_tables(x, y, local, tables);
    return tables.free(0, 0, x.size() - 1, y.size() - 1);
}

double brute_force_ted(const Tree& x, const Tree& y, const CostModel& c) {
    if (x.size() + y.size() > brute_force_size_limit) {
        throw std::length_error("brute force TED refuses trees with more than " +
                                std::to_string(brute_force_size_limit) + " nodes in total");
    }
    ExplicitCostMatrix closure = cost_closure(materialize(c));
    PreorderView px = preorder(x);
    PreorderView py = preorder(y);
    double best = ForestTables::infinity;
    for_each_mapping(px, py, [&](const TreeMapping& mapping) {
        best = std::min(best, mapping_cost(px, py, mapping, closure));
    });
    return best;
}

}
