#include "tedl/mapping.hpp"

#include <algorithm>

namespace tedl {

namespace {

// (i1, j1) and (i2, j2) with i1 < i2 are compatible iff pre-order is kept and
// ancestry agrees on both sides.
bool compatible(const PreorderView& x, const PreorderView& y, int i1, int j1, int i2, int j2) {
    return j1 < j2 && x.is_ancestor(i1, i2) == y.is_ancestor(j1, j2);
}

}

bool is_valid_mapping(const PreorderView& x, const PreorderView& y, const TreeMapping& mapping) {
    std::vector<char> used_x(x.size(), 0), used_y(y.size(), 0);
    for (auto [i, j] : mapping.pairs) {
        if (i < 0 || j < 0 || static_cast<size_t>(i) >= x.size() || static_cast<size_t>(j) >= y.size()) {
            return false;
        }
        if (used_x[i]++ || used_y[j]++) {
            return false;
        }
    }
    auto pairs = mapping.pairs;
    std::sort(pairs.begin(), pairs.end());
    for (size_t p = 0; p < pairs.size(); ++p) {
        for (size_t q = p + 1; q < pairs.size(); ++q) {
            if (!compatible(x, y, pairs[p].first, pairs[p].second, pairs[q].first, pairs[q].second)) {
                return false;
            }
        }
    }
    return true;
}

double mapping_cost(const PreorderView& x, const PreorderView& y, const TreeMapping& mapping, const CostModel& c) {
    std::vector<char> mapped_x(x.size(), 0), mapped_y(y.size(), 0);
    double total = 0.0;
    for (auto [i, j] : mapping.pairs) {
        mapped_x[i] = mapped_y[j] = 1;
        total += c.cost(x.labels[i], y.labels[j]);
    }
    for (size_t i = 0; i < x.size(); ++i) {
        if (!mapped_x[i]) {
            total += c.cost(x.labels[i], c.gap());
        }
    }
    for (size_t j = 0; j < y.size(); ++j) {
        if (!mapped_y[j]) {
            total += c.cost(c.gap(), y.labels[j]);
        }
    }
    return total;
}

void for_each_mapping(const PreorderView& x, const PreorderView& y,
                      const std::function<void(const TreeMapping&)>& visit) {
    TreeMapping current;
    std::vector<char> used_y(y.size(), 0);
    const int n = static_cast<int>(x.size());
    const int m = static_cast<int>(y.size());

    std::function<void(int)> extend = [&](int i) {
        if (i == n) {
            visit(current);
            return;
        }
        extend(i + 1);
        for (int j = 0; j < m; ++j) {
            if (used_y[j]) {
                continue;
            }
            bool ok = true;
            for (auto [pi, pj] : current.pairs) {
                if (!compatible(x, y, pi, pj, i, j)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) {
                continue;
            }
            used_y[j] = 1;
            current.pairs.emplace_back(i, j);
            extend(i + 1);
            current.pairs.pop_back();
            used_y[j] = 0;
        }
    };
    extend(0);
}

}
