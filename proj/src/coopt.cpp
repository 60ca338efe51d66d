#include "tedl/coopt.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tedl/mapping.hpp"

namespace tedl {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
    if (a == neg_inf) {
        return b;
    }
    if (b == neg_inf) {
        return a;
    }
    double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void check_fresh(const Tree& x, const Tree& y, const CostModel& c0, const DistanceResult& dp) {
    if (!dp.x || !dp.y || !(*dp.x == ForestIndex(x)) || !(*dp.y == ForestIndex(y))) {
        throw std::logic_error("DP tables were computed for a different tree pair");
    }
    const int n = dp.x->size();
    const int m = dp.y->size();
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= m; ++j) {
            Label li = i < n ? dp.x->labels[i] : c0.gap();
            Label lj = j < m ? dp.y->labels[j] : c0.gap();
            if (std::abs(c0.cost(li, lj) - dp.local(i, j)) > cooptimal_tolerance) {
                throw std::logic_error("DP tables were computed under a different cost function");
            }
        }
    }
}

bool tight(double edge, double optimum) {
    return std::isfinite(edge) && edge <= optimum + cooptimal_tolerance;
}

// One outgoing choice of a derivation state.
struct Edge {
    enum Kind { insert, remove, match, to_must } kind;
    size_t child;         // first child cell
    bool child_must;      // whether the first child is a must-state
    size_t rest = 0;      // second child of a match (always free)
    double value;         // edge cost plus optimal child values
};

/*
 * Enumerates the edges of free or must state (ia, ib, b, d). Each mapping
 * corresponds to exactly one derivation: a free state either deletes its
 * rightmost root v or hands over to the must state, where v is mapped; a must
 * state either inserts w or matches v with w.
 */
template <class Visit>
void for_each_edge(const ForestIndex& x, const ForestIndex& y, const DistanceResult& dp,
                   int ia, int ib, int b, int d, bool must, Visit&& visit) {
    const ForestTables& t = dp.tables;
    const int a = x.left_ends[ia];
    const int c = y.left_ends[ib];
    const int n = x.size();
    const int m = y.size();
    if (b < a && d < c) {
        return;
    }
    if (b < a) {
        if (!must) {
            size_t child = t.cell(ia, ib, b, d - 1);
            visit(Edge{Edge::insert, child, false, 0, t.free_table[child] + dp.local(n, d)});
        }
        return;
    }
    if (d < c) {
        if (!must) {
            size_t child = t.cell(ia, ib, b - 1, d);
            visit(Edge{Edge::remove, child, false, 0, t.free_table[child] + dp.local(b, m)});
        }
        return;
    }
    if (!must) {
        size_t child = t.cell(ia, ib, b - 1, d);
        visit(Edge{Edge::remove, child, false, 0, t.free_table[child] + dp.local(b, m)});
        size_t self = t.cell(ia, ib, b, d);
        visit(Edge{Edge::to_must, self, true, 0, t.must_table[self]});
        return;
    }
    size_t shorter = t.cell(ia, ib, b, d - 1);
    visit(Edge{Edge::insert, shorter, true, 0, t.must_table[shorter] + dp.local(n, d)});
    size_t inner = t.cell(x.left_end_of[b], y.left_end_of[d], b - 1, d - 1);
    size_t rest = t.cell(ia, ib, x.leftmost[b] - 1, y.leftmost[d] - 1);
    visit(Edge{Edge::match, inner, false, rest, t.free_table[inner] + t.free_table[rest] + dp.local(b, d)});
}

}

ScriptSummary single_backtrace(const Tree& x, const Tree& y, const CostModel& c0, const DistanceResult& dp) {
    check_fresh(x, y, c0, dp);
    const ForestIndex& fx = *dp.x;
    const ForestIndex& fy = *dp.y;
    const ForestTables& t = dp.tables;
    const int n = fx.size();
    const int m = fy.size();

    ScriptSummary s;
    s.P = Eigen::MatrixXd::Zero(n + 1, m + 1);

    struct Frame {
        int ia, ib, b, d;
    };
    std::vector<Frame> stack{{0, 0, n - 1, m - 1}};
    while (!stack.empty()) {
        auto [ia, ib, b, d] = stack.back();
        stack.pop_back();
        const int a = fx.left_ends[ia];
        const int c = fy.left_ends[ib];
        if (b < a && d < c) {
            continue;
        }
        if (b < a) {
            s.P(n, fy.preorder_index[d]) = 1.0;
            stack.push_back({ia, ib, b, d - 1});
            continue;
        }
        if (d < c) {
            s.P(fx.preorder_index[b], m) = 1.0;
            stack.push_back({ia, ib, b - 1, d});
            continue;
        }
        const double here = t.free(ia, ib, b, d);
        const int lv = fx.leftmost[b];
        const int lw = fy.leftmost[d];
        const double match = t.free(fx.left_end_of[b], fy.left_end_of[d], b - 1, d - 1) +
                             t.free(ia, ib, lv - 1, lw - 1) + dp.local(b, d);
        if (tight(match, here)) {
            s.P(fx.preorder_index[b], fy.preorder_index[d]) = 1.0;
            stack.push_back({fx.left_end_of[b], fy.left_end_of[d], b - 1, d - 1});
            stack.push_back({ia, ib, lv - 1, lw - 1});
        } else if (tight(t.free(ia, ib, b - 1, d) + dp.local(b, m), here)) {
            s.P(fx.preorder_index[b], m) = 1.0;
            stack.push_back({ia, ib, b - 1, d});
        } else {
            s.P(n, fy.preorder_index[d]) = 1.0;
            stack.push_back({ia, ib, b, d - 1});
        }
    }
    return s;
}

ScriptSummary coopt_average(const Tree& x, const Tree& y, const CostModel& c0, const DistanceResult& dp) {
    check_fresh(x, y, c0, dp);
    const ForestIndex& fx = *dp.x;
    const ForestIndex& fy = *dp.y;
    const ForestTables& t = dp.tables;
    const int n = fx.size();
    const int m = fy.size();
    const int nx = static_cast<int>(fx.left_ends.size());
    const int ny = static_cast<int>(fy.left_ends.size());

    // log of the number of optimal derivations below each state
    std::vector<double> log_free(t.num_cells(), neg_inf);
    std::vector<double> log_must(t.num_cells(), neg_inf);
    auto log_of = [&](size_t cell, bool must) { return must ? log_must[cell] : log_free[cell]; };

    auto inside = [&](int ia, int ib, int b, int d, bool must) {
        const size_t here = t.cell(ia, ib, b, d);
        const double optimum = must ? t.must_table[here] : t.free_table[here];
        if (b < fx.left_ends[ia] && d < fy.left_ends[ib]) {
            return must ? neg_inf : 0.0;
        }
        double total = neg_inf;
        for_each_edge(fx, fy, dp, ia, ib, b, d, must, [&](const Edge& e) {
            if (!tight(e.value, optimum)) {
                return;
            }
            double term = log_of(e.child, e.child_must);
            if (e.kind == Edge::match) {
                term += log_free[e.rest];
            }
            total = log_add(total, term);
        });
        return total;
    };

    for (int ia = nx - 1; ia >= 0; --ia) {
        for (int ib = ny - 1; ib >= 0; --ib) {
            for (int b = fx.left_ends[ia] - 1; b <= fx.left_end_owner[ia]; ++b) {
                for (int d = fy.left_ends[ib] - 1; d <= fy.left_end_owner[ib]; ++d) {
                    const size_t here = t.cell(ia, ib, b, d);
                    log_must[here] = inside(ia, ib, b, d, true);
                    log_free[here] = inside(ia, ib, b, d, false);
                }
            }
        }
    }

    const size_t root = t.cell(0, 0, n - 1, m - 1);
    if (!std::isfinite(log_free[root])) {
        throw std::logic_error("no optimal derivation found; DP tables are inconsistent");
    }

    // expected number of visits of each state in a uniformly drawn optimal mapping
    std::vector<double> visit_free(t.num_cells(), 0.0);
    std::vector<double> visit_must(t.num_cells(), 0.0);
    visit_free[root] = 1.0;

    ScriptSummary s;
    s.P = Eigen::MatrixXd::Zero(n + 1, m + 1);
    s.log_count = log_free[root];

    auto outside = [&](int ia, int ib, int b, int d, bool must) {
        const size_t here = t.cell(ia, ib, b, d);
        const double weight = must ? visit_must[here] : visit_free[here];
        if (weight == 0.0) {
            return;
        }
        const double optimum = must ? t.must_table[here] : t.free_table[here];
        const double log_here = log_of(here, must);
        for_each_edge(fx, fy, dp, ia, ib, b, d, must, [&](const Edge& e) {
            if (!tight(e.value, optimum)) {
                return;
            }
            double log_term = log_of(e.child, e.child_must);
            if (e.kind == Edge::match) {
                log_term += log_free[e.rest];
            }
            if (log_term == neg_inf) {
                return;
            }
            const double flow = weight * std::exp(log_term - log_here);
            (e.child_must ? visit_must : visit_free)[e.child] += flow;
            switch (e.kind) {
            case Edge::insert:
                s.P(n, fy.preorder_index[d]) += flow;
                break;
            case Edge::remove:
                s.P(fx.preorder_index[b], m) += flow;
                break;
            case Edge::match:
                visit_free[e.rest] += flow;
                s.P(fx.preorder_index[b], fy.preorder_index[d]) += flow;
                break;
            case Edge::to_must:
                break;
            }
        });
    };

    for (int ia = 0; ia < nx; ++ia) {
        for (int ib = 0; ib < ny; ++ib) {
            for (int b = fx.left_end_owner[ia]; b >= fx.left_ends[ia] - 1; --b) {
                for (int d = fy.left_end_owner[ib]; d >= fy.left_ends[ib] - 1; --d) {
                    outside(ia, ib, b, d, false);
                    outside(ia, ib, b, d, true);
                }
            }
        }
    }
    return s;
}

CooptEnumeration enumerate_coopt(const Tree& x, const Tree& y, const CostModel& c0) {
    if (x.size() + y.size() > enumeration_size_limit) {
        throw std::length_error("co-optimal enumeration refuses trees with more than " +
                                std::to_string(enumeration_size_limit) + " nodes in total");
    }
    PreorderView px = preorder(x);
    PreorderView py = preorder(y);
    const auto n = static_cast<Eigen::Index>(px.size());
    const auto m = static_cast<Eigen::Index>(py.size());

    CooptEnumeration out;
    out.optimum = std::numeric_limits<double>::infinity();
    for_each_mapping(px, py, [&](const TreeMapping& mapping) {
        out.optimum = std::min(out.optimum, mapping_cost(px, py, mapping, c0));
    });

    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n + 1, m + 1);
    for_each_mapping(px, py, [&](const TreeMapping& mapping) {
        if (mapping_cost(px, py, mapping, c0) > out.optimum + cooptimal_tolerance) {
            return;
        }
        ++out.count;
        Eigen::MatrixXd indicator = Eigen::MatrixXd::Zero(n + 1, m + 1);
        indicator.col(m).head(n).setOnes();
        indicator.row(n).head(m).setOnes();
        for (auto [i, j] : mapping.pairs) {
            indicator(i, j) = 1.0;
            indicator(i, m) = 0.0;
            indicator(n, j) = 0.0;
        }
        sum += indicator;
    });
    out.summary.P = sum / static_cast<double>(out.count);
    out.summary.log_count = std::log(static_cast<double>(out.count));
    return out;
}

double summary_cost(const ScriptSummary& s, const PreorderView& x, const PreorderView& y, const CostModel& c) {
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto m = static_cast<Eigen::Index>(y.size());
    if (s.P.rows() != n + 1 || s.P.cols() != m + 1) {
        throw std::invalid_argument("script summary shape does not match the tree pair");
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i <= n; ++i) {
        Label li = i < n ? x.labels[i] : c.gap();
        for (Eigen::Index j = 0; j <= m; ++j) {
            if (s.P(i, j) != 0.0) {
                Label lj = j < m ? y.labels[j] : c.gap();
                total += s.P(i, j) * c.cost(li, lj);
            }
        }
    }
    return total;
}

}
