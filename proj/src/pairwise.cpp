#include "tedl/pairwise.hpp"

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tedl {

std::vector<ForestIndex> index_forests(const std::vector<Tree>& trees) {
    std::vector<ForestIndex> out;
    out.reserve(trees.size());
    for (const auto& t : trees) {
        out.emplace_back(t);
    }
    return out;
}

Eigen::MatrixXd pairwise_ted_serial(const std::vector<ForestIndex>& rows, const std::vector<ForestIndex>& cols,
                                    const CostModel& c) {
    const ExplicitCostMatrix table = materialize(c);
    Eigen::MatrixXd d(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t j = 0; j < cols.size(); ++j) {
            d(i, j) = ted_distance(rows[i], cols[j], table);
        }
    }
    return d;
}

Eigen::MatrixXd pairwise_ted_parallel(const std::vector<ForestIndex>& rows, const std::vector<ForestIndex>& cols,
                                      const CostModel& c) {
    const ExplicitCostMatrix table = materialize(c);
    const long n = static_cast<long>(rows.size());
    const long m = static_cast<long>(cols.size());
    Eigen::MatrixXd d(n, m);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
    for (long cell = 0; cell < n * m; ++cell) {
        try {
            d(cell / m, cell % m) = ted_distance(rows[cell / m], cols[cell % m], table);
        } catch (...) {
#pragma omp critical
            if (!failure) {
                failure = std::current_exception();
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return d;
}

Eigen::MatrixXd pairwise_ted(const std::vector<Tree>& rows, const std::vector<Tree>& cols, const CostModel& c) {
    return pairwise_ted_parallel(index_forests(rows), index_forests(cols), c);
}

Eigen::MatrixXd pairwise_ted(const std::vector<Tree>& trees, const CostModel& c) {
    auto index = index_forests(trees);
    return pairwise_ted_parallel(index, index, c);
}

std::vector<PairContext> make_contexts_serial(const std::vector<Tree>& rows, const std::vector<Tree>& cols,
                                              const std::vector<std::pair<int, int>>& requests, const CostModel& c0,
                                              ScriptPolicy policy) {
    std::vector<PairContext> out;
    out.reserve(requests.size());
    for (auto [i, j] : requests) {
        out.push_back(make_context(rows.at(i), cols.at(j), c0, policy));
    }
    return out;
}

std::vector<PairContext> make_contexts_parallel(const std::vector<Tree>& rows, const std::vector<Tree>& cols,
                                                const std::vector<std::pair<int, int>>& requests, const CostModel& c0,
                                                ScriptPolicy policy) {
    std::vector<PairContext> out(requests.size());
    const long n = static_cast<long>(requests.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
    for (long k = 0; k < n; ++k) {
        try {
            out[k] = make_context(rows.at(requests[k].first), cols.at(requests[k].second), c0, policy);
        } catch (...) {
#pragma omp critical
            if (!failure) {
                failure = std::current_exception();
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return out;
}

int kernel_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}
