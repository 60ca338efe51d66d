#include "tedl/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "tedl/mglvq.hpp"
#include "tedl/pairwise.hpp"

namespace tedl {

std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, uint64_t seed) {
    if (folds < 2) {
        throw std::invalid_argument("stratified_folds: need at least two folds");
    }
    std::map<int, std::vector<int>> members;
    for (size_t i = 0; i < labels.size(); ++i) {
        members[labels[i]].push_back(static_cast<int>(i));
    }
    std::vector<int> out(labels.size(), -1);
    std::mt19937_64 rng(seed);
    size_t offset = 0;
    for (auto& [cls, items] : members) {
        if (static_cast<int>(items.size()) < folds) {
            throw std::invalid_argument("stratified_folds: class " + std::to_string(cls) + " has " +
                                        std::to_string(items.size()) + " member(s), fewer than " +
                                        std::to_string(folds) + " folds");
        }
        std::shuffle(items.begin(), items.end(), rng);
        for (size_t r = 0; r < items.size(); ++r) {
            out[items[r]] = static_cast<int>((offset + r) % folds);
        }
        offset += items.size();
    }
    return out;
}

std::string to_string(Method m) {
    switch (m) {
        case Method::none: return "none";
        case Method::gesl: return "gesl";
        case Method::bedl: return "bedl";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "none") return Method::none;
    if (s == "gesl") return Method::gesl;
    if (s == "bedl") return Method::bedl;
    throw std::invalid_argument("unknown method '" + s + "' (expected none, gesl or bedl)");
}

ExperimentConfig::ExperimentConfig() {
    for (int k = 1; k <= 15; ++k) {
        k_grid.push_back(k);
        knn_grid.push_back(k);
    }
    for (int p = 0; p < 5; ++p) {
        lambda_grid.push_back(std::pow(10.0, -5.0 + 6.0 * p / 4.0));
        beta_scale_grid.push_back(std::pow(10.0, -6.0 + p));
    }
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    return {
        {"outer_folds", c.outer_folds},
        {"inner_folds", c.inner_folds},
        {"seed", c.seed},
        {"method", to_string(c.method)},
        {"k_grid", c.k_grid},
        {"knn_grid", c.knn_grid},
        {"lambda_grid", c.lambda_grid},
        {"beta_scale_grid", c.beta_scale_grid},
        {"gesl_distance", c.gesl_distance == GeslDistance::ted ? "ted" : "pseudo"},
        {"bedl",
         {{"budget", c.bedl.budget},
          {"max_outer", c.bedl.max_outer},
          {"average_scripts", c.bedl.average_scripts},
          {"refresh", c.bedl.refresh == ScriptRefresh::per_phase ? "per_phase" : "frozen"},
          {"log_det_sign", c.bedl.log_det_sign == LogDetSign::add ? "add" : "subtract"},
          {"parallel", c.bedl.parallel}}},
        {"gesl", {{"iterations", c.gesl.iterations}, {"step", c.gesl.step}, {"parallel", c.gesl.parallel}}},
        {"goodness", {{"iterations", c.goodness.iterations}, {"step", c.goodness.step}}},
    };
}

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) {
            throw std::invalid_argument("unknown config field '" + where + it.key() + "'");
        }
    }
}

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& target) {
    if (j.contains(key)) {
        target = j.at(key).get<T>();
    }
}

}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    reject_unknown(j,
                   {"outer_folds", "inner_folds", "seed", "method", "k_grid", "knn_grid", "lambda_grid",
                    "beta_scale_grid", "gesl_distance", "bedl", "gesl", "goodness"},
                   "");
    read_field(j, "outer_folds", c.outer_folds);
    read_field(j, "inner_folds", c.inner_folds);
    read_field(j, "seed", c.seed);
    if (j.contains("method")) c.method = method_from_string(j.at("method").get<std::string>());
    read_field(j, "k_grid", c.k_grid);
    read_field(j, "knn_grid", c.knn_grid);
    read_field(j, "lambda_grid", c.lambda_grid);
    read_field(j, "beta_scale_grid", c.beta_scale_grid);
    if (j.contains("gesl_distance")) {
        std::string s = j.at("gesl_distance").get<std::string>();
        if (s != "ted" && s != "pseudo") throw std::invalid_argument("gesl_distance must be 'ted' or 'pseudo'");
        c.gesl_distance = s == "ted" ? GeslDistance::ted : GeslDistance::pseudo;
    }
    if (j.contains("bedl")) {
        const auto& b = j.at("bedl");
        reject_unknown(b, {"budget", "max_outer", "average_scripts", "refresh", "log_det_sign", "parallel"}, "bedl.");
        read_field(b, "budget", c.bedl.budget);
        read_field(b, "max_outer", c.bedl.max_outer);
        read_field(b, "average_scripts", c.bedl.average_scripts);
        read_field(b, "parallel", c.bedl.parallel);
        if (b.contains("refresh")) {
            std::string s = b.at("refresh").get<std::string>();
            if (s != "per_phase" && s != "frozen") throw std::invalid_argument("bedl.refresh must be 'per_phase' or 'frozen'");
            c.bedl.refresh = s == "per_phase" ? ScriptRefresh::per_phase : ScriptRefresh::frozen;
        }
        if (b.contains("log_det_sign")) {
            std::string s = b.at("log_det_sign").get<std::string>();
            if (s != "add" && s != "subtract") throw std::invalid_argument("bedl.log_det_sign must be 'add' or 'subtract'");
            c.bedl.log_det_sign = s == "add" ? LogDetSign::add : LogDetSign::subtract;
        }
    }
    if (j.contains("gesl")) {
        const auto& g = j.at("gesl");
        reject_unknown(g, {"iterations", "step", "parallel"}, "gesl.");
        read_field(g, "iterations", c.gesl.iterations);
        read_field(g, "step", c.gesl.step);
        read_field(g, "parallel", c.gesl.parallel);
    }
    if (j.contains("goodness")) {
        const auto& g = j.at("goodness");
        reject_unknown(g, {"iterations", "step"}, "goodness.");
        read_field(g, "iterations", c.goodness.iterations);
        read_field(g, "step", c.goodness.step);
    }
    if (c.outer_folds < 2 || c.inner_folds < 2) throw std::invalid_argument("need at least two outer and inner folds");
    if (c.k_grid.empty() || c.knn_grid.empty() || c.lambda_grid.empty() || c.beta_scale_grid.empty()) {
        throw std::invalid_argument("hyperparameter grids must not be empty");
    }
    return c;
}

std::map<std::string, std::pair<double, double>> ExperimentReport::summary() const {
    std::map<std::string, std::vector<double>> values;
    for (const auto& f : folds) {
        for (const auto& [name, err] : f.errors) {
            values[name].push_back(err);
        }
    }
    std::map<std::string, std::pair<double, double>> out;
    for (const auto& [name, v] : values) {
        double mean = 0.0;
        for (double e : v) mean += e;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double e : v) var += (e - mean) * (e - mean);
        out[name] = {mean, v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0};
    }
    return out;
}

std::pair<double, double> ExperimentReport::runtime_summary() const {
    if (folds.empty()) {
        return {0.0, 0.0};
    }
    double mean = 0.0;
    for (const auto& f : folds) mean += f.seconds;
    mean /= static_cast<double>(folds.size());
    double var = 0.0;
    for (const auto& f : folds) var += (f.seconds - mean) * (f.seconds - mean);
    return {mean, folds.size() > 1 ? std::sqrt(var / static_cast<double>(folds.size() - 1)) : 0.0};
}

void ExperimentReport::write_csv(std::ostream& out, bool runtimes) const {
    out << "fold,classifier,error,runtime_s,k,k_eval,k_knn,lambda,beta_scale,beta\n";
    out << std::setprecision(10);
    auto seconds = [&](double s) { return runtimes ? std::to_string(s) : std::string(); };
    for (const auto& f : folds) {
        for (const auto& [name, err] : f.errors) {
            out << f.fold << ',' << name << ',' << err << ',' << seconds(f.seconds) << ',' << f.k << ',' << f.k_eval
                << ',' << f.k_knn << ',' << f.lambda << ',' << f.beta_scale << ',' << f.beta << '\n';
        }
    }
    auto runtime = runtime_summary();
    for (const auto& [name, ms] : summary()) {
        out << "mean," << name << ',' << ms.first << ',' << seconds(runtime.first) << ",,,,,,\n";
        out << "std," << name << ',' << ms.second << ',' << seconds(runtime.second) << ",,,,,,\n";
    }
}

namespace {

using Index = std::vector<int>;

Eigen::MatrixXd block(const Eigen::MatrixXd& d, const Index& rows, const Index& cols) {
    return d(rows, cols);
}

std::vector<int> pick(const std::vector<int>& v, const Index& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(v.at(i));
    return out;
}

std::vector<Tree> pick_trees(const std::vector<Tree>& v, const Index& idx) {
    std::vector<Tree> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(v.at(i));
    return out;
}

Index compose(const Index& outer, const Index& inner) {
    Index out;
    out.reserve(inner.size());
    for (int i : inner) out.push_back(outer.at(i));
    return out;
}

struct Split {
    Index train, test;
};

std::vector<Split> make_splits(const std::vector<int>& labels, int folds, uint64_t seed) {
    std::vector<int> fold_of = stratified_folds(labels, folds, seed);
    std::vector<Split> out(folds);
    for (size_t i = 0; i < labels.size(); ++i) {
        for (int f = 0; f < folds; ++f) {
            (fold_of[i] == f ? out[f].test : out[f].train).push_back(static_cast<int>(i));
        }
    }
    return out;
}

int min_class_count(const std::vector<int>& labels) {
    std::map<int, int> count;
    for (int l : labels) ++count[l];
    int lo = std::numeric_limits<int>::max();
    for (auto& [c, n] : count) lo = std::min(lo, n);
    return lo;
}

// Grid entries usable on every inner training set; never empty.
std::vector<int> feasible(const std::vector<int>& grid, int limit) {
    std::vector<int> out;
    for (int g : grid) {
        if (g >= 1 && g <= limit) out.push_back(g);
    }
    if (out.empty()) out.push_back(std::max(1, std::min(limit, *std::min_element(grid.begin(), grid.end()))));
    return out;
}

template <class T, class F>
T argmin_grid(const std::vector<T>& grid, F&& mean_error) {
    T best = grid.front();
    double best_err = std::numeric_limits<double>::infinity();
    for (const T& g : grid) {
        double e = mean_error(g);
        if (e < best_err - 1e-12) {
            best_err = e;
            best = g;
        }
    }
    return best;
}

double mglvq_error(const Eigen::MatrixXd& d_train, const std::vector<int>& y_train, const Eigen::MatrixXd& d_test_train,
                   const std::vector<int>& y_test, int k, uint64_t seed) {
    MglvqOptions options;
    options.k = k;
    options.seed = seed;
    MglvqFit fit = median_glvq_fit(d_train, y_train, options);
    return error_rate(classify_nearest_prototype(prototype_columns(d_test_train, fit.model), fit.model), y_test);
}

double goodness_error(const Eigen::MatrixXd& d_train, const std::vector<int>& y_train, const Eigen::MatrixXd& d_test_train,
                      const std::vector<int>& y_test, double lambda, const GoodnessOptions& options) {
    GoodnessModel model = goodness_fit(d_train, y_train, lambda, options);
    return error_rate(goodness_predict(model, goodness_similarity(d_test_train)), y_test);
}

struct Tuner {
    const Eigen::MatrixXd& d;          // over the outer training set
    const std::vector<int>& y;
    const std::vector<Split>& splits;  // inner, local to the outer training set
    uint64_t seed;

    template <class F>
    double mean(F&& error) const {
        double total = 0.0;
        for (const auto& s : splits) {
            total += error(block(d, s.train, s.train), pick(y, s.train), block(d, s.test, s.train), pick(y, s.test));
        }
        return total / static_cast<double>(splits.size());
    }

    int inner_min_class() const {
        int lo = std::numeric_limits<int>::max();
        for (const auto& s : splits) lo = std::min(lo, min_class_count(pick(y, s.train)));
        return lo;
    }
    int inner_min_size() const {
        size_t lo = std::numeric_limits<size_t>::max();
        for (const auto& s : splits) lo = std::min(lo, s.train.size());
        return static_cast<int>(lo);
    }

    int k(const std::vector<int>& grid) const {
        return argmin_grid(feasible(grid, inner_min_class()), [&](int k) {
            return mean([&](const auto& dt, const auto& yt, const auto& dv, const auto& yv) {
                return mglvq_error(dt, yt, dv, yv, k, seed);
            });
        });
    }
    int knn(const std::vector<int>& grid) const {
        return argmin_grid(feasible(grid, inner_min_size()), [&](int k) {
            return mean([&](const auto&, const auto& yt, const auto& dv, const auto& yv) {
                return error_rate(knn_classify(dv, yt, k), yv);
            });
        });
    }
    double lambda(const std::vector<double>& grid, const GoodnessOptions& options) const {
        return argmin_grid(grid, [&](double l) {
            return mean([&](const auto& dt, const auto& yt, const auto& dv, const auto& yv) {
                return goodness_error(dt, yt, dv, yv, l, options);
            });
        });
    }
};

// Folded unit-cost single backtraces for every ordered pair of the dataset.
class PseudoTable {
public:
    PseudoTable(const LabeledDataset& data, bool parallel) : m_(data.size()) {
        std::vector<std::pair<int, int>> requests;
        for (size_t i = 0; i < m_; ++i)
            for (size_t j = 0; j < m_; ++j) requests.emplace_back(static_cast<int>(i), static_cast<int>(j));
        ExplicitCostMatrix unit = ExplicitCostMatrix::unit(data.alphabet.size());
        auto contexts = parallel ? make_contexts_parallel(data.trees, data.trees, requests, unit, ScriptPolicy::single)
                                 : make_contexts_serial(data.trees, data.trees, requests, unit, ScriptPolicy::single);
        weights_.reserve(contexts.size());
        for (auto& c : contexts) weights_.push_back(std::move(c.weights));
    }

    Eigen::MatrixXd matrix(const ExplicitCostMatrix& c) const {
        Eigen::MatrixXd d(m_, m_);
        for (size_t i = 0; i < m_; ++i) {
            for (size_t j = 0; j < m_; ++j) {
                double total = 0.0;
                for (const auto& w : weights_[i * m_ + j]) total += w.weight * c.cost(w.x, w.y);
                d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = total;
            }
        }
        return d;
    }

private:
    size_t m_;
    std::vector<std::vector<LabelPairWeight>> weights_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}

ExperimentReport run_experiment(const ExperimentConfig& config, const LabeledDataset& data) {
    data.validate();
    ExperimentReport report;
    report.config = config;

    const std::vector<Split> outer = make_splits(data.labels, config.outer_folds, config.seed);
    std::vector<std::vector<Split>> inner;
    for (int f = 0; f < config.outer_folds; ++f) {
        const auto& o = outer[f];
        std::set<int> train(o.train.begin(), o.train.end());
        for (int t : o.test) {
            if (train.count(t)) throw std::logic_error("run_experiment: test item in the training fold");
        }
        inner.push_back(make_splits(pick(data.labels, o.train), config.inner_folds, config.seed + 1 + f));
    }

    const ExplicitCostMatrix unit = ExplicitCostMatrix::unit(data.alphabet.size());
    const Eigen::MatrixXd d0 = pairwise_ted(data.trees, unit);
    std::optional<PseudoTable> pseudo;
    if (config.method == Method::gesl && config.gesl_distance == GeslDistance::pseudo) {
        pseudo.emplace(data, config.gesl.parallel);
    }
    auto gesl_distances = [&](const ExplicitCostMatrix& c) {
        return pseudo ? pseudo->matrix(c) : pairwise_ted(data.trees, c);
    };

    for (int f = 0; f < config.outer_folds; ++f) {
        const Split& o = outer[f];
        const std::vector<Split>& splits = inner[f];
        const uint64_t fold_seed = config.seed * 1000003ULL + static_cast<uint64_t>(f);
        const std::vector<int> y_train = pick(data.labels, o.train);
        const std::vector<int> y_test = pick(data.labels, o.test);
        const std::vector<Tree> train_trees = pick_trees(data.trees, o.train);

        FoldReport r;
        r.fold = f;
        r.train_size = o.train.size();
        r.test_size = o.test.size();

        const Eigen::MatrixXd d0_train = block(d0, o.train, o.train);
        Tuner initial{d0_train, y_train, splits, fold_seed};
        r.k = initial.k(config.k_grid);

        Eigen::MatrixXd d_eval = d0;
        if (config.method == Method::bedl) {
            BedlConfig bc = config.bedl;
            bc.k = r.k;
            auto beta_for = [&](double scale, size_t m) { return 2.0 * r.k * static_cast<double>(m) * scale; };
            double scale = config.beta_scale_grid.front();
            if (config.beta_scale_grid.size() > 1) {
                scale = argmin_grid(config.beta_scale_grid, [&](double s) {
                    double total = 0.0;
                    for (const auto& sp : splits) {
                        BedlConfig trial = bc;
                        trial.beta = beta_for(s, sp.train.size());
                        Index global_train = compose(o.train, sp.train);
                        BedlResult res = bedl_fit(pick_trees(data.trees, global_train), pick(data.labels, global_train),
                                                  data.alphabet, trial, fold_seed);
                        std::vector<Tree> protos;
                        for (int p : res.prototypes.prototypes) protos.push_back(data.trees[global_train[p]]);
                        Index global_val = compose(o.train, sp.test);
                        Eigen::MatrixXd dv = pairwise_ted(pick_trees(data.trees, global_val), protos, res.embedding);
                        total += error_rate(classify_nearest_prototype(dv, res.prototypes), pick(data.labels, global_val));
                    }
                    return total / static_cast<double>(splits.size());
                });
            }
            r.beta_scale = scale;
            r.beta = bc.beta = beta_for(scale, o.train.size());
            auto start = std::chrono::steady_clock::now();
            BedlResult res = bedl_fit(train_trees, y_train, data.alphabet, bc, fold_seed);
            r.seconds = seconds_since(start);
            d_eval = pairwise_ted(data.trees, res.embedding);
            r.embedding = res.embedding;
        } else if (config.method == Method::gesl) {
            GeslConfig gc = config.gesl;
            gc.k = r.k;
            const double lambda0 = initial.lambda(config.lambda_grid, config.goodness);
            auto beta_for = [&](double scale, size_t m) { return 2.0 * r.k * static_cast<double>(m) * scale; };
            double scale = config.beta_scale_grid.front();
            if (config.beta_scale_grid.size() > 1) {
                scale = argmin_grid(config.beta_scale_grid, [&](double s) {
                    double total = 0.0;
                    for (const auto& sp : splits) {
                        GeslConfig trial = gc;
                        trial.beta = beta_for(s, sp.train.size());
                        Index global_train = compose(o.train, sp.train);
                        Eigen::MatrixXd d0_inner = block(d0, global_train, global_train);
                        GeslResult g = gesl_fit(pick_trees(data.trees, global_train), pick(data.labels, global_train),
                                                data.alphabet, trial, &d0_inner);
                        Eigen::MatrixXd dl = gesl_distances(g.costs);
                        Index global_val = compose(o.train, sp.test);
                        total += goodness_error(block(dl, global_train, global_train), pick(data.labels, global_train),
                                                block(dl, global_val, global_train), pick(data.labels, global_val),
                                                lambda0, config.goodness);
                    }
                    return total / static_cast<double>(splits.size());
                });
            }
            r.beta_scale = scale;
            r.beta = gc.beta = beta_for(scale, o.train.size());
            auto start = std::chrono::steady_clock::now();
            GeslResult g = gesl_fit(train_trees, y_train, data.alphabet, gc, &d0_train);
            r.seconds = seconds_since(start);
            d_eval = gesl_distances(g.costs);
            r.costs = g.costs;
        }

        const Eigen::MatrixXd d_train = block(d_eval, o.train, o.train);
        const Eigen::MatrixXd d_test = block(d_eval, o.test, o.train);
        Tuner tuned{d_train, y_train, splits, fold_seed};
        r.k_eval = config.method == Method::none ? r.k : tuned.k(config.k_grid);
        r.k_knn = tuned.knn(config.knn_grid);
        r.lambda = tuned.lambda(config.lambda_grid, config.goodness);
        r.errors["mglvq"] = mglvq_error(d_train, y_train, d_test, y_test, r.k_eval, fold_seed);
        r.errors["knn"] = error_rate(knn_classify(d_test, y_train, r.k_knn), y_test);
        r.errors["goodness"] = goodness_error(d_train, y_train, d_test, y_test, r.lambda, config.goodness);
        spdlog::info("fold {}: knn {:.3f} mglvq {:.3f} goodness {:.3f} ({:.2f} s)", f, r.errors["knn"], r.errors["mglvq"],
                     r.errors["goodness"], r.seconds);
        report.folds.push_back(std::move(r));
    }
    return report;
}

}
