#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "tedl/analysis.hpp"
#include "tedl/bedl.hpp"
#include "tedl/classifiers.hpp"
#include "tedl/coopt.hpp"
#include "tedl/dataset.hpp"
#include "tedl/experiment.hpp"
#include "tedl/gesl.hpp"
#include "tedl/pairwise.hpp"
#include "tedl/ted.hpp"

using namespace tedl;
using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream in(line);
    for (std::string field; std::getline(in, field, sep);) out.push_back(field);
    return out;
}

// Labels named in a cost matrix header ("label,x,...,-") or in the first
// column of an embedding file.
Alphabet alphabet_of_costs(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("cannot read " + path);
    auto fields = split(line, ',');
    if (fields.size() < 2) throw std::runtime_error(path + ":1: not a cost matrix header");
    return Alphabet(std::vector<std::string>(fields.begin() + 1, fields.end() - 1));
}

Alphabet alphabet_of_embedding(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::vector<std::string> labels;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (!line.empty()) labels.push_back(split(line, ',').at(0));
    }
    return Alphabet(labels);
}

struct CostSource {
    std::string costs, embedding, alphabet;

    void add_options(CLI::App* app) {
        auto* c = app->add_option("--costs", costs, "cost matrix CSV (header label,x1,...,-)");
        auto* e = app->add_option("--embedding", embedding, "embedding CSV (label,v1,...)");
        c->excludes(e);
        app->add_option("--alphabet", alphabet, "comma-separated labels for unit costs");
    }

    Alphabet alphabet_for(const std::vector<std::string>& trees) const {
        if (!costs.empty()) return alphabet_of_costs(costs);
        if (!embedding.empty()) return alphabet_of_embedding(embedding);
        if (!alphabet.empty()) return Alphabet(split(alphabet, ','));
        Alphabet grown;
        for (const auto& t : trees) parse_bracket_extend(t, grown);
        return grown;
    }

    std::unique_ptr<CostModel> model(const Alphabet& a) const {
        if (!costs.empty()) return std::make_unique<ExplicitCostMatrix>(read_cost_matrix_csv(costs, a));
        if (!embedding.empty()) return std::make_unique<EmbeddingCostModel>(read_embedding_csv(embedding, a));
        return std::make_unique<ExplicitCostMatrix>(ExplicitCostMatrix::unit(a.size()));
    }
};

void write_json(const std::string& path, const json& j) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

double beta_for(int k, size_t m, double scale) {
    return 2.0 * k * static_cast<double>(m) * scale;
}

LogDetSign sign_from(const std::string& s) {
    if (s == "add") return LogDetSign::add;
    if (s == "subtract") return LogDetSign::subtract;
    throw std::invalid_argument("log-det sign must be add or subtract");
}

ScriptRefresh refresh_from(const std::string& s) {
    if (s == "per-phase") return ScriptRefresh::per_phase;
    if (s == "frozen") return ScriptRefresh::frozen;
    throw std::invalid_argument("refresh must be per-phase or frozen");
}

}

int main(int argc, char** argv) {
    CLI::App app{"Tree edit distance learning: TED, co-optimal script summaries, BEDL and GESL"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

    // generate-strings
    auto* gen = app.add_subcommand("generate-strings", "two-class strings data set as JSON");
    uint64_t gen_seed = 0;
    int per_class = 100;
    std::string gen_out;
    gen->add_option("--seed", gen_seed)->required();
    gen->add_option("--per-class", per_class);
    gen->add_option("--out", gen_out)->required();

    // ted
    auto* ted_cmd = app.add_subcommand("ted", "edit distance of two trees, or all pairs of a data set");
    std::string tx, ty, ted_data, ted_out, ted_labels;
    CostSource ted_costs;
    bool ted_parallel = true;
    ted_cmd->add_option("x", tx, "first tree in bracket notation");
    ted_cmd->add_option("y", ty, "second tree in bracket notation");
    ted_cmd->add_option("--data", ted_data, "data set JSON; writes the m x m distance matrix");
    ted_cmd->add_option("--out", ted_out, "distance matrix CSV (with --data)");
    ted_cmd->add_option("--labels-out", ted_labels, "class labels CSV (with --data)");
    ted_cmd->add_flag("!--serial", ted_parallel, "use the single-threaded kernel");
    ted_costs.add_options(ted_cmd);

    // coopt
    auto* coopt_cmd = app.add_subcommand("coopt", "average of all co-optimal edit scripts between two trees, P as CSV");
    std::string cx, cy;
    CostSource coopt_costs;
    bool single = false;
    coopt_cmd->add_option("x", cx)->required();
    coopt_cmd->add_option("y", cy)->required();
    coopt_cmd->add_flag("--single", single, "one backtrace instead of the average");
    coopt_costs.add_options(coopt_cmd);

    // mglvq-fit
    auto* mglvq_cmd = app.add_subcommand("mglvq-fit", "median GLVQ on a distance matrix");
    std::string mg_d, mg_l, mg_out;
    int mg_k = 1;
    uint64_t mg_seed = 0;
    mglvq_cmd->add_option("--distances", mg_d)->required();
    mglvq_cmd->add_option("--labels", mg_l)->required();
    mglvq_cmd->add_option("--k", mg_k, "prototypes per class");
    mglvq_cmd->add_option("--seed", mg_seed);
    mglvq_cmd->add_option("--out", mg_out, "model JSON (default stdout)");

    // train-bedl
    auto* bedl_cmd = app.add_subcommand("train-bedl", "learn a label embedding with BEDL");
    std::string bd_data, bd_out, bd_sign = "subtract", bd_refresh = "per-phase";
    BedlConfig bd;
    double bd_scale = 1e-4;
    uint64_t bd_seed = 0;
    bool bd_single = false;
    bedl_cmd->add_option("--data", bd_data)->required();
    bedl_cmd->add_option("--k", bd.k, "prototypes per class");
    bedl_cmd->add_option("--beta-scale", bd_scale, "beta = 2 K m * scale");
    bedl_cmd->add_option("--budget", bd.budget, "gradient evaluations per metric phase");
    bedl_cmd->add_option("--max-outer", bd.max_outer);
    bedl_cmd->add_option("--seed", bd_seed)->required();
    bedl_cmd->add_option("--log-det-sign", bd_sign, "subtract or add");
    bedl_cmd->add_option("--refresh", bd_refresh, "per-phase or frozen");
    bedl_cmd->add_flag("--single-script", bd_single, "one backtrace instead of co-optimal averaging");
    bedl_cmd->add_option("--out", bd_out, "embedding CSV")->required();

    // train-gesl
    auto* gesl_cmd = app.add_subcommand("train-gesl", "learn an explicit cost matrix with GESL");
    std::string gs_data, gs_out;
    GeslConfig gs;
    double gs_scale = 1e-4;
    gesl_cmd->add_option("--data", gs_data)->required();
    gesl_cmd->add_option("--k", gs.k, "neighbors per example on each side");
    gesl_cmd->add_option("--beta-scale", gs_scale, "beta = 2 K m * scale");
    gesl_cmd->add_option("--iterations", gs.iterations);
    gesl_cmd->add_option("--out", gs_out, "cost matrix CSV")->required();

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "cross-validated error of a classifier on a distance matrix");
    std::string ev_d, ev_l, ev_classifier = "knn", ev_out;
    int ev_folds = 10, ev_k = 1;
    double ev_lambda = 1e-3;
    uint64_t ev_seed = 0;
    eval_cmd->add_option("--distances", ev_d)->required();
    eval_cmd->add_option("--labels", ev_l)->required();
    eval_cmd->add_option("--classifier", ev_classifier)->check(CLI::IsMember({"knn", "mglvq", "goodness"}));
    eval_cmd->add_option("--folds", ev_folds);
    eval_cmd->add_option("--k", ev_k, "neighbors (knn) or prototypes per class (mglvq)");
    eval_cmd->add_option("--lambda", ev_lambda, "L1 weight (goodness)");
    eval_cmd->add_option("--seed", ev_seed);
    eval_cmd->add_option("--out", ev_out, "per-fold CSV (default stdout)");

    // run-experiment
    auto* run_cmd = app.add_subcommand("run-experiment", "nested cross-validation of a metric-learning method");
    std::string rx_config, rx_data, rx_out, rx_method, rx_json;
    uint64_t rx_seed = 0;
    int rx_outer = 0, rx_inner = 0;
    run_cmd->add_option("--config", rx_config, "ExperimentConfig JSON");
    run_cmd->add_option("--data", rx_data, "data set JSON (default: generated strings)");
    run_cmd->add_option("--seed", rx_seed)->required();
    run_cmd->add_option("--method", rx_method)->check(CLI::IsMember({"none", "gesl", "bedl"}));
    run_cmd->add_option("--outer-folds", rx_outer);
    run_cmd->add_option("--inner-folds", rx_inner);
    run_cmd->add_option("--out", rx_out, "report CSV (default stdout)");
    run_cmd->add_option("--dump-config", rx_json, "write the effective configuration as JSON");

    // embed-export
    auto* exp_cmd = app.add_subcommand("embed-export", "embedding CSV plus its PCA for plotting");
    std::string ex_in, ex_out, ex_pca, ex_mode = "top2";
    exp_cmd->add_option("--embedding", ex_in)->required();
    exp_cmd->add_option("--out", ex_out, "copy of the embedding CSV");
    exp_cmd->add_option("--pca", ex_pca, "PCA CSV: label,pc1,...")->required();
    exp_cmd->add_option("--mode", ex_mode)->check(CLI::IsMember({"top2", "variance95"}));

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (*gen) {
            write_dataset(gen_out, generate_strings(gen_seed, per_class));
        } else if (*ted_cmd) {
            if (!ted_data.empty()) {
                LabeledDataset data = read_dataset(ted_data);
                auto c = ted_costs.model(ted_costs.costs.empty() && ted_costs.embedding.empty()
                                             ? data.alphabet
                                             : ted_costs.alphabet_for({}));
                auto forests = index_forests(data.trees);
                Eigen::MatrixXd d = ted_parallel ? pairwise_ted_parallel(forests, forests, *c)
                                                 : pairwise_ted_serial(forests, forests, *c);
                if (ted_out.empty()) throw std::invalid_argument("--data needs --out");
                write_matrix_csv(ted_out, d);
                if (!ted_labels.empty()) write_labels_csv(ted_labels, data.labels);
            } else {
                if (tx.empty() || ty.empty()) throw std::invalid_argument("give two trees or --data");
                Alphabet a = ted_costs.alphabet_for({tx, ty});
                auto c = ted_costs.model(a);
                std::cout << std::setprecision(17) << ted(parse_bracket(tx, a), parse_bracket(ty, a), *c).distance
                          << '\n';
            }
        } else if (*coopt_cmd) {
            Alphabet a = coopt_costs.alphabet_for({cx, cy});
            auto c = coopt_costs.model(a);
            Tree x = parse_bracket(cx, a), y = parse_bracket(cy, a);
            auto dp = ted(x, y, *c);
            ScriptSummary s = single ? single_backtrace(x, y, *c, dp) : coopt_average(x, y, *c, dp);
            std::cout << std::setprecision(17);
            for (Eigen::Index i = 0; i < s.P.rows(); ++i) {
                for (Eigen::Index j = 0; j < s.P.cols(); ++j) std::cout << (j ? "," : "") << s.P(i, j);
                std::cout << '\n';
            }
            spdlog::info("distance {}, {} co-optimal mapping(s)", dp.distance, std::exp(s.log_count));
        } else if (*mglvq_cmd) {
            Eigen::MatrixXd d = read_matrix_csv(mg_d);
            std::vector<int> labels = read_labels_csv(mg_l);
            MglvqOptions options;
            options.k = mg_k;
            options.seed = mg_seed;
            MglvqFit fit = median_glvq_fit(d, labels, options);
            write_json(mg_out, {{"prototypes", fit.model.prototypes},
                                {"classes", fit.model.classes},
                                {"swaps", fit.swaps},
                                {"training_error", fit.training_error},
                                {"objective_trace", fit.objective_trace}});
        } else if (*bedl_cmd) {
            LabeledDataset data = read_dataset(bd_data);
            bd.beta = beta_for(bd.k, data.size(), bd_scale);
            bd.log_det_sign = sign_from(bd_sign);
            bd.refresh = refresh_from(bd_refresh);
            bd.average_scripts = !bd_single;
            auto start = std::chrono::steady_clock::now();
            BedlResult r = bedl_fit(data.trees, data.labels, data.alphabet, bd, bd_seed);
            double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            write_embedding_csv(bd_out, r.embedding, data.alphabet);
            for (const auto& p : r.history) {
                spdlog::info("phase {}: loss {:.6f} -> {:.6f} ({} evaluations, {})", p.outer, p.loss_before,
                             p.loss_after, p.evaluations, p.solver_stop);
            }
            spdlog::info("beta {:.4g}, stopped: {}, {:.2f} s", bd.beta, r.stop_reason, seconds);
        } else if (*gesl_cmd) {
            LabeledDataset data = read_dataset(gs_data);
            gs.beta = beta_for(gs.k, data.size(), gs_scale);
            GeslResult r = gesl_fit(data.trees, data.labels, data.alphabet, gs);
            write_cost_matrix_csv(gs_out, r.costs, data.alphabet);
            PseudometricReport check = validate_pseudometric(r.costs);
            spdlog::info("beta {:.4g}, eta {:.4f}, objective {:.6f}, {} positive / {} negative pairs, {} axiom "
                         "violation(s)",
                         gs.beta, r.eta, r.objective_trace.empty() ? 0.0 : r.objective_trace.back(),
                         r.positive_pairs, r.negative_pairs, check.violations.size());
        } else if (*eval_cmd) {
            Eigen::MatrixXd d = read_matrix_csv(ev_d);
            std::vector<int> labels = read_labels_csv(ev_l);
            if (d.rows() != d.cols() || static_cast<size_t>(d.rows()) != labels.size()) {
                throw std::invalid_argument("distance matrix must be m x m for m labels");
            }
            std::vector<int> fold = stratified_folds(labels, ev_folds, ev_seed);
            std::ostringstream csv;
            csv << "fold,classifier,error\n" << std::setprecision(10);
            for (int f = 0; f < ev_folds; ++f) {
                std::vector<int> train, test;
                for (size_t i = 0; i < labels.size(); ++i) (fold[i] == f ? test : train).push_back(static_cast<int>(i));
                std::vector<int> ltrain, ltest;
                for (int i : train) ltrain.push_back(labels[i]);
                for (int i : test) ltest.push_back(labels[i]);
                Eigen::MatrixXd dtt = d(test, train);
                std::vector<int> predicted;
                if (ev_classifier == "knn") {
                    predicted = knn_classify(dtt, ltrain, ev_k);
                } else if (ev_classifier == "mglvq") {
                    MglvqOptions options;
                    options.k = ev_k;
                    options.seed = ev_seed;
                    MglvqFit fit = median_glvq_fit(d(train, train), ltrain, options);
                    predicted = classify_nearest_prototype(prototype_columns(dtt, fit.model), fit.model);
                } else {
                    GoodnessModel g = goodness_fit(d(train, train), ltrain, ev_lambda);
                    predicted = goodness_predict(g, goodness_similarity(dtt));
                }
                csv << f << ',' << ev_classifier << ',' << error_rate(predicted, ltest) << '\n';
            }
            if (ev_out.empty()) {
                std::cout << csv.str();
            } else {
                std::ofstream(ev_out) << csv.str();
            }
        } else if (*run_cmd) {
            ExperimentConfig config;
            if (!rx_config.empty()) {
                std::ifstream in(rx_config);
                if (!in) throw std::runtime_error("cannot open " + rx_config);
                config = config_from_json(json::parse(in));
            }
            config.seed = rx_seed;
            if (!rx_method.empty()) config.method = method_from_string(rx_method);
            if (rx_outer > 0) config.outer_folds = rx_outer;
            if (rx_inner > 0) config.inner_folds = rx_inner;
            if (!rx_json.empty()) write_json(rx_json, config_to_json(config));
            LabeledDataset data = rx_data.empty() ? generate_strings(config.seed) : read_dataset(rx_data);
            ExperimentReport report = run_experiment(config, data);
            if (rx_out.empty()) {
                report.write_csv(std::cout);
            } else {
                std::ofstream out(rx_out);
                report.write_csv(out);
            }
        } else if (*exp_cmd) {
            Alphabet a = alphabet_of_embedding(ex_in);
            EmbeddingCostModel e = read_embedding_csv(ex_in, a);
            if (!ex_out.empty()) write_embedding_csv(ex_out, e, a);
            // the gap sits at the origin and is projected with the labels
            Eigen::MatrixXd points(e.matrix().rows(), e.matrix().cols() + 1);
            points << e.matrix(), Eigen::VectorXd::Zero(e.matrix().rows());
            PcaResult pca = pca_project(points, ex_mode == "top2" ? PcaMode::top2 : PcaMode::variance95);
            std::ofstream out(ex_pca);
            if (!out) throw std::runtime_error("cannot write " + ex_pca);
            out << "label";
            for (Eigen::Index k = 0; k < pca.projected.rows(); ++k) out << ",pc" << k + 1;
            out << '\n' << std::setprecision(10);
            for (Eigen::Index j = 0; j < pca.projected.cols(); ++j) {
                out << (j < static_cast<Eigen::Index>(a.size()) ? a.label(static_cast<Label>(j)) : std::string("-"));
                for (Eigen::Index k = 0; k < pca.projected.rows(); ++k) out << ',' << pca.projected(k, j);
                out << '\n';
            }
            std::ostringstream explained;
            for (Eigen::Index k = 0; k < pca.explained.size(); ++k) explained << ' ' << pca.explained(k);
            spdlog::info("explained variance:{}", explained.str());
        }
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
