#include "tedl/analysis.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <spdlog/spdlog.h>

namespace tedl {

namespace {

constexpr double variance_target = 0.95;

struct Spectrum {
    Eigen::VectorXd mean;
    Eigen::MatrixXd centered;
    Eigen::VectorXd values;    // descending
    Eigen::MatrixXd vectors;   // matching columns
    double total = 0.0;
};

Spectrum spectrum(const Eigen::MatrixXd& x) {
    if (x.cols() < 2 || x.rows() < 1) {
        throw std::invalid_argument("pca_project: need at least 2 vectors of dimension >= 1");
    }
    Spectrum s;
    s.mean = x.rowwise().mean();
    s.centered = x.colwise() - s.mean;
    Eigen::MatrixXd cov = s.centered * s.centered.transpose() / static_cast<double>(x.cols() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    s.values = eig.eigenvalues().reverse().cwiseMax(0.0);
    s.vectors = eig.eigenvectors().rowwise().reverse();
    // fix the sign so that the largest-magnitude entry of each direction is positive
    for (Eigen::Index k = 0; k < s.vectors.cols(); ++k) {
        Eigen::Index arg;
        s.vectors.col(k).cwiseAbs().maxCoeff(&arg);
        if (s.vectors(arg, k) < 0.0) {
            s.vectors.col(k) *= -1.0;
        }
    }
    s.total = s.values.sum();
    return s;
}

PcaResult project(const Spectrum& s, Eigen::Index k) {
    PcaResult r;
    r.mean = s.mean;
    r.components = s.vectors.leftCols(k);
    if (s.total <= 0.0) {
        spdlog::warn("pca_project: data has zero variance, returning zero projections");
        r.degenerate = true;
        r.projected = Eigen::MatrixXd::Zero(k, s.centered.cols());
        r.explained = Eigen::VectorXd::Zero(k);
        return r;
    }
    r.projected = r.components.transpose() * s.centered;
    r.explained = s.values.head(k) / s.total;
    r.cumulative = r.explained.sum();
    return r;
}

}

Eigen::MatrixXd PcaResult::reconstruct() const {
    return (components * projected).colwise() + mean;
}

PcaResult pca_project(const Eigen::MatrixXd& vectors, PcaMode mode) {
    Spectrum s = spectrum(vectors);
    const Eigen::Index dim = s.values.size();
    if (mode == PcaMode::top2) {
        return project(s, std::min<Eigen::Index>(2, dim));
    }
    Eigen::Index k = 1;
    if (s.total > 0.0) {
        double acc = 0.0;
        for (k = 0; k < dim;) {
            acc += s.values(k++) / s.total;
            if (acc >= variance_target - 1e-12) {
                break;
            }
        }
    }
    return project(s, k);
}

PcaResult pca_project(const Eigen::MatrixXd& vectors, Eigen::Index k) {
    Spectrum s = spectrum(vectors);
    if (k < 1 || k > s.values.size()) {
        throw std::invalid_argument("pca_project: component count out of range");
    }
    return project(s, k);
}

WordVectors load_word_vectors(const std::string& path, const Alphabet& alphabet) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::unordered_map<std::string, Eigen::VectorXd> found;
    Eigen::VectorXd sum;
    WordVectors out;
    std::string line;
    long dim = -1;
    for (size_t number = 1; std::getline(in, line); ++number) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        std::istringstream fields(line);
        std::string token;
        fields >> token;
        std::vector<double> values;
        std::string field;
        while (fields >> field) {
            try {
                size_t used = 0;
                values.push_back(std::stod(field, &used));
                if (used != field.size()) {
                    throw std::invalid_argument(field);
                }
            } catch (const std::exception&) {
                throw std::runtime_error(path + ":" + std::to_string(number) + ": malformed number '" + field + "'");
            }
        }
        if (number == 1 && values.size() == 1 && token.find_first_not_of("0123456789") == std::string::npos) {
            continue;
        }
        if (values.empty()) {
            throw std::runtime_error(path + ":" + std::to_string(number) + ": no vector after '" + token + "'");
        }
        if (dim < 0) {
            dim = static_cast<long>(values.size());
            sum = Eigen::VectorXd::Zero(dim);
        } else if (static_cast<long>(values.size()) != dim) {
            throw std::runtime_error(path + ":" + std::to_string(number) + ": expected " + std::to_string(dim) +
                                     " values, found " + std::to_string(values.size()));
        }
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(values.data(), dim);
        sum += v;
        ++out.vocabulary;
        if (alphabet.contains(token) && !found.count(token)) {
            found.emplace(token, std::move(v));
        }
    }
    if (dim < 0) {
        throw std::runtime_error(path + ": no word vectors");
    }
    const Eigen::VectorXd mean = sum / static_cast<double>(out.vocabulary);
    out.base.resize(dim, static_cast<Eigen::Index>(alphabet.size()));
    for (size_t x = 0; x < alphabet.size(); ++x) {
        const std::string& token = alphabet.label(static_cast<Label>(x));
        auto it = found.find(token);
        if (it == found.end()) {
            out.missing.push_back(token);
            out.base.col(static_cast<Eigen::Index>(x)) = mean;
        } else {
            out.base.col(static_cast<Eigen::Index>(x)) = it->second;
        }
    }
    if (!out.missing.empty()) {
        spdlog::warn("load_word_vectors: {} of {} token(s) missing from {}, using the mean vector", out.missing.size(),
                     alphabet.size(), path);
    }
    return out;
}

}
