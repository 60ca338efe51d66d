#include "tedl/cost_model.hpp"

#include <cmath>
#include <stdexcept>

namespace tedl {

namespace {

void check_size(std::span<const double> theta, size_t expected) {
    if (theta.size() != expected) {
        throw std::invalid_argument("parameter vector has " + std::to_string(theta.size()) +
                                    " entries, expected " + std::to_string(expected));
    }
}

std::vector<double> flatten(const Eigen::MatrixXd& m) {
    return std::vector<double>(m.data(), m.data() + m.size());
}

}

ExplicitCostMatrix::ExplicitCostMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
        throw std::invalid_argument("cost matrix must be square with a gap row and column");
    }
    if (!entries_.allFinite()) {
        throw std::invalid_argument("cost matrix has non-finite entries");
    }
    entries_(entries_.rows() - 1, entries_.cols() - 1) = 0.0;
}

ExplicitCostMatrix ExplicitCostMatrix::unit(size_t alphabet_size) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(alphabet_size + 1, alphabet_size + 1);
    m.diagonal().setZero();
    return ExplicitCostMatrix(std::move(m));
}

std::vector<double> ExplicitCostMatrix::parameters() const {
    return flatten(entries_);
}

void ExplicitCostMatrix::set_parameters(std::span<const double> theta) {
    check_size(theta, num_parameters());
    std::copy(theta.begin(), theta.end(), entries_.data());
    entries_(entries_.rows() - 1, entries_.cols() - 1) = 0.0;
}

void ExplicitCostMatrix::accumulate_gradient(Label x, Label y, double weight, std::span<double> grad) const {
    if (x == gap() && y == gap()) {
        return;
    }
    grad[static_cast<size_t>(y) * entries_.rows() + x] += weight;
}

EmbeddingCostModel::EmbeddingCostModel(Eigen::MatrixXd embedding) : embedding_(std::move(embedding)) {
    if (!embedding_.allFinite()) {
        throw std::invalid_argument("embedding has non-finite entries");
    }
}

Eigen::VectorXd EmbeddingCostModel::vector(Label x) const {
    if (x == gap()) {
        return Eigen::VectorXd::Zero(embedding_.rows());
    }
    return embedding_.col(x);
}

double EmbeddingCostModel::cost(Label x, Label y) const {
    if (x == y) {
        return 0.0;
    }
    if (x == gap()) {
        return embedding_.col(y).norm();
    }
    if (y == gap()) {
        return embedding_.col(x).norm();
    }
    return (embedding_.col(x) - embedding_.col(y)).norm();
}

std::vector<double> EmbeddingCostModel::parameters() const {
    return flatten(embedding_);
}

void EmbeddingCostModel::set_parameters(std::span<const double> theta) {
    check_size(theta, num_parameters());
    std::copy(theta.begin(), theta.end(), embedding_.data());
}

void EmbeddingCostModel::accumulate_gradient(Label x, Label y, double weight, std::span<double> grad) const {
    if (x == y) {
        return;
    }
    const Eigen::Index dim = embedding_.rows();
    Eigen::VectorXd diff = vector(x) - vector(y);
    double norm = diff.norm();
    if (norm < 1e-12) {
        return;
    }
    diff *= weight / norm;
    if (x != gap()) {
        Eigen::Map<Eigen::VectorXd>(grad.data() + x * dim, dim) += diff;
    }
    if (y != gap()) {
        Eigen::Map<Eigen::VectorXd>(grad.data() + y * dim, dim) -= diff;
    }
}

CosineCostModel::CosineCostModel(Eigen::MatrixXd base, std::vector<std::string> label_names)
    : CosineCostModel(base, Eigen::MatrixXd::Identity(base.rows(), base.rows()), std::move(label_names)) {}

CosineCostModel::CosineCostModel(Eigen::MatrixXd base, Eigen::MatrixXd omega, std::vector<std::string> label_names)
    : base_(std::move(base)), omega_(std::move(omega)), names_(std::move(label_names)) {
    if (omega_.cols() != base_.rows()) {
        throw std::invalid_argument("transform has " + std::to_string(omega_.cols()) +
                                    " columns but base vectors have dimension " + std::to_string(base_.rows()));
    }
    refresh();
}

void CosineCostModel::refresh() {
    transformed_ = omega_ * base_;
    norms_ = transformed_.colwise().norm().transpose();
}

void CosineCostModel::check_degenerate(Label x) const {
    if (norms_(x) <= degenerate_norm) {
        std::string name = static_cast<size_t>(x) < names_.size() ? names_[x] : "#" + std::to_string(x);
        throw std::domain_error("transformed vector of label '" + name + "' is degenerate");
    }
}

double CosineCostModel::cost(Label x, Label y) const {
    if (x == y) {
        return 0.0;
    }
    if (x == gap() || y == gap()) {
        return gap_cost;
    }
    check_degenerate(x);
    check_degenerate(y);
    double cosine = transformed_.col(x).dot(transformed_.col(y)) / (norms_(x) * norms_(y));
    return 0.5 - 0.5 * cosine;
}

std::vector<double> CosineCostModel::parameters() const {
    return flatten(omega_);
}

void CosineCostModel::set_parameters(std::span<const double> theta) {
    check_size(theta, num_parameters());
    std::copy(theta.begin(), theta.end(), omega_.data());
    refresh();
}

void CosineCostModel::accumulate_gradient(Label x, Label y, double weight, std::span<double> grad) const {
    if (x == y || x == gap() || y == gap()) {
        return;
    }
    Eigen::Map<Eigen::MatrixXd> g(grad.data(), omega_.rows(), omega_.cols());
    g += weight * cosine_cost_gradient(*this, x, y);
}

Eigen::MatrixXd cosine_cost_gradient(const CosineCostModel& model, Label x, Label y) {
    const Eigen::MatrixXd& omega = model.omega();
    if (x == y || x == model.gap() || y == model.gap()) {
        return Eigen::MatrixXd::Zero(omega.rows(), omega.cols());
    }
    // cost() validates both labels
    model.cost(x, y);
    Eigen::VectorXd bx = model.base().col(x);
    Eigen::VectorXd by = model.base().col(y);
    Eigen::VectorXd u = omega * bx;
    Eigen::VectorXd v = omega * by;
    double nu = u.norm();
    double nv = v.norm();
    double cosine = u.dot(v) / (nu * nv);
    Eigen::VectorXd dcos_du = v / (nu * nv) - cosine * u / (nu * nu);
    Eigen::VectorXd dcos_dv = u / (nu * nv) - cosine * v / (nv * nv);
    return -0.5 * (dcos_du * bx.transpose() + dcos_dv * by.transpose());
}

EmbeddingCostModel simplex_init(size_t alphabet_size) {
    if (alphabet_size == 0) {
        throw std::invalid_argument("simplex initialization needs at least one label");
    }
    // Vertices (e_u - e_gap) / sqrt(2) have Gram matrix 1 on the diagonal and
    // 1/2 elsewhere; a Cholesky factor expresses them in a U-dimensional basis.
    const auto u = static_cast<Eigen::Index>(alphabet_size);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Constant(u, u, 0.5);
    gram.diagonal().setOnes();
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    Eigen::MatrixXd a = llt.matrixU();
    return EmbeddingCostModel(std::move(a));
}

ExplicitCostMatrix materialize(const CostModel& model) {
    const auto n = static_cast<Eigen::Index>(model.alphabet_size() + 1);
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index y = 0; y < n; ++y) {
            m(x, y) = model.cost(static_cast<Label>(x), static_cast<Label>(y));
        }
    }
    return ExplicitCostMatrix(std::move(m));
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> embedding_cost_gradient(const EmbeddingCostModel& model, Label x, Label y) {
    Eigen::VectorXd diff = model.vector(x) - model.vector(y);
    double norm = diff.norm();
    if (x == y || norm < 1e-12) {
        diff.setZero();
        return {diff, diff};
    }
    diff /= norm;
    return {diff, -diff};
}

size_t PseudometricReport::count(AxiomViolation kind) const {
    size_t n = 0;
    for (const auto& v : violations) {
        n += v.kind == kind;
    }
    return n;
}

PseudometricReport validate_pseudometric(const ExplicitCostMatrix& c, double tolerance) {
    PseudometricReport report;
    const auto& m = c.entries();
    const auto n = static_cast<Label>(m.rows());
    for (Label x = 0; x < n; ++x) {
        if (std::abs(m(x, x)) > tolerance) {
            report.violations.push_back({AxiomViolation::nonzero_self, x, x, -1, std::abs(m(x, x))});
        }
        for (Label y = 0; y < n; ++y) {
            if (m(x, y) < -tolerance) {
                report.violations.push_back({AxiomViolation::negative, x, y, -1, -m(x, y)});
            }
            if (x < y && std::abs(m(x, y) - m(y, x)) > tolerance) {
                report.violations.push_back({AxiomViolation::asymmetric, x, y, -1, std::abs(m(x, y) - m(y, x))});
            }
            for (Label z = 0; z < n; ++z) {
                double excess = m(x, y) - (m(x, z) + m(z, y));
                if (excess > tolerance) {
                    report.violations.push_back({AxiomViolation::triangle, x, y, z, excess});
                }
            }
        }
    }
    return report;
}

ExplicitCostMatrix cost_closure(const ExplicitCostMatrix& c) {
    Eigen::MatrixXd d = c.entries();
    const Eigen::Index n = d.rows();
    for (Eigen::Index x = 0; x < n; ++x) {
        d(x, x) = std::min(d(x, x), 0.0);
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index x = 0; x < n; ++x) {
            for (Eigen::Index y = 0; y < n; ++y) {
                d(x, y) = std::min(d(x, y), d(x, k) + d(k, y));
            }
        }
    }
    return ExplicitCostMatrix(std::move(d));
}

}
