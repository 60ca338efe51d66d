#ifndef tedl_cost_model_hpp
#define tedl_cost_model_hpp

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tedl/tree.hpp"

namespace tedl {

/*
 * An edit cost function c over (X u {-})^2. Label ids run over [0, U) and
 * the gap is id U. Every model exposes a flat parameter vector and the
 * gradient of a single cost entry with respect to it.
 */
class CostModel {
public:
    virtual ~CostModel() = default;

    virtual size_t alphabet_size() const = 0;
    Label gap() const { return static_cast<Label>(alphabet_size()); }

    virtual double cost(Label x, Label y) const = 0;

    virtual size_t num_parameters() const = 0;
    virtual std::vector<double> parameters() const = 0;
    virtual void set_parameters(std::span<const double> theta) = 0;
    // grad += weight * d c(x, y) / d theta
    virtual void accumulate_gradient(Label x, Label y, double weight, std::span<double> grad) const = 0;

    virtual std::unique_ptr<CostModel> clone() const = 0;
};

/*
 * Explicit (U+1) x (U+1) cost table, gap last. c(-,-) is pinned to zero and
 * has no gradient.
 */
class ExplicitCostMatrix : public CostModel {
public:
    ExplicitCostMatrix() = default;
    explicit ExplicitCostMatrix(Eigen::MatrixXd entries);

    static ExplicitCostMatrix unit(size_t alphabet_size);

    size_t alphabet_size() const override { return static_cast<size_t>(entries_.rows()) - 1; }
    double cost(Label x, Label y) const override { return entries_(x, y); }

    size_t num_parameters() const override { return static_cast<size_t>(entries_.size()); }
    std::vector<double> parameters() const override;
    void set_parameters(std::span<const double> theta) override;
    void accumulate_gradient(Label x, Label y, double weight, std::span<double> grad) const override;
    std::unique_ptr<CostModel> clone() const override { return std::make_unique<ExplicitCostMatrix>(*this); }

    const Eigen::MatrixXd& entries() const { return entries_; }
    Eigen::MatrixXd& entries() { return entries_; }
    // sum over squared entries
    double squared_norm() const { return entries_.squaredNorm(); }

private:
    Eigen::MatrixXd entries_;
};

/*
 * c_A(x, y) = ||a(x) - a(y)|| with a(x) the column of A for label x and the
 * gap embedded at the origin. A pseudo-metric for every A.
 */
class EmbeddingCostModel : public CostModel {
public:
    EmbeddingCostModel() = default;
    explicit EmbeddingCostModel(Eigen::MatrixXd embedding);

    size_t alphabet_size() const override { return static_cast<size_t>(embedding_.cols()); }
    size_t dimension() const { return static_cast<size_t>(embedding_.rows()); }
    double cost(Label x, Label y) const override;

    size_t num_parameters() const override { return static_cast<size_t>(embedding_.size()); }
    std::vector<double> parameters() const override;
    void set_parameters(std::span<const double> theta) override;
    void accumulate_gradient(Label x, Label y, double weight, std::span<double> grad) const override;
    std::unique_ptr<CostModel> clone() const override { return std::make_unique<EmbeddingCostModel>(*this); }

    // a(x); the zero vector for the gap.
    Eigen::VectorXd vector(Label x) const;
    const Eigen::MatrixXd& matrix() const { return embedding_; }
    Eigen::MatrixXd& matrix() { return embedding_; }

private:
    Eigen::MatrixXd embedding_;
};

/*
 * c(x, y) = 1/2 - 1/2 cos(Omega b(x), Omega b(y)) over fixed base vectors
 * b(x). Insertions and deletions cost a constant 1/2.
 */
class CosineCostModel : public CostModel {
public:
    static constexpr double gap_cost = 0.5;
    static constexpr double degenerate_norm = 1e-12;

    CosineCostModel() = default;
    // base: D x U, one column per label. Omega defaults to the D x D identity.
    explicit CosineCostModel(Eigen::MatrixXd base, std::vector<std::string> label_names = {});
    CosineCostModel(Eigen::MatrixXd base, Eigen::MatrixXd omega, std::vector<std::string> label_names = {});

    size_t alphabet_size() const override { return static_cast<size_t>(base_.cols()); }
    double cost(Label x, Label y) const override;

    size_t num_parameters() const override { return static_cast<size_t>(omega_.size()); }
    std::vector<double> parameters() const override;
    void set_parameters(std::span<const double> theta) override;
    void accumulate_gradient(Label x, Label y, double weight, std::span<double> grad) const override;
    std::unique_ptr<CostModel> clone() const override { return std::make_unique<CosineCostModel>(*this); }

    const Eigen::MatrixXd& base() const { return base_; }
    const Eigen::MatrixXd& omega() const { return omega_; }
    Eigen::MatrixXd& omega() { return omega_; }

private:
    void refresh();
    void check_degenerate(Label x) const;

    Eigen::MatrixXd base_;
    Eigen::MatrixXd omega_;
    Eigen::MatrixXd transformed_;   // Omega * base
    Eigen::VectorXd norms_;
    std::vector<std::string> names_;
};

// Regular simplex of side 1 spanned by the U label vectors and the origin (gap).
EmbeddingCostModel simplex_init(size_t alphabet_size);

ExplicitCostMatrix materialize(const CostModel& model);

// Gradients of c_A(x, y) with respect to a(x) and a(y). Zero when the two
// vectors coincide (within 1e-12).
std::pair<Eigen::VectorXd, Eigen::VectorXd> embedding_cost_gradient(const EmbeddingCostModel& model, Label x, Label y);

// d c_Omega(x, y) / d Omega. Throws if either transformed vector is degenerate.
Eigen::MatrixXd cosine_cost_gradient(const CosineCostModel& model, Label x, Label y);

enum class AxiomViolation { negative, asymmetric, nonzero_self, triangle };

struct PseudometricViolation {
    AxiomViolation kind;
    Label x, y, z;   // z only set for triangle violations, otherwise -1
    double amount;
};

struct PseudometricReport {
    std::vector<PseudometricViolation> violations;
    bool ok() const { return violations.empty(); }
    size_t count(AxiomViolation kind) const;
};

// Exhaustive check over all pairs and triples of X u {-}.
PseudometricReport validate_pseudometric(const ExplicitCostMatrix& c, double tolerance = 1e-12);

// Shortest-path closure of c over X u {-}: the cheapest chain of edits
// taking x to y.
ExplicitCostMatrix cost_closure(const ExplicitCostMatrix& c);

}
#endif /* tedl_cost_model_hpp */
