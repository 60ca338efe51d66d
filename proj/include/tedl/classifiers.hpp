#ifndef tedl_classifiers_hpp
#define tedl_classifiers_hpp

#include <vector>

#include <Eigen/Dense>

namespace tedl {

/*
 * Majority vote among the k nearest training points. Distance ties are
 * broken by lower training index, vote ties by the smaller summed distance
 * and then by the lower class id.
 */
std::vector<int> knn_classify(const Eigen::MatrixXd& d_test_train, const std::vector<int>& train_labels, int k);

// k(x, y) = 2 exp(-d(x, y)) - 1, entrywise
Eigen::MatrixXd goodness_similarity(const Eigen::MatrixXd& d);

struct GoodnessOptions {
    int iterations = 2000;
    // step length at iteration t along the normalized subgradient:
    // step / (sqrt(t + 1) * max_i ||K(i, :)||)
    double step = 1.0;
};

/*
 * Sparse linear classifier over similarities to the training points. With
 * two classes a single problem is solved whose positive class is classes[0];
 * with more, one problem per class (one-vs-rest) and the largest margin wins.
 * alpha has one column per problem.
 */
struct GoodnessModel {
    std::vector<int> classes;
    Eigen::MatrixXd alpha;
    double lambda = 0.0;
    // final objective per problem
    std::vector<double> objective;

    bool binary() const { return classes.size() == 2; }
};

// sum_i [1 - l_i sum_j alpha_j K(i, j)]_+ + lambda ||alpha||_1 for one problem
double goodness_objective(const Eigen::MatrixXd& k_train, const Eigen::VectorXd& signs, const Eigen::VectorXd& alpha,
                          double lambda);

/*
 * Subgradient descent on the goodness objective from alpha = 0. Both the
 * running average of the iterates and the best iterate seen are tracked;
 * whichever has the lower objective is returned.
 */
GoodnessModel goodness_fit(const Eigen::MatrixXd& d_train, const std::vector<int>& labels, double lambda,
                           const GoodnessOptions& options = {});
GoodnessModel goodness_fit_similarity(const Eigen::MatrixXd& k_train, const std::vector<int>& labels, double lambda,
                                      const GoodnessOptions& options = {});

// Binary: sign of the score, zero counts as the positive class. One-vs-rest:
// argmax of the per-class scores, ties to the lower class id.
std::vector<int> goodness_predict(const GoodnessModel& model, const Eigen::MatrixXd& k_test_train);

}
#endif /* tedl_classifiers_hpp */
