#pragma once

#include <Eigen/Core>

namespace confound {

enum class LearnerKind { logistic, ols };

struct LearnerSpec {
    LearnerKind kind = LearnerKind::logistic;
    double l2_penalty = 1e-3;
    int max_iters = 100;
    double tol = 1e-8;
};

/// Fitted linear model; weights live in the original feature space with the
/// intercept first.
struct Model {
    LearnerKind kind = LearnerKind::logistic;
    Eigen::VectorXd weights;  // length p+1
};

/// Fit the model. Logistic regression minimizes the L2-penalized negative
/// log-likelihood by Newton/IRLS with step halving (gradient-descent
/// fallback on a non-finite Hessian); OLS solves the (ridge-stabilized)
/// normal equations. Features are standardized internally and the
/// standardization is folded back into the returned weights.
Model train(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Scores for new rows: probabilities in (0,1) for logistic, reals for OLS.
Eigen::VectorXd predict(const Model& model, const Eigen::MatrixXd& X);

/// Penalized negative log-likelihood of a 0/1 response under weights w
/// (intercept first; the intercept is not penalized). Exposed so the
/// gradient can be checked against finite differences.
double logistic_loss(const Eigen::VectorXd& w, const Eigen::MatrixXd& X, const Eigen::VectorXd& y01,
                     double l2_penalty);

/// Gradient of logistic_loss in w.
Eigen::VectorXd logistic_gradient(const Eigen::VectorXd& w, const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y01, double l2_penalty);

}  // namespace confound
