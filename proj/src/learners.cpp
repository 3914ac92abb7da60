#include "confound/learners.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>

#include "confound/dataset.hpp"
#include "confound/errors.hpp"

namespace confound {

namespace {

double sigmoid(double t) {
    if (t >= 0.0) {
        const double e = std::exp(-t);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

constexpr double kProbEps = 1e-12;

struct Standardizer {
    Eigen::VectorXd center;
    Eigen::VectorXd scale;  // 1 where the column is constant

    static Standardizer fit(const Eigen::MatrixXd& X) {
        Standardizer s;
        s.center = X.colwise().mean();
        s.scale.resize(X.cols());
        const double n = static_cast<double>(X.rows());
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            const double var = (X.col(j).array() - s.center[j]).square().sum() / n;
            s.scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
        }
        return s;
    }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const {
        return (X.rowwise() - center.transpose()).array().rowwise() /
               scale.transpose().array();
    }

    /// Map standardized-space weights (intercept first) back to the
    /// original feature space.
    Eigen::VectorXd fold_back(const Eigen::VectorXd& w) const {
        Eigen::VectorXd out(w.size());
        double intercept = w[0];
        for (Eigen::Index j = 0; j < center.size(); ++j) {
            out[j + 1] = w[j + 1] / scale[j];
            intercept -= w[j + 1] * center[j] / scale[j];
        }
        out[0] = intercept;
        return out;
    }
};

Eigen::VectorXd linear_scores(const Eigen::VectorXd& w, const Eigen::MatrixXd& X) {
    return (X * w.tail(X.cols())).array() + w[0];
}

Model train_logistic(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const auto [lo, hi] = class_labels(y);  // throws on single-label input
    Eigen::VectorXd y01(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) y01[i] = (y[i] == hi) ? 1.0 : 0.0;

    const Standardizer std_ = Standardizer::fit(X);
    const Eigen::MatrixXd Xs = std_.apply(X);
    const Eigen::Index p = Xs.cols();

    Eigen::VectorXd w = Eigen::VectorXd::Zero(p + 1);
    double loss = logistic_loss(w, Xs, y01, spec.l2_penalty);

    for (int iter = 0; iter < spec.max_iters; ++iter) {
        const Eigen::VectorXd grad = logistic_gradient(w, Xs, y01, spec.l2_penalty);
        if (grad.lpNorm<Eigen::Infinity>() <= spec.tol) break;

        // Newton direction from the penalized Hessian on [1 Xs].
        const Eigen::VectorXd eta = linear_scores(w, Xs);
        Eigen::VectorXd wts(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            const double mu = sigmoid(eta[i]);
            wts[i] = std::max(mu * (1.0 - mu), 1e-10);
        }
        Eigen::MatrixXd H(p + 1, p + 1);
        H(0, 0) = wts.sum();
        const Eigen::VectorXd xw = Xs.transpose() * wts;
        H.block(0, 1, 1, p) = xw.transpose();
        H.block(1, 0, p, 1) = xw;
        H.block(1, 1, p, p) = Xs.transpose() * wts.asDiagonal() * Xs;
        for (Eigen::Index j = 1; j <= p; ++j) H(j, j) += spec.l2_penalty;

        Eigen::VectorXd dir;
        bool newton_ok = H.allFinite();
        if (newton_ok) {
            const Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
            if (ldlt.info() == Eigen::Success) {
                dir = ldlt.solve(grad);
                newton_ok = dir.allFinite();
            } else {
                newton_ok = false;
            }
        }
        if (!newton_ok) dir = grad;  // plain gradient step

        // Step halving on the penalized loss.
        double step = 1.0;
        bool moved = false;
        for (int h = 0; h < 40; ++h) {
            const Eigen::VectorXd cand = w - step * dir;
            const double cand_loss = logistic_loss(cand, Xs, y01, spec.l2_penalty);
            if (std::isfinite(cand_loss) && cand_loss <= loss) {
                w = cand;
                loss = cand_loss;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;  // no descent left at the smallest step
    }
    if (!w.allFinite()) throw ComputationError("logistic training produced non-finite weights");

    Model m;
    m.kind = LearnerKind::logistic;
    m.weights = std_.fold_back(w);
    return m;
}

Model train_ols(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Standardizer std_ = Standardizer::fit(X);
    const Eigen::MatrixXd Xs = std_.apply(X);
    const Eigen::Index n = Xs.rows();
    const Eigen::Index p = Xs.cols();

    Eigen::MatrixXd A(n, p + 1);
    A.col(0).setOnes();
    A.rightCols(p) = Xs;

    Eigen::VectorXd w;
    if (spec.l2_penalty > 0.0) {
        Eigen::MatrixXd M = A.transpose() * A;
        for (Eigen::Index j = 1; j <= p; ++j) M(j, j) += spec.l2_penalty;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
        if (ldlt.info() != Eigen::Success)
            throw ComputationError("ols: normal equations not solvable");
        w = ldlt.solve(A.transpose() * y);
    } else {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
        if (qr.rank() < p + 1)
            throw ComputationError("ols: singular design matrix (rank deficient, no penalty)");
        w = qr.solve(y);
    }
    if (!w.allFinite()) throw ComputationError("ols produced non-finite weights");

    Model m;
    m.kind = LearnerKind::ols;
    m.weights = std_.fold_back(w);
    return m;
}

}  // namespace

double logistic_loss(const Eigen::VectorXd& w, const Eigen::MatrixXd& X, const Eigen::VectorXd& y01,
                     double l2_penalty) {
    const Eigen::VectorXd eta = linear_scores(w, X);
    double nll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        // log(1 + exp(eta)) - y*eta, computed stably
        nll += std::max(eta[i], 0.0) + std::log1p(std::exp(-std::abs(eta[i]))) - y01[i] * eta[i];
    }
    return nll + 0.5 * l2_penalty * w.tail(w.size() - 1).squaredNorm();
}

Eigen::VectorXd logistic_gradient(const Eigen::VectorXd& w, const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y01, double l2_penalty) {
    const Eigen::VectorXd eta = linear_scores(w, X);
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = sigmoid(eta[i]) - y01[i];
    Eigen::VectorXd grad(w.size());
    grad[0] = resid.sum();
    grad.tail(X.cols()) = X.transpose() * resid + l2_penalty * w.tail(X.cols());
    return grad;
}

Model train(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw ValidationError("train: X rows and y length differ");
    if (X.rows() < 2) throw ValidationError("train: need at least 2 rows");
    if (spec.tol <= 0.0) throw ValidationError("train: tol must be positive");
    if (spec.max_iters < 1) throw ValidationError("train: max_iters must be >= 1");
    if (spec.l2_penalty < 0.0) throw ValidationError("train: l2_penalty must be nonnegative");
    return spec.kind == LearnerKind::logistic ? train_logistic(spec, X, y) : train_ols(spec, X, y);
}

Eigen::VectorXd predict(const Model& model, const Eigen::MatrixXd& X) {
    if (X.cols() + 1 != model.weights.size())
        throw ValidationError("predict: feature count mismatch");
    Eigen::VectorXd score = linear_scores(model.weights, X);
    if (model.kind == LearnerKind::logistic) {
        for (Eigen::Index i = 0; i < score.size(); ++i)
            score[i] = std::clamp(sigmoid(score[i]), kProbEps, 1.0 - kProbEps);
    }
    return score;
}

}  // namespace confound
