#pragma once

// Test-side oracles, kept independent of the library implementations they
// check: brute-force pairwise AUC, explicitly double-centered distance
// covariance, regression-residual partial correlation, and plain helpers.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

namespace oracles {

/// AUC by counting all (negative, positive) score pairs; ties count 1/2.
inline double brute_force_auc(const Eigen::VectorXd& y, const Eigen::VectorXd& s) {
    std::set<double> labels(y.data(), y.data() + y.size());
    const double hi = *labels.rbegin();
    double wins = 0.0;
    long pairs = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] != hi) continue;
        for (Eigen::Index j = 0; j < y.size(); ++j) {
            if (y[j] == hi) continue;
            ++pairs;
            if (s[i] > s[j]) wins += 1.0;
            else if (s[i] == s[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

/// Mann-Whitney U by direct pair counting (positive beaten by negative).
inline double brute_force_u(const Eigen::VectorXd& y, const Eigen::VectorXd& s) {
    std::set<double> labels(y.data(), y.data() + y.size());
    const double hi = *labels.rbegin();
    double u = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] != hi) continue;
        for (Eigen::Index j = 0; j < y.size(); ++j) {
            if (y[j] == hi) continue;
            if (s[j] > s[i]) u += 1.0;
            else if (s[j] == s[i]) u += 0.5;
        }
    }
    return u;
}

/// Squared distance covariance by materializing and double-centering the
/// full pairwise distance matrices.
inline double brute_dcov2(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd A(n, n), B(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            A(i, j) = std::abs(x[i] - x[j]);
            B(i, j) = std::abs(y[i] - y[j]);
        }
    }
    auto center = [n](Eigen::MatrixXd& m) {
        const Eigen::VectorXd row_means = m.rowwise().mean();
        const Eigen::RowVectorXd col_means = m.colwise().mean();
        const double grand = m.mean();
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) m(i, j) += grand - row_means[i] - col_means[j];
    };
    center(A);
    center(B);
    return (A.array() * B.array()).sum() / static_cast<double>(n * n);
}

/// Partial correlation by regressing x and y on [1, c] and correlating the
/// residuals (least squares via Eigen, nothing shared with the library).
inline double residual_partial_corr(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& c) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd design(n, 2);
    design.col(0).setOnes();
    design.col(1) = c;
    const Eigen::VectorXd rx = x - design * design.colPivHouseholderQr().solve(x);
    const Eigen::VectorXd ry = y - design * design.colPivHouseholderQr().solve(y);
    const double num = (rx.array() * ry.array()).sum();
    return num / std::sqrt(rx.squaredNorm() * ry.squaredNorm());
}

/// Plug-in covariance with 1/n normalization.
inline double cov_n(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return ((x.array() - x.mean()) * (y.array() - y.mean())).sum() /
           static_cast<double>(x.size());
}

/// Definitional partial covariance for a binary 0/1-coded c.
inline double binary_partial_cov(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& c) {
    return cov_n(x, y) - cov_n(x, c) * cov_n(y, c) / cov_n(c, c);
}

}  // namespace oracles
