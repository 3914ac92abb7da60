#include "confound/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "confound/dataset.hpp"
#include "confound/errors.hpp"

namespace confound {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_lengths(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const char* what) {
    if (a.size() != b.size()) throw ValidationError(std::string(what) + ": length mismatch");
    if (a.size() < 2) throw ValidationError(std::string(what) + ": need at least 2 values");
}

double auc_rank(const Eigen::VectorXd& y_true, const Eigen::VectorXd& scores) {
    const auto [lo, hi] = class_labels(y_true);
    const Eigen::Index n = scores.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    Eigen::Index n_pos = 0;
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j + 1);  // ranks are 1-based
        for (Eigen::Index k = i; k < j; ++k) {
            if (y_true[order[k]] == hi) {
                rank_sum_pos += avg_rank;
                ++n_pos;
            }
        }
        i = j;
    }
    const Eigen::Index n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw ValidationError("auc: undefined for a single-class response");
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (nn * np);
}

double accuracy(const Eigen::VectorXd& y_true, const Eigen::VectorXd& scores) {
    const auto [lo, hi] = class_labels(y_true);
    double correct = 0.0;
    for (Eigen::Index i = 0; i < y_true.size(); ++i) {
        const double pred = scores[i] >= 0.5 ? hi : lo;
        if (pred == y_true[i]) correct += 1.0;
    }
    return correct / static_cast<double>(y_true.size());
}

}  // namespace

MetricSpec metric_spec(MetricId id) {
    switch (id) {
        case MetricId::auc:
            return {id, Orientation::higher_better, 0.5};
        case MetricId::accuracy:
            return {id, Orientation::higher_better, kNaN};
        case MetricId::mse:
            return {id, Orientation::lower_better, kNaN};
        case MetricId::mae:
            return {id, Orientation::lower_better, kNaN};
        case MetricId::pearson:
            return {id, Orientation::higher_better, kNaN};
        case MetricId::ccc:
            return {id, Orientation::higher_better, kNaN};
    }
    throw ValidationError("unknown metric id");
}

MetricId metric_from_string(const std::string& name) {
    if (name == "auc") return MetricId::auc;
    if (name == "accuracy") return MetricId::accuracy;
    if (name == "mse") return MetricId::mse;
    if (name == "mae") return MetricId::mae;
    if (name == "pearson") return MetricId::pearson;
    if (name == "ccc") return MetricId::ccc;
    throw ValidationError("unknown metric '" + name + "'");
}

std::string metric_name(MetricId id) {
    switch (id) {
        case MetricId::auc: return "auc";
        case MetricId::accuracy: return "accuracy";
        case MetricId::mse: return "mse";
        case MetricId::mae: return "mae";
        case MetricId::pearson: return "pearson";
        case MetricId::ccc: return "ccc";
    }
    return "?";
}

bool better(const MetricSpec& spec, double a, double b) {
    return spec.orientation == Orientation::higher_better ? a > b : a < b;
}

double evaluate(const MetricSpec& spec, const Eigen::VectorXd& y_true,
                const Eigen::VectorXd& y_pred) {
    check_lengths(y_true, y_pred, "evaluate");
    switch (spec.id) {
        case MetricId::auc:
            return auc_rank(y_true, y_pred);
        case MetricId::accuracy:
            return accuracy(y_true, y_pred);
        case MetricId::mse:
            return (y_true - y_pred).squaredNorm() / static_cast<double>(y_true.size());
        case MetricId::mae:
            return (y_true - y_pred).cwiseAbs().sum() / static_cast<double>(y_true.size());
        case MetricId::pearson:
            return pearson(y_true, y_pred);
        case MetricId::ccc:
            return ccc(y_true, y_pred);
    }
    throw ValidationError("unknown metric id");
}

double mann_whitney_u(double auc, int n_n, int n_p) {
    if (n_n < 1 || n_p < 1) throw ValidationError("mann_whitney_u: counts must be >= 1");
    if (auc < 0.0 || auc > 1.0) throw ValidationError("mann_whitney_u: auc outside [0,1]");
    return static_cast<double>(n_n) * static_cast<double>(n_p) * (1.0 - auc);
}

std::pair<double, double> auc_null_gaussian(int n_n, int n_p) {
    if (n_n < 1 || n_p < 1) throw ValidationError("auc_null_gaussian: counts must be >= 1");
    const double nn = n_n, np = n_p;
    return {0.5, std::sqrt((nn + np + 1.0) / (12.0 * nn * np))};
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    check_lengths(x, y, "pearson");
    const double mx = x.mean(), my = y.mean();
    const Eigen::ArrayXd dx = x.array() - mx, dy = y.array() - my;
    const double sxy = (dx * dy).sum();
    const double sxx = dx.square().sum(), syy = dy.square().sum();
    if (sxx <= 0.0 || syy <= 0.0)
        throw ValidationError("pearson: undefined for a constant input");
    return sxy / std::sqrt(sxx * syy);
}

double ccc(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    check_lengths(x, y, "ccc");
    const double n = static_cast<double>(x.size());
    const double mx = x.mean(), my = y.mean();
    const Eigen::ArrayXd dx = x.array() - mx, dy = y.array() - my;
    const double sxy = (dx * dy).sum() / n;
    const double sxx = dx.square().sum() / n, syy = dy.square().sum() / n;
    const double denom = sxx + syy + (mx - my) * (mx - my);
    if (denom <= 0.0) throw ValidationError("ccc: undefined (both inputs constant and equal)");
    return 2.0 * sxy / denom;
}

double dcov2(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    check_lengths(x, y, "dcov2");
    const Eigen::Index n = x.size();
    const double dn = static_cast<double>(n);
    // V^2 = S1 + S2 - 2 S3 over the pairwise distance arrays, computed
    // without materializing the n x n matrices.
    Eigen::VectorXd row_x = Eigen::VectorXd::Zero(n), row_y = Eigen::VectorXd::Zero(n);
    double s1 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double a = std::abs(x[i] - x[j]);
            const double b = std::abs(y[i] - y[j]);
            s1 += 2.0 * a * b;
            row_x[i] += a;
            row_x[j] += a;
            row_y[i] += b;
            row_y[j] += b;
        }
    }
    s1 /= dn * dn;
    const double gx = row_x.sum() / (dn * dn);
    const double gy = row_y.sum() / (dn * dn);
    const double s3 = row_x.dot(row_y) / (dn * dn * dn);
    return s1 + gx * gy - 2.0 * s3;
}

double dvar2(const Eigen::VectorXd& x) { return dcov2(x, x); }

double dcor2(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double vx = dvar2(x), vy = dvar2(y);
    if (vx <= 0.0 || vy <= 0.0) return 0.0;
    return dcov2(x, y) / std::sqrt(vx * vy);
}

double partial_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& c) {
    const double rxy = pearson(x, y);
    const double rxc = pearson(x, c);
    const double ryc = pearson(y, c);
    const double dx = 1.0 - rxc * rxc, dy = 1.0 - ryc * ryc;
    if (dx <= 0.0 || dy <= 0.0)
        throw ValidationError("partial_correlation: degenerate denominator (|cor(.,c)| = 1)");
    return (rxy - rxc * ryc) / std::sqrt(dx * dy);
}

double pdcov(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& c) {
    const double vc = dvar2(c);
    if (vc <= 0.0) throw ValidationError("pdcov: dVar(c) must be positive");
    return dcov2(x, y) - dcov2(x, c) * dcov2(y, c) / vc;
}

double pdcor(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& c) {
    const double rxc = dcor2(x, c), ryc = dcor2(y, c);
    const double fx = 1.0 - rxc * rxc, fy = 1.0 - ryc * ryc;  // 1 - dCor^4
    if (fx <= 0.0 || fy <= 0.0)
        throw ValidationError("pdcor: degenerate denominator (dCor(.,c)^4 = 1)");
    const double dx = dvar2(x), dy = dvar2(y);
    if (dx <= 0.0 || dy <= 0.0) throw ValidationError("pdcor: constant input");
    return pdcov(x, y, c) / (std::sqrt(dx * fx) * std::sqrt(dy * fy));
}

}  // namespace confound
