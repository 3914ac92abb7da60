#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>

namespace confound {

enum class MetricId { auc, accuracy, mse, mae, pearson, ccc };
enum class Orientation { higher_better, lower_better };

struct MetricSpec {
    MetricId id = MetricId::auc;
    Orientation orientation = Orientation::higher_better;
    /// Random-guess value. Only the AUC has one that the analytic paths
    /// use (0.5); the rest carry NaN — their baseline is the standard-null
    /// mean, which is data dependent.
    double baseline = 0.5;
};

MetricSpec metric_spec(MetricId id);
MetricId metric_from_string(const std::string& name);
std::string metric_name(MetricId id);

/// Is a better than b under this metric's orientation?
bool better(const MetricSpec& spec, double a, double b);

/// Compute the metric. AUC uses the average-rank formula with ties counted
/// one half; accuracy thresholds probability scores at 0.5.
double evaluate(const MetricSpec& spec, const Eigen::VectorXd& y_true,
                const Eigen::VectorXd& y_pred);

/// Mann-Whitney U from the AUC: U = n_n * n_p * (1 - auc).
double mann_whitney_u(double auc, int n_n, int n_p);

/// Null (no-signal) Gaussian approximation of the AUC:
/// N(1/2, (n_n + n_p + 1) / (12 n_n n_p)). Returns (mean, sd).
std::pair<double, double> auc_null_gaussian(int n_n, int n_p);

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Concordance correlation coefficient, 1/n variance normalization.
double ccc(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Squared sample distance covariance (V-statistic over double-centered
/// pairwise distances) and its normalized form in [0,1].
double dcov2(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
double dvar2(const Eigen::VectorXd& x);
double dcor2(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Sample partial correlation of x and y given a numeric-coded c:
/// (cor(x,y) - cor(x,c) cor(y,c)) / sqrt((1-cor(x,c)^2)(1-cor(y,c)^2)).
double partial_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& c);

/// Closed-form partial distance covariance / correlation with plug-in
/// sample statistics:
///   pdcov = dcov2(x,y) - dcov2(x,c) dcov2(y,c) / dcov2(c,c)
///   pdcor = pdcov / sqrt(dvar2(x)(1-dcor2(x,c)^2)) sqrt(dvar2(y)(1-dcor2(y,c)^2))
double pdcov(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& c);
double pdcor(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& c);

}  // namespace confound
