#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace confound {

enum class PartialEstimator { theorem1_cov, theorem1_cor, theorem2_dcov, theorem2_dcor };
enum class ExpectationMode { closed_form, enumeration, monte_carlo };

std::string estimator_name(PartialEstimator e);
std::string expectation_mode_name(ExpectationMode m);

struct PartialEstimate {
    double value = 0.0;
    PartialEstimator estimator = PartialEstimator::theorem1_cov;
    ExpectationMode mode = ExpectationMode::closed_form;
    int b = 0;  // monte_carlo draws (0 otherwise)
};

/// Exact average of cov(x, y*) over all restricted permutations of y,
/// evaluated in closed form: (1/n) sum_s n_s xbar_s ybar_s - xbar ybar.
/// Covariances use 1/n normalization throughout this module.
double restricted_expectation_cov(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                  const std::vector<int>& strata);

/// Partial covariance via restricted permutations:
/// cov(x,y) - E_pi*[cov(x, y*)].
PartialEstimate pcov_perm(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const std::vector<int>& strata, ExpectationMode mode, int b = 0,
                          std::uint64_t seed = 0, std::uint64_t enum_cap = 2'000'000);

/// Partial correlation via restricted permutations:
/// sqrt(var(x)var(y) / (var(x|c)var(y|c))) * (cor(x,y) - E_pi*[cor(x, y*)]),
/// with pooled within-stratum variances as the conditional-variance plug-in.
PartialEstimate pcor_perm(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const std::vector<int>& strata, ExpectationMode mode, int b = 0,
                          std::uint64_t seed = 0, std::uint64_t enum_cap = 2'000'000);

/// Partial distance covariance / correlation via restricted permutations
/// (Monte Carlo expectation over b draws):
///   pdcov = dcov2(x,y) - E_pi*[dcov2(x, y*)]
///   pdcor = (dcor2(x,y) - E_pi*[dcor2(x, y*)]) /
///           sqrt((1 - dcor2(x,c)^2)(1 - dcor2(y,c)^2))
/// Distances on the categorical c use the discrete metric 1{c_i != c_j}.
PartialEstimate pdcov_perm(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                           const std::vector<int>& strata, int b, std::uint64_t seed,
                           int threads = 1);
PartialEstimate pdcor_perm(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                           const std::vector<int>& strata, int b, std::uint64_t seed,
                           int threads = 1);

/// Definitional partial covariance cov(x,y) - cov(x,C) Var(C)^{-1} cov(y,C)
/// with a multi-level C handled through dummy-coded indicators and the
/// covariance-matrix inverse; 1/n normalization.
double pcov_definitional(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                         const std::vector<int>& strata);

/// Definitional partial correlation: Pearson correlation of the residuals
/// of x and y after regressing each on the stratum indicators.
double pcor_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     const std::vector<int>& strata);

/// Pooled within-stratum variance (1/n): the Var(.|C) plug-in.
double pooled_within_variance(const Eigen::VectorXd& x, const std::vector<int>& strata);

}  // namespace confound
