#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "confound/dataset.hpp"
#include "confound/rng.hpp"

namespace confound {

/// Cell probabilities p_ij = P(Y=i, C=j); must be nonnegative and sum to 1.
struct BernoulliJoint {
    double p11 = 0.25, p10 = 0.25, p01 = 0.25, p00 = 0.25;

    double cov() const { return p11 * p00 - p01 * p10; }
    double cor() const;
    BernoulliJoint renormalized() const;
    void validate() const;
};

/// Symmetric construction with P(Y=1)=P(C=1)=1/2 and the requested
/// correlation (used by the worked examples).
BernoulliJoint joint_from_cor(double cor);

struct ClassGenParams {
    int n = 200;
    BernoulliJoint joint;
    double beta = 1.0;   // Y -> X effect
    double theta = 1.0;  // C -> X effect
    double rho = 0.5;    // AR(1) feature correlation
    int p = 10;
};

struct CorrGenParams {
    double p = 0.5;  // Bernoulli success probability of C
    double beta_xc = 1.0, beta_yc = 1.0, beta_xy = 1.0;
    int n = 1000;
};

enum class NoiseKind { gaussian, exponential };

struct RegGenParams {
    int n = 200;
    double p_c = 0.5;     // P(C = 1)
    double beta_yc = 1.0; // C -> Y effect
    double beta = 1.0;    // Y -> X effect
    double theta = 1.0;   // C -> X effect
    double rho = 0.5;
    int p = 10;
    NoiseKind error = NoiseKind::gaussian;
};

/// i.i.d. draws of (y, c) from the 4-cell joint.
std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_bivariate_bernoulli(const BernoulliJoint& joint,
                                                                       int n, RngStream& rng);

/// AR(1) correlation matrix with entries rho^|i-j|.
Eigen::MatrixXd ar1_correlation(int p, double rho);

/// Binary classification data: (y, c) from the joint, then features from
/// N((y beta + c theta) 1, Sigma) with Sigma the AR(1) matrix (Cholesky).
Dataset gen_classification(const ClassGenParams& params, RngStream& rng);

struct CorrelationDraw {
    Eigen::VectorXd x, y;
    Eigen::VectorXd c_numeric;   // 0/1 codes
    std::vector<int> c_strata;   // same codes as ints for shuffling
};

/// Linear-Gaussian confounding model: c ~ Bernoulli(p), y ~ N(beta_yc c, 1),
/// x ~ N(beta_xc c + beta_xy y, 1).
CorrelationDraw gen_correlation_model(const CorrGenParams& params, RngStream& rng);

/// Regression data: c ~ Bernoulli(p_c), y = beta_yc c + error (gaussian or
/// mean-centered rate-1 exponential), features as in gen_classification.
Dataset gen_regression(const RegGenParams& params, RngStream& rng);

struct ParamRange {
    double lo = 0.0, hi = 1.0;
    bool integer = false;
};

/// Maximin-optimized Latin hypercube: one point per [k/n, (k+1)/n) stratum
/// in every column before range mapping; integer columns rounded after
/// stratification; n_sweeps proposed pairwise swaps, accepted only when the
/// minimum pairwise distance (normalized coordinates) does not decrease.
Eigen::MatrixXd lhs_maximin(const std::vector<ParamRange>& ranges, int n_points, int n_sweeps,
                            RngStream& rng);

}  // namespace confound
