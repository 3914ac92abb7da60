#include "confound/synthdata.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "confound/errors.hpp"

namespace confound {

double BernoulliJoint::cor() const {
    const double py = p11 + p10, pc = p11 + p01;
    const double vy = py * (1.0 - py), vc = pc * (1.0 - pc);
    if (vy <= 0.0 || vc <= 0.0) throw ValidationError("bernoulli joint: degenerate marginal");
    return cov() / std::sqrt(vy * vc);
}

BernoulliJoint BernoulliJoint::renormalized() const {
    const double s = p11 + p10 + p01 + p00;
    if (s <= 0.0) throw ValidationError("bernoulli joint: nonpositive total mass");
    return {p11 / s, p10 / s, p01 / s, p00 / s};
}

void BernoulliJoint::validate() const {
    if (p11 < 0.0 || p10 < 0.0 || p01 < 0.0 || p00 < 0.0)
        throw ValidationError("bernoulli joint: negative cell probability");
    if (std::abs(p11 + p10 + p01 + p00 - 1.0) > 1e-12)
        throw ValidationError("bernoulli joint: probabilities must sum to 1");
}

BernoulliJoint joint_from_cor(double cor) {
    if (cor <= -1.0 || cor >= 1.0) throw ValidationError("joint_from_cor: need |cor| < 1");
    // P(Y=1)=P(C=1)=1/2: cells (a, 1/2-a, 1/2-a, a) give cov = a - 1/4 and
    // variance 1/4 each, so a = (1 + cor) / 4.
    const double a = (1.0 + cor) / 4.0;
    return {a, 0.5 - a, 0.5 - a, a};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_bivariate_bernoulli(const BernoulliJoint& joint,
                                                                       int n, RngStream& rng) {
    joint.validate();
    Eigen::VectorXd y(n), c(n);
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        if (u < joint.p11) {
            y[i] = 1.0; c[i] = 1.0;
        } else if (u < joint.p11 + joint.p10) {
            y[i] = 1.0; c[i] = 0.0;
        } else if (u < joint.p11 + joint.p10 + joint.p01) {
            y[i] = 0.0; c[i] = 1.0;
        } else {
            y[i] = 0.0; c[i] = 0.0;
        }
    }
    return {y, c};
}

Eigen::MatrixXd ar1_correlation(int p, double rho) {
    Eigen::MatrixXd sigma(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) sigma(i, j) = std::pow(rho, std::abs(i - j));
    return sigma;
}

namespace {

Eigen::MatrixXd ar1_cholesky(int p, double rho) {
    if (!(std::abs(rho) < 1.0)) throw ValidationError("feature correlation must satisfy |rho| < 1");
    const Eigen::LLT<Eigen::MatrixXd> llt(ar1_correlation(p, rho));
    if (llt.info() != Eigen::Success)
        throw ComputationError("Cholesky factorization of the AR(1) matrix failed");
    return llt.matrixL();
}

Categorical binary_categorical(const Eigen::VectorXd& c) {
    std::vector<std::string> labels(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) labels[i] = c[i] == 1.0 ? "1" : "0";
    return make_categorical(labels);
}

Eigen::MatrixXd mvn_features(const Eigen::VectorXd& mean_shift, int p, const Eigen::MatrixXd& chol,
                             RngStream& rng) {
    const Eigen::Index n = mean_shift.size();
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd z(p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) z[j] = rng.normal();
        X.row(i) = (chol * z).transpose().array() + mean_shift[i];
    }
    return X;
}

}  // namespace

Dataset gen_classification(const ClassGenParams& params, RngStream& rng) {
    if (params.n < 4) throw ValidationError("gen_classification: need n >= 4");
    if (params.p < 1) throw ValidationError("gen_classification: need p >= 1");
    const auto [y, c] = sample_bivariate_bernoulli(params.joint, params.n, rng);
    const Eigen::MatrixXd chol = ar1_cholesky(params.p, params.rho);
    const Eigen::VectorXd shift = params.beta * y + params.theta * c;
    Eigen::MatrixXd X = mvn_features(shift, params.p, chol, rng);
    return make_dataset(std::move(X), y, binary_categorical(c), Task::classification);
}

CorrelationDraw gen_correlation_model(const CorrGenParams& params, RngStream& rng) {
    if (!(params.p > 0.0 && params.p < 1.0))
        throw ValidationError("gen_correlation_model: p must lie in (0,1)");
    if (params.n < 2) throw ValidationError("gen_correlation_model: need n >= 2");
    CorrelationDraw d;
    d.c_numeric.resize(params.n);
    d.y.resize(params.n);
    d.x.resize(params.n);
    d.c_strata.resize(params.n);
    for (int i = 0; i < params.n; ++i) {
        const double c = rng.uniform() < params.p ? 1.0 : 0.0;
        const double y = params.beta_yc * c + rng.normal();
        const double x = params.beta_xc * c + params.beta_xy * y + rng.normal();
        d.c_numeric[i] = c;
        d.y[i] = y;
        d.x[i] = x;
        d.c_strata[i] = static_cast<int>(c);
    }
    return d;
}

Dataset gen_regression(const RegGenParams& params, RngStream& rng) {
    if (params.n < 4) throw ValidationError("gen_regression: need n >= 4");
    if (!(params.p_c > 0.0 && params.p_c < 1.0))
        throw ValidationError("gen_regression: p_c must lie in (0,1)");
    Eigen::VectorXd y(params.n), c(params.n);
    for (int i = 0; i < params.n; ++i) {
        c[i] = rng.uniform() < params.p_c ? 1.0 : 0.0;
        const double err = params.error == NoiseKind::gaussian ? rng.normal()
                                                               : rng.exponential() - 1.0;
        y[i] = params.beta_yc * c[i] + err;
    }
    const Eigen::MatrixXd chol = ar1_cholesky(params.p, params.rho);
    const Eigen::VectorXd shift = params.beta * y + params.theta * c;
    Eigen::MatrixXd X = mvn_features(shift, params.p, chol, rng);
    return make_dataset(std::move(X), y, binary_categorical(c), Task::regression);
}

namespace {

double min_pairwise_distance(const Eigen::MatrixXd& u) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < u.rows(); ++i)
        for (Eigen::Index j = i + 1; j < u.rows(); ++j)
            best = std::min(best, (u.row(i) - u.row(j)).squaredNorm());
    return best;
}

}  // namespace

Eigen::MatrixXd lhs_maximin(const std::vector<ParamRange>& ranges, int n_points, int n_sweeps,
                            RngStream& rng) {
    if (n_points < 2) throw ValidationError("lhs_maximin: need n_points >= 2");
    if (ranges.empty()) throw ValidationError("lhs_maximin: need at least one range");
    for (const auto& r : ranges)
        if (!(r.lo < r.hi)) throw ValidationError("lhs_maximin: invalid range");
    const int d = static_cast<int>(ranges.size());

    // Latin start: one point per stratum, columns independently permuted.
    Eigen::MatrixXd u(n_points, d);
    std::vector<int> strata(n_points);
    for (int col = 0; col < d; ++col) {
        std::iota(strata.begin(), strata.end(), 0);
        for (int i = n_points - 1; i > 0; --i) {
            const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(i) + 1));
            std::swap(strata[i], strata[j]);
        }
        for (int i = 0; i < n_points; ++i)
            u(i, col) = (static_cast<double>(strata[i]) + rng.uniform()) /
                        static_cast<double>(n_points);
    }

    // Maximin hill-climb: random column swaps kept when the minimum
    // pairwise distance does not decrease.
    double current = min_pairwise_distance(u);
    for (int sweep = 0; sweep < n_sweeps; ++sweep) {
        const int col = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(d)));
        const int i = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n_points)));
        int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n_points) - 1));
        if (j >= i) ++j;
        std::swap(u(i, col), u(j, col));
        const double proposed = min_pairwise_distance(u);
        if (proposed >= current) {
            current = proposed;
        } else {
            std::swap(u(i, col), u(j, col));
        }
    }

    // Map the unit cube onto the requested ranges.
    Eigen::MatrixXd out(n_points, d);
    for (int col = 0; col < d; ++col) {
        const auto& r = ranges[col];
        for (int i = 0; i < n_points; ++i) {
            if (r.integer) {
                const double span = std::floor(r.hi) - std::ceil(r.lo) + 1.0;
                double v = std::ceil(r.lo) + std::floor(u(i, col) * span);
                out(i, col) = std::min(v, std::floor(r.hi));
            } else {
                out(i, col) = r.lo + u(i, col) * (r.hi - r.lo);
            }
        }
    }
    return out;
}

}  // namespace confound
