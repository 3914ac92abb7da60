#include "confound/partials.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <map>

#include "confound/errors.hpp"
#include "confound/metrics.hpp"
#include "confound/parallel.hpp"
#include "confound/rng.hpp"
#include "confound/shuffle.hpp"

namespace confound {

namespace {

void check_xyc(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const std::vector<int>& strata,
               const char* what) {
    if (x.size() != y.size() || static_cast<std::size_t>(x.size()) != strata.size())
        throw ValidationError(std::string(what) + ": length mismatch");
    if (x.size() < 2) throw ValidationError(std::string(what) + ": need at least 2 rows");
}

/// Plug-in covariance, 1/n normalization.
double cov_n(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double n = static_cast<double>(x.size());
    return ((x.array() - x.mean()) * (y.array() - y.mean())).sum() / n;
}

double var_n(const Eigen::VectorXd& x) { return cov_n(x, x); }

double cor_n(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double vx = var_n(x), vy = var_n(y);
    if (vx <= 0.0 || vy <= 0.0) throw ValidationError("cor: constant input");
    return cov_n(x, y) / std::sqrt(vx * vy);
}

std::map<int, std::vector<int>> groups_of(const std::vector<int>& strata) {
    std::map<int, std::vector<int>> g;
    for (std::size_t i = 0; i < strata.size(); ++i) g[strata[i]].push_back(static_cast<int>(i));
    return g;
}

/// Discrete-metric pairwise "values" for dcov on a categorical: any
/// injective numeric coding works for computing 1{c_i != c_j} distances;
/// dcov2 on these is computed by a dedicated routine below.
double dcov2_cat(const Eigen::VectorXd& x, const std::vector<int>& strata) {
    const Eigen::Index n = static_cast<Eigen::Index>(strata.size());
    const double dn = static_cast<double>(n);
    Eigen::VectorXd row_x = Eigen::VectorXd::Zero(n), row_c = Eigen::VectorXd::Zero(n);
    double s1 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double a = std::abs(x[i] - x[j]);
            const double b = strata[i] != strata[j] ? 1.0 : 0.0;
            s1 += 2.0 * a * b;
            row_x[i] += a;
            row_x[j] += a;
            row_c[i] += b;
            row_c[j] += b;
        }
    }
    s1 /= dn * dn;
    const double gx = row_x.sum() / (dn * dn);
    const double gc = row_c.sum() / (dn * dn);
    const double s3 = row_x.dot(row_c) / (dn * dn * dn);
    return s1 + gx * gc - 2.0 * s3;
}

double dvar2_cat(const std::vector<int>& strata) {
    const Eigen::Index n = static_cast<Eigen::Index>(strata.size());
    const double dn = static_cast<double>(n);
    Eigen::VectorXd row_c = Eigen::VectorXd::Zero(n);
    double s1 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double b = strata[i] != strata[j] ? 1.0 : 0.0;
            s1 += 2.0 * b * b;
            row_c[i] += b;
            row_c[j] += b;
        }
    }
    s1 /= dn * dn;
    const double gc = row_c.sum() / (dn * dn);
    const double s3 = row_c.dot(row_c) / (dn * dn * dn);
    return s1 + gc * gc - 2.0 * s3;
}

double dcor2_cat(const Eigen::VectorXd& x, const std::vector<int>& strata) {
    const double vx = dvar2(x), vc = dvar2_cat(strata);
    if (vx <= 0.0 || vc <= 0.0) return 0.0;
    return dcov2_cat(x, strata) / std::sqrt(vx * vc);
}

double mc_expectation(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      const std::vector<int>& strata, int b, std::uint64_t seed,
                      double (*statistic)(const Eigen::VectorXd&, const Eigen::VectorXd&)) {
    double sum = 0.0;
    for (int i = 0; i < b; ++i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        Eigen::VectorXd ys = y;
        restricted_shuffle_inplace(ys, strata, rng);
        sum += statistic(x, ys);
    }
    return sum / static_cast<double>(b);
}

double enum_expectation(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        const std::vector<int>& strata, std::uint64_t cap,
                        double (*statistic)(const Eigen::VectorXd&, const Eigen::VectorXd&)) {
    const auto rearrangements = enumerate_restricted(y, strata, cap);
    double sum = 0.0;
    for (const auto& ys : rearrangements) sum += statistic(x, ys);
    return sum / static_cast<double>(rearrangements.size());
}

}  // namespace

std::string estimator_name(PartialEstimator e) {
    switch (e) {
        case PartialEstimator::theorem1_cov: return "theorem1_cov";
        case PartialEstimator::theorem1_cor: return "theorem1_cor";
        case PartialEstimator::theorem2_dcov: return "theorem2_dcov";
        case PartialEstimator::theorem2_dcor: return "theorem2_dcor";
    }
    return "?";
}

std::string expectation_mode_name(ExpectationMode m) {
    switch (m) {
        case ExpectationMode::closed_form: return "closed_form";
        case ExpectationMode::enumeration: return "enumeration";
        case ExpectationMode::monte_carlo: return "monte_carlo";
    }
    return "?";
}

double restricted_expectation_cov(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                  const std::vector<int>& strata) {
    check_xyc(x, y, strata, "restricted_expectation_cov");
    const double n = static_cast<double>(x.size());
    double acc = 0.0;
    for (const auto& [code, rows] : groups_of(strata)) {
        double xs = 0.0, ys = 0.0;
        for (int i : rows) {
            xs += x[i];
            ys += y[i];
        }
        const double ns = static_cast<double>(rows.size());
        acc += ns * (xs / ns) * (ys / ns);
    }
    return acc / n - x.mean() * y.mean();
}

double pooled_within_variance(const Eigen::VectorXd& x, const std::vector<int>& strata) {
    const double n = static_cast<double>(x.size());
    double acc = 0.0;
    for (const auto& [code, rows] : groups_of(strata)) {
        double xs = 0.0;
        for (int i : rows) xs += x[i];
        const double mean_s = xs / static_cast<double>(rows.size());
        for (int i : rows) acc += (x[i] - mean_s) * (x[i] - mean_s);
    }
    return acc / n;
}

PartialEstimate pcov_perm(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const std::vector<int>& strata, ExpectationMode mode, int b,
                          std::uint64_t seed, std::uint64_t enum_cap) {
    check_xyc(x, y, strata, "pcov_perm");
    double expectation;
    switch (mode) {
        case ExpectationMode::closed_form:
            expectation = restricted_expectation_cov(x, y, strata);
            break;
        case ExpectationMode::enumeration:
            expectation = enum_expectation(x, y, strata, enum_cap, &cov_n);
            break;
        case ExpectationMode::monte_carlo:
            if (b < 1) throw ValidationError("pcov_perm: monte_carlo needs b >= 1");
            expectation = mc_expectation(x, y, strata, b, seed, &cov_n);
            break;
        default:
            throw ValidationError("pcov_perm: unknown mode");
    }
    PartialEstimate est;
    est.value = cov_n(x, y) - expectation;
    est.estimator = PartialEstimator::theorem1_cov;
    est.mode = mode;
    est.b = mode == ExpectationMode::monte_carlo ? b : 0;
    return est;
}

PartialEstimate pcor_perm(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const std::vector<int>& strata, ExpectationMode mode, int b,
                          std::uint64_t seed, std::uint64_t enum_cap) {
    check_xyc(x, y, strata, "pcor_perm");
    const double vx = var_n(x), vy = var_n(y);
    if (vx <= 0.0 || vy <= 0.0) throw ValidationError("pcor_perm: constant input");
    const double vx_c = pooled_within_variance(x, strata);
    const double vy_c = pooled_within_variance(y, strata);

    double expectation;
    switch (mode) {
        case ExpectationMode::closed_form:
            // cor(x, y*) = cov(x, y*) / sqrt(vx vy) since permutations keep var(y)
            expectation = restricted_expectation_cov(x, y, strata) / std::sqrt(vx * vy);
            break;
        case ExpectationMode::enumeration:
            expectation = enum_expectation(x, y, strata, enum_cap, &cor_n);
            break;
        case ExpectationMode::monte_carlo:
            if (b < 1) throw ValidationError("pcor_perm: monte_carlo needs b >= 1");
            expectation = mc_expectation(x, y, strata, b, seed, &cor_n);
            break;
        default:
            throw ValidationError("pcor_perm: unknown mode");
    }
    PartialEstimate est;
    est.estimator = PartialEstimator::theorem1_cor;
    est.mode = mode;
    est.b = mode == ExpectationMode::monte_carlo ? b : 0;
    const double diff = cor_n(x, y) - expectation;
    if (vx_c <= 0.0 || vy_c <= 0.0) {
        // Strata that leave no residual variance admit only the identity
        // permutation (up to value ties), which forces the difference term
        // to exactly zero; anything else is a genuine degeneracy.
        if (std::abs(diff) > 1e-12) throw ValidationError("pcor_perm: zero conditional variance");
        est.value = 0.0;
        return est;
    }
    est.value = std::sqrt(vx * vy / (vx_c * vy_c)) * diff;
    return est;
}

PartialEstimate pdcov_perm(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                           const std::vector<int>& strata, int b, std::uint64_t seed,
                           int threads) {
    check_xyc(x, y, strata, "pdcov_perm");
    if (b < 1) throw ValidationError("pdcov_perm: b must be >= 1");
    std::vector<double> draws(b);
    parallel_for(static_cast<std::size_t>(b), threads, [&](std::size_t i) {
        RngStream rng(seed, i);
        Eigen::VectorXd ys = y;
        restricted_shuffle_inplace(ys, strata, rng);
        draws[i] = dcov2(x, ys);
    });
    double expectation = 0.0;
    for (double d : draws) expectation += d;
    expectation /= static_cast<double>(b);

    PartialEstimate est;
    est.value = dcov2(x, y) - expectation;
    est.estimator = PartialEstimator::theorem2_dcov;
    est.mode = ExpectationMode::monte_carlo;
    est.b = b;
    return est;
}

PartialEstimate pdcor_perm(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                           const std::vector<int>& strata, int b, std::uint64_t seed,
                           int threads) {
    check_xyc(x, y, strata, "pdcor_perm");
    if (b < 1) throw ValidationError("pdcor_perm: b must be >= 1");
    const double rxc = dcor2_cat(x, strata), ryc = dcor2_cat(y, strata);
    const double fx = 1.0 - rxc * rxc, fy = 1.0 - ryc * ryc;  // 1 - dCor^4
    if (fx <= 0.0 || fy <= 0.0)
        throw ValidationError("pdcor_perm: degenerate denominator (dCor(.,c)^4 = 1)");

    std::vector<double> draws(b);
    parallel_for(static_cast<std::size_t>(b), threads, [&](std::size_t i) {
        RngStream rng(seed, i);
        Eigen::VectorXd ys = y;
        restricted_shuffle_inplace(ys, strata, rng);
        draws[i] = dcor2(x, ys);
    });
    double expectation = 0.0;
    for (double d : draws) expectation += d;
    expectation /= static_cast<double>(b);

    PartialEstimate est;
    est.value = (dcor2(x, y) - expectation) / std::sqrt(fx * fy);
    est.estimator = PartialEstimator::theorem2_dcor;
    est.mode = ExpectationMode::monte_carlo;
    est.b = b;
    return est;
}

double pcov_definitional(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                         const std::vector<int>& strata) {
    check_xyc(x, y, strata, "pcov_definitional");
    const auto groups = groups_of(strata);
    const int L = static_cast<int>(groups.size());
    if (L < 2) return cov_n(x, y);  // a single level explains nothing
    const Eigen::Index n = x.size();

    // Dummy indicators for levels 2..L (the first is the reference).
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, L - 1);
    int group_idx = 0;
    for (const auto& [code, rows] : groups) {
        if (group_idx >= 1)
            for (int i : rows) D(i, group_idx - 1) = 1.0;
        ++group_idx;
    }
    const Eigen::RowVectorXd mean = D.colwise().mean();
    const Eigen::MatrixXd Dc = D.rowwise() - mean;
    const double dn = static_cast<double>(n);
    const Eigen::MatrixXd var_c = Dc.transpose() * Dc / dn;
    const Eigen::VectorXd cov_xc = Dc.transpose() * (x.array() - x.mean()).matrix() / dn;
    const Eigen::VectorXd cov_yc = Dc.transpose() * (y.array() - y.mean()).matrix() / dn;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(var_c);
    if (ldlt.info() != Eigen::Success)
        throw ComputationError("pcov_definitional: singular indicator covariance");
    return cov_n(x, y) - cov_xc.dot(ldlt.solve(cov_yc));
}

double pcor_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     const std::vector<int>& strata) {
    check_xyc(x, y, strata, "pcor_residual");
    // Regressing on stratum indicators (with intercept) fits stratum means.
    Eigen::VectorXd rx = x, ry = y;
    for (const auto& [code, rows] : groups_of(strata)) {
        double mx = 0.0, my = 0.0;
        for (int i : rows) {
            mx += x[i];
            my += y[i];
        }
        mx /= static_cast<double>(rows.size());
        my /= static_cast<double>(rows.size());
        for (int i : rows) {
            rx[i] -= mx;
            ry[i] -= my;
        }
    }
    return cor_n(rx, ry);
}

}  // namespace confound
