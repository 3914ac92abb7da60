#include "confound/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "confound/errors.hpp"
#include "confound/parallel.hpp"
#include "confound/rng.hpp"
#include "confound/shuffle.hpp"
#include "confound/stats.hpp"

namespace confound {

namespace {

/// Inverse empirical CDF, type-1 (order statistic) definition.
double sample_quantile(std::vector<double> sorted_samples, double q) {
    const auto b = static_cast<double>(sorted_samples.size());
    if (q <= 0.0) return sorted_samples.front();
    const auto k = static_cast<std::size_t>(std::ceil(q * b));
    return sorted_samples[std::min<std::size_t>(k, sorted_samples.size()) - 1];
}

/// One-sided p-value in the better-performance direction for a statistic
/// with reference null N(a, scale^2); clamped away from an underflowed 0.
double one_sided_p(const MetricSpec& metric, double statistic, double a, double scale) {
    const double z = (statistic - a) / scale;
    const double p = metric.orientation == Orientation::higher_better
                         ? 1.0 - stats::normal_cdf(z)
                         : stats::normal_cdf(z);
    return std::max(p, std::numeric_limits<double>::min());
}

}  // namespace

std::string test_name(TestId id) {
    switch (id) {
        case TestId::response_learning: return "response_learning";
        case TestId::confounding: return "confounding";
        case TestId::confounding_exact: return "confounding_exact";
        case TestId::confounding_vs_baseline: return "confounding_vs_baseline";
    }
    return "?";
}

std::string correction_name(CorrectionMethod m) {
    switch (m) {
        case CorrectionMethod::empirical: return "empirical";
        case CorrectionMethod::gaussian: return "gaussian";
        case CorrectionMethod::analytic_auc: return "analytic_auc";
        case CorrectionMethod::baseline: return "baseline";
    }
    return "?";
}

TestResult response_learning_test(const NullDistribution& null_r, double m_o) {
    if (null_r.scheme != Scheme::restricted && null_r.scheme != Scheme::baseline)
        throw ValidationError("response_learning_test: null scheme must be restricted");
    TestResult r;
    r.test_id = TestId::response_learning;
    r.statistic = m_o;
    r.p_value = p_value(null_r, m_o);
    r.b = null_r.b;
    if (null_r.b >= 2) r.null_fit = fit_gaussian(null_r);
    return r;
}

CorrectionResult correct_gaussian(double m_o, const GaussianFit& fit_r, const GaussianFit& fit_s) {
    if (!(fit_r.s > 0.0)) throw ValidationError("correct_gaussian: degenerate restricted null (s = 0)");
    CorrectionResult c;
    c.m_o = m_o;
    c.method = CorrectionMethod::gaussian;
    c.restricted_fit = fit_r;
    c.reference_fit = fit_s;
    if (fit_r.a == fit_s.a && fit_r.s == fit_s.s) {
        c.m_c = m_o;  // identical nulls map the metric to itself
    } else {
        c.m_c = (m_o - fit_r.a) * fit_s.s / fit_r.s + fit_s.a;
    }
    return c;
}

CorrectionResult correct_empirical(double m_o, const NullDistribution& null_r,
                                   const NullDistribution& null_s) {
    if (null_r.metric.id != null_s.metric.id)
        throw ValidationError("correct_empirical: nulls computed for different metrics");
    if (null_r.b < 20 || null_s.b < 20)
        throw ValidationError("correct_empirical: need b >= 20 in both nulls");
    std::size_t below = 0;
    for (double s : null_r.samples)
        if (s <= m_o) ++below;
    const double q = static_cast<double>(below) / static_cast<double>(null_r.b);
    std::vector<double> sorted = null_s.samples;
    std::sort(sorted.begin(), sorted.end());
    CorrectionResult c;
    c.m_o = m_o;
    c.m_c = sample_quantile(std::move(sorted), q);
    c.method = CorrectionMethod::empirical;
    c.restricted_fit = fit_gaussian(null_r);
    c.reference_fit = fit_gaussian(null_s);
    return c;
}

CorrectionResult correct_auc_analytic(double auc_o, const GaussianFit& fit_r, int n_n, int n_p) {
    if (!(fit_r.s > 0.0))
        throw ValidationError("correct_auc_analytic: degenerate restricted null (s = 0)");
    const auto [mean, sigma] = auc_null_gaussian(n_n, n_p);
    CorrectionResult c;
    c.m_o = auc_o;
    c.m_c = (auc_o - fit_r.a) * sigma / fit_r.s + mean;
    c.method = CorrectionMethod::analytic_auc;
    c.restricted_fit = fit_r;
    c.reference_fit = {mean, sigma};
    return c;
}

TestResult confounding_test(const NullDistribution& null_r, const GaussianFit& reference, int b) {
    if (null_r.scheme != Scheme::restricted)
        throw ValidationError("confounding_test: null scheme must be restricted");
    if (b != null_r.b)
        throw ValidationError("confounding_test: b (" + std::to_string(b) +
                              ") must equal the restricted null's permutation count (" +
                              std::to_string(null_r.b) + "), which must be the test-set size");
    if (!(reference.s > 0.0)) throw ValidationError("confounding_test: degenerate reference null");
    TestResult r;
    r.test_id = TestId::confounding;
    r.statistic = stats::mean(null_r.samples);
    r.b = b;
    r.null_fit = reference;
    r.p_value = one_sided_p(null_r.metric, r.statistic, reference.a,
                            reference.s / std::sqrt(static_cast<double>(b)));
    return r;
}

TestResult confounding_test_auc(const NullDistribution& null_r, int n_n, int n_p, int b) {
    if (null_r.metric.id != MetricId::auc)
        throw ValidationError("confounding_test_auc: metric must be auc");
    if (b != n_n + n_p)
        throw ValidationError("confounding_test_auc: b must equal the test-set size n_n + n_p");
    const auto [mean, sigma] = auc_null_gaussian(n_n, n_p);
    TestResult r = confounding_test(null_r, GaussianFit{mean, sigma}, b);
    return r;
}

TestResult confounding_test_exact(const Dataset& ds, const SplitIndexes& split,
                                  const LearnerSpec& learner, const MetricSpec& metric, int b_s,
                                  std::uint64_t seed, int threads) {
    if (b_s < 20) throw ValidationError("confounding_test_exact: need b_s >= 20");
    const int b_r = static_cast<int>(split.test.size());

    // Observed statistic: restricted-null mean with the real confounder.
    const NullDistribution observed_null =
        restricted_null(ds, split, learner, metric, b_r, seed, threads);
    const double observed = stats::mean(observed_null.samples);

    // Null draws: shuffle the confounder (standardly, within train and within
    // test), then average an inner restricted null against the shuffled
    // confounder. Outer iteration i owns the derived seed space (seed, i+1);
    // its confounder shuffle uses stream b_r, clear of the inner streams.
    std::vector<double> null_means(b_s);
    std::vector<int> base_codes = ds.confounder.codes;
    parallel_for(static_cast<std::size_t>(b_s), threads, [&](std::size_t i) {
        const std::uint64_t outer_seed = derive_seed(seed, i + 1);
        RngStream rng(outer_seed, static_cast<std::uint64_t>(b_r));
        std::vector<int> codes = base_codes;
        std::vector<int> part;
        for (const auto* idx : {&split.train, &split.test}) {
            part.resize(idx->size());
            for (std::size_t k = 0; k < idx->size(); ++k) part[k] = codes[(*idx)[k]];
            standard_shuffle_inplace(part, rng);
            for (std::size_t k = 0; k < idx->size(); ++k) codes[(*idx)[k]] = part[k];
        }
        try {
            const NullDistribution inner =
                restricted_null_with_strata(ds, split, codes, learner, metric, b_r, outer_seed, 1);
            null_means[i] = stats::mean(inner.samples);
        } catch (const ComputationError& e) {
            throw ComputationError("confounding_test_exact outer iteration " + std::to_string(i) +
                                   ", " + e.what());
        }
    });

    std::size_t k = 0;
    if (metric.orientation == Orientation::higher_better) {
        for (double m : null_means)
            if (m >= observed) ++k;
    } else {
        for (double m : null_means)
            if (m <= observed) ++k;
    }
    TestResult r;
    r.test_id = TestId::confounding_exact;
    r.statistic = observed;
    r.p_value = static_cast<double>(k + 1) / static_cast<double>(b_s + 1);
    r.b = b_s;
    r.null_fit = {stats::mean(null_means),
                  null_means.size() >= 2 ? stats::sd(null_means) : 0.0};
    return r;
}

BaselineReport baseline_workflow(const Dataset& dev, const JointTable& target,
                                 const LearnerSpec& learner, const MetricSpec& metric,
                                 std::uint64_t seed, const BaselineOptions& options) {
    const std::uint64_t subsample_seed = derive_seed(seed, 1);
    const std::uint64_t split_seed = derive_seed(seed, 2);
    const std::uint64_t null_seed = derive_seed(seed, 3);

    // Baseline subsample matched to the population-of-interest joint.
    const Dataset baseline = subsample_to_joint(dev, target, subsample_seed);
    const SplitIndexes baseline_split =
        split(baseline, options.test_fraction, Stratify::joint, split_seed);
    const int test_size = static_cast<int>(baseline_split.test.size());
    const int b = options.b > 0 ? options.b : test_size;

    // Development split preserving the development joint, with the same
    // test-set size so the null distributions are comparable; the split
    // seed is shared so identical populations produce identical splits.
    const SplitIndexes dev_split = split_exact_test(dev, test_size, Stratify::joint, split_seed);

    BaselineReport report;
    report.baseline_n = static_cast<int>(baseline.n());
    report.test_size = test_size;

    report.baseline_restricted =
        restricted_null(baseline, baseline_split, learner, metric, b, null_seed, options.threads);
    report.baseline_restricted.scheme = Scheme::baseline;
    report.dev_restricted =
        restricted_null(dev, dev_split, learner, metric, b, null_seed, options.threads);
    report.dev_standard =
        standard_null(dev, dev_split, learner, metric, b, null_seed, options.threads);

    // Observed metric on the development split.
    {
        Eigen::MatrixXd x_train(dev_split.train.size(), dev.p()), x_test(dev_split.test.size(), dev.p());
        Eigen::VectorXd y_train(dev_split.train.size()), y_test(dev_split.test.size());
        for (std::size_t k = 0; k < dev_split.train.size(); ++k) {
            x_train.row(static_cast<Eigen::Index>(k)) = dev.features.row(dev_split.train[k]);
            y_train[static_cast<Eigen::Index>(k)] = dev.response[dev_split.train[k]];
        }
        for (std::size_t k = 0; k < dev_split.test.size(); ++k) {
            x_test.row(static_cast<Eigen::Index>(k)) = dev.features.row(dev_split.test[k]);
            y_test[static_cast<Eigen::Index>(k)] = dev.response[dev_split.test[k]];
        }
        const Model model = train(learner, x_train, y_train);
        report.observed = evaluate(metric, y_test, predict(model, x_test));
    }

    const GaussianFit fit_dev = fit_gaussian(report.dev_restricted);
    const GaussianFit fit_base = fit_gaussian(report.baseline_restricted);
    const GaussianFit fit_std = fit_gaussian(report.dev_standard);

    report.corrected = correct_gaussian(report.observed, fit_dev, fit_base);
    report.corrected.method = CorrectionMethod::baseline;
    report.corrected_standard = correct_gaussian(report.observed, fit_dev, fit_std);

    // Confounding relative to the population of interest:
    // p = 1 - Phi((a_dev - a_base) / (s_base / sqrt(b))) for higher-better.
    if (!(fit_base.s > 0.0))
        throw ValidationError("baseline_workflow: degenerate baseline null");
    TestResult t;
    t.test_id = TestId::confounding_vs_baseline;
    t.statistic = fit_dev.a;
    t.b = b;
    t.null_fit = fit_base;
    t.p_value = one_sided_p(metric, fit_dev.a, fit_base.a,
                            fit_base.s / std::sqrt(static_cast<double>(b)));
    report.test = t;
    return report;
}

}  // namespace confound
