#pragma once

#include <cstdint>
#include <string>

#include "confound/dataset.hpp"
#include "confound/learners.hpp"
#include "confound/metrics.hpp"
#include "confound/nulls.hpp"

namespace confound {

enum class TestId { response_learning, confounding, confounding_exact, confounding_vs_baseline };
enum class CorrectionMethod { empirical, gaussian, analytic_auc, baseline };

std::string test_name(TestId id);
std::string correction_name(CorrectionMethod m);

struct TestResult {
    TestId test_id = TestId::response_learning;
    double statistic = 0.0;
    double p_value = 0.0;  // always in (0, 1]
    GaussianFit null_fit;  // reference null summary (when applicable)
    int b = 0;             // permutation count behind the statistic
};

struct CorrectionResult {
    double m_o = 0.0;  // observed metric
    double m_c = 0.0;  // corrected metric
    CorrectionMethod method = CorrectionMethod::gaussian;
    GaussianFit restricted_fit;
    GaussianFit reference_fit;  // standard / analytic / baseline null summary
};

/// Permutation test of response learning: p-value of the observed metric
/// against the restricted null.
TestResult response_learning_test(const NullDistribution& null_r, double m_o);

/// Corrected metric by Gaussian p-value matching:
/// m_c = (m_o - a_r) s_ref / s_r + a_ref.
CorrectionResult correct_gaussian(double m_o, const GaussianFit& fit_r, const GaussianFit& fit_s);

/// Corrected metric by empirical percentile/quantile composition; the
/// result is clamped to the reference null's sample range, so observed
/// values outside the restricted null's range map to the reference
/// extremes (the truncation artifact the Gaussian form avoids).
CorrectionResult correct_empirical(double m_o, const NullDistribution& null_r,
                                   const NullDistribution& null_s);

/// Corrected AUC against the analytic no-signal null:
/// (auc_o - a_r) sigma / s_r + 1/2 with sigma from auc_null_gaussian.
CorrectionResult correct_auc_analytic(double auc_o, const GaussianFit& fit_r, int n_n, int n_p);

/// Confounding test: the restricted-null mean against N(a, s^2/b); b must
/// equal both the null's permutation count and the test-set size (the
/// anti-artifact rule) -- callers pass the test-set size explicitly.
/// One-sided toward better-than-reference performance.
TestResult confounding_test(const NullDistribution& null_r, const GaussianFit& reference, int b);

/// AUC variant using the analytic reference N(1/2, (n_n+n_p+1)/(12 n_n n_p b)).
TestResult confounding_test_auc(const NullDistribution& null_r, int n_n, int n_p, int b);

/// Exact (small-sample) confounding test: an outer loop of standard
/// confounder shuffles, each scored by the mean of an inner restricted null
/// with b_r = test-set size; add-one p-value of the observed mean.
TestResult confounding_test_exact(const Dataset& ds, const SplitIndexes& split,
                                  const LearnerSpec& learner, const MetricSpec& metric, int b_s,
                                  std::uint64_t seed, int threads = 1);

/// Everything the population-of-interest workflow produces.
struct BaselineReport {
    CorrectionResult corrected;        // against the baseline null (the "green" value)
    TestResult test;                   // confounding vs baseline
    CorrectionResult corrected_standard;  // against the standard null, for comparison
    double observed = 0.0;
    NullDistribution dev_restricted;
    NullDistribution dev_standard;
    NullDistribution baseline_restricted;
    int baseline_n = 0;   // joint-matched subsample size
    int test_size = 0;    // shared test-set size (= b unless overridden)
};

struct BaselineOptions {
    double test_fraction = 0.5;  // of the baseline subsample
    int b = 0;                   // permutations; 0 = test-set size
    int threads = 1;
};

/// Population-of-interest workflow: build the baseline restricted null on a
/// joint-matched subsample, the development restricted null on a
/// joint-preserving split with an equal test-set size, correct the observed
/// metric against the baseline fit, and test confounding against
/// N(a_baseline, s_baseline^2 / b).
BaselineReport baseline_workflow(const Dataset& dev, const JointTable& target,
                                 const LearnerSpec& learner, const MetricSpec& metric,
                                 std::uint64_t seed, const BaselineOptions& options = {});

}  // namespace confound
