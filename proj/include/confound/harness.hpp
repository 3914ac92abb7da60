#pragma once

#include <cstdint>
#include <vector>

#include "confound/inference.hpp"
#include "confound/learners.hpp"
#include "confound/metrics.hpp"
#include "confound/synthdata.hpp"
#include "confound/table.hpp"

namespace confound {

/// One of the four Table-1 settings:
///   1: response + confounding signal, 2: response only,
///   3: confounding only, 4: neither.
struct ExperimentConfig {
    int experiment_id = 1;
    int n_datasets = 200;
    LearnerSpec learner;
    MetricId metric = MetricId::auc;
    std::uint64_t seed = 1;
    double scale_factor = 1.0;  // shrinks n_datasets for desk runs
    int lhs_sweeps = 50;
    int threads = 1;
};

struct ExperimentRow {
    int index = 0;
    int n = 0;
    double p11 = 0, p10 = 0, p01 = 0, p00 = 0;
    double beta = 0, theta = 0, rho = 0;
    int n_test = 0, b = 0;
    double observed = 0, corrected = 0;
    double p_response = 1, p_confounding = 1;
};

/// Per-dataset results for the experiment: LHS parameter draws, one dataset
/// each, a 50/50 joint-stratified split, b = test-set size restricted
/// permutations, the analytic corrected AUC and both tests.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg);

/// Rejection-rate curves over nominal levels for both tests.
Table power_curve(const std::vector<ExperimentRow>& rows, const std::vector<double>& alpha_grid);

Table experiment_rows_table(const std::vector<ExperimentRow>& rows);

struct CorrelationStudyRow {
    int index = 0;
    double p = 0, beta_xc = 0, beta_yc = 0, beta_xy = 0;
    double observed = 0;
    double partial_eq6 = 0;        // sample partial correlation
    double corrected_gaussian = 0;
    double corrected_empirical = 0;
    double pcor_perm_closed = 0;   // Theorem 1, closed-form expectation
    double pcor_perm_mc = 0;       // Theorem 1, Monte Carlo expectation
};

/// Correlation correction study: for each linear-Gaussian dataset, the
/// observed correlation, its restricted/standard permutation nulls
/// (b draws each), the corrected values and the partial correlations.
std::vector<CorrelationStudyRow> run_correlation_study(int n_datasets, int b, int n,
                                                       std::uint64_t seed, int threads = 1);

Table correlation_study_table(const std::vector<CorrelationStudyRow>& rows);

struct AsymptoticsRow {
    MetricId metric = MetricId::auc;
    int test_size = 0;
    int n_neg = 0, n_pos = 0;  // classification label counts (0 for regression)
    double ks = 0;             // restricted null vs fitted normal
    double max_jump = 0;       // largest empirical-CDF step
};

struct AsymptoticsStudy {
    std::vector<AsymptoticsRow> rows;
    Table null_samples;  // long format: metric_index, test_size, iteration, value
};

/// Normal-approximation quality of the restricted permutation null across
/// test sizes; b samples per (metric, size).
AsymptoticsStudy run_asymptotics_study(const std::vector<int>& test_sizes,
                                       const std::vector<MetricId>& metrics, int b,
                                       std::uint64_t seed, int threads = 1);

Table asymptotics_table(const AsymptoticsStudy& study);

/// The population-of-interest joint table used by the worked mobile-health
/// scenario: disease prevalence 1/3, twice as common in males, equal gender
/// marginals. Levels "0" (female) and "1" (male); labels 0/1.
JointTable section4_target_joint();

struct BaselineScenario {
    BaselineReport report;
    JointTable target;
    JointTable development;
    Table nulls;  // iteration, dev_restricted, dev_standard, baseline
};

/// The full worked scenario: a strongly confounded development sample of
/// `n` participants, corrected against the section4 target.
BaselineScenario run_baseline_scenario(int n, std::uint64_t seed, int threads = 1);

}  // namespace confound
