#include "confound/harness.hpp"

#include <algorithm>
#include <cmath>

#include "confound/errors.hpp"
#include "confound/parallel.hpp"
#include "confound/partials.hpp"
#include "confound/rng.hpp"
#include "confound/stats.hpp"

namespace confound {

namespace {

struct ExperimentDesign {
    bool sample_p10 = false;  // else p10 = p11, p01 = p00, renormalized
    bool sample_beta = false;
    bool sample_theta = false;
};

ExperimentDesign design_for(int experiment_id) {
    switch (experiment_id) {
        case 1: return {true, true, true};
        case 2: return {false, true, false};
        case 3: return {true, false, true};
        case 4: return {false, false, false};
        default: throw ValidationError("experiment_id must be 1..4");
    }
}

}  // namespace

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg) {
    if (cfg.metric != MetricId::auc)
        throw ValidationError("run_experiment: the simulation protocol is AUC-based");
    if (!(cfg.scale_factor > 0.0 && cfg.scale_factor <= 1.0))
        throw ValidationError("run_experiment: scale_factor must lie in (0,1]");
    const int n_datasets =
        std::max(10, static_cast<int>(std::llround(cfg.n_datasets * cfg.scale_factor)));
    const ExperimentDesign design = design_for(cfg.experiment_id);

    // Table-1 ranges; columns in a fixed order, unused ones omitted.
    std::vector<ParamRange> ranges = {
        {200.0, 600.0, true},    // n
        {0.40, 0.45, false},     // p11
        {0.40, 0.45, false},     // p00
    };
    if (design.sample_p10) ranges.push_back({0.050, 0.075, false});
    if (design.sample_beta) ranges.push_back({0.1, 1.0, false});
    if (design.sample_theta) ranges.push_back({0.1, 1.0, false});
    ranges.push_back({0.2, 0.8, false});  // rho

    RngStream lhs_rng(derive_seed(cfg.seed, 0), 0);
    const Eigen::MatrixXd table = lhs_maximin(ranges, n_datasets, cfg.lhs_sweeps, lhs_rng);

    const MetricSpec metric = metric_spec(MetricId::auc);
    std::vector<ExperimentRow> rows(n_datasets);
    parallel_for(static_cast<std::size_t>(n_datasets), cfg.threads, [&](std::size_t d) {
        int col = 0;
        ExperimentRow row;
        row.index = static_cast<int>(d);
        row.n = static_cast<int>(table(d, col++));
        row.p11 = table(d, col++);
        row.p00 = table(d, col++);
        row.p10 = design.sample_p10 ? table(d, col++) : row.p11;
        row.p01 = design.sample_p10 ? 1.0 - row.p11 - row.p00 - row.p10 : row.p00;
        row.beta = design.sample_beta ? table(d, col++) : 0.0;
        row.theta = design.sample_theta ? table(d, col++) : 0.0;
        row.rho = table(d, col++);

        ClassGenParams params;
        params.n = row.n;
        params.joint = BernoulliJoint{row.p11, row.p10, row.p01, row.p00}.renormalized();
        params.beta = row.beta;
        params.theta = row.theta;
        params.rho = row.rho;
        // report the cells actually used (experiments 2/4 sample an
        // unnormalized table)
        row.p11 = params.joint.p11;
        row.p10 = params.joint.p10;
        row.p01 = params.joint.p01;
        row.p00 = params.joint.p00;

        const std::uint64_t root = derive_seed(cfg.seed, d + 1);
        try {
            RngStream gen_rng(derive_seed(root, 1), 0);
            const Dataset ds = gen_classification(params, gen_rng);
            const SplitIndexes sp = split(ds, 0.5, Stratify::joint, derive_seed(root, 2));
            row.n_test = static_cast<int>(sp.test.size());
            row.b = row.n_test;

            int n_pos = 0;
            for (int i : sp.test) n_pos += ds.response[i] == 1.0 ? 1 : 0;
            const int n_neg = row.n_test - n_pos;

            const NullDistribution null_r =
                restricted_null(ds, sp, cfg.learner, metric, row.b, derive_seed(root, 3), 1);

            Eigen::MatrixXd x_train(sp.train.size(), ds.p()), x_test(sp.test.size(), ds.p());
            Eigen::VectorXd y_train(sp.train.size()), y_test(sp.test.size());
            for (std::size_t k = 0; k < sp.train.size(); ++k) {
                x_train.row(static_cast<Eigen::Index>(k)) = ds.features.row(sp.train[k]);
                y_train[static_cast<Eigen::Index>(k)] = ds.response[sp.train[k]];
            }
            for (std::size_t k = 0; k < sp.test.size(); ++k) {
                x_test.row(static_cast<Eigen::Index>(k)) = ds.features.row(sp.test[k]);
                y_test[static_cast<Eigen::Index>(k)] = ds.response[sp.test[k]];
            }
            const Model model = train(cfg.learner, x_train, y_train);
            row.observed = evaluate(metric, y_test, predict(model, x_test));

            const GaussianFit fit_r = fit_gaussian(null_r);
            row.corrected = correct_auc_analytic(row.observed, fit_r, n_neg, n_pos).m_c;
            row.p_response = p_value(null_r, row.observed);
            row.p_confounding = confounding_test_auc(null_r, n_neg, n_pos, row.b).p_value;
        } catch (const std::exception& e) {
            throw ComputationError("experiment dataset " + std::to_string(d) + ": " + e.what());
        }
        rows[d] = row;
    });
    return rows;
}

Table power_curve(const std::vector<ExperimentRow>& rows, const std::vector<double>& alpha_grid) {
    if (rows.empty()) throw ValidationError("power_curve: no rows");
    Table t;
    t.columns = {"alpha", "reject_response", "reject_confounding"};
    const double n = static_cast<double>(rows.size());
    for (double alpha : alpha_grid) {
        double rr = 0.0, rc = 0.0;
        for (const auto& row : rows) {
            if (row.p_response <= alpha) rr += 1.0;
            if (row.p_confounding <= alpha) rc += 1.0;
        }
        t.add_row({alpha, rr / n, rc / n});
    }
    return t;
}

Table experiment_rows_table(const std::vector<ExperimentRow>& rows) {
    Table t;
    t.columns = {"index", "n",    "p11",  "p10",      "p01",       "p00",
                 "beta",  "theta", "rho", "n_test",   "b",         "observed",
                 "corrected", "p_response", "p_confounding"};
    for (const auto& r : rows) {
        t.add_row({static_cast<double>(r.index), static_cast<double>(r.n), r.p11, r.p10, r.p01,
                   r.p00, r.beta, r.theta, r.rho, static_cast<double>(r.n_test),
                   static_cast<double>(r.b), r.observed, r.corrected, r.p_response,
                   r.p_confounding});
    }
    return t;
}

std::vector<CorrelationStudyRow> run_correlation_study(int n_datasets, int b, int n,
                                                       std::uint64_t seed, int threads) {
    if (n_datasets < 1) throw ValidationError("run_correlation_study: need n_datasets >= 1");
    const MetricSpec metric = metric_spec(MetricId::pearson);
    std::vector<CorrelationStudyRow> rows(n_datasets);
    parallel_for(static_cast<std::size_t>(n_datasets), threads, [&](std::size_t d) {
        const std::uint64_t root = derive_seed(seed, d + 1);
        RngStream param_rng(derive_seed(root, 1), 0);
        CorrGenParams params;
        params.p = 0.3 + 0.4 * param_rng.uniform();
        params.beta_xc = -3.0 + 6.0 * param_rng.uniform();
        params.beta_yc = -3.0 + 6.0 * param_rng.uniform();
        params.beta_xy = -3.0 + 6.0 * param_rng.uniform();
        params.n = n;

        RngStream gen_rng(derive_seed(root, 2), 0);
        const CorrelationDraw draw = gen_correlation_model(params, gen_rng);

        CorrelationStudyRow row;
        row.index = static_cast<int>(d);
        row.p = params.p;
        row.beta_xc = params.beta_xc;
        row.beta_yc = params.beta_yc;
        row.beta_xy = params.beta_xy;
        row.observed = pearson(draw.x, draw.y);
        row.partial_eq6 = partial_correlation(draw.x, draw.y, draw.c_numeric);

        const std::uint64_t null_seed = derive_seed(root, 3);
        const NullDistribution null_r =
            association_null(draw.x, draw.y, draw.c_strata, metric, Scheme::restricted, b, null_seed);
        const NullDistribution null_s =
            association_null(draw.x, draw.y, draw.c_strata, metric, Scheme::standard, b, null_seed);
        row.corrected_gaussian =
            correct_gaussian(row.observed, fit_gaussian(null_r), fit_gaussian(null_s)).m_c;
        row.corrected_empirical = correct_empirical(row.observed, null_r, null_s).m_c;
        row.pcor_perm_closed =
            pcor_perm(draw.x, draw.y, draw.c_strata, ExpectationMode::closed_form).value;
        row.pcor_perm_mc = pcor_perm(draw.x, draw.y, draw.c_strata, ExpectationMode::monte_carlo, b,
                                     derive_seed(root, 4))
                               .value;
        rows[d] = row;
    });
    return rows;
}

Table correlation_study_table(const std::vector<CorrelationStudyRow>& rows) {
    Table t;
    t.columns = {"index",    "p",           "beta_xc",          "beta_yc",
                 "beta_xy",  "observed",    "partial_eq6",      "corrected_gaussian",
                 "corrected_empirical", "pcor_perm_closed", "pcor_perm_mc"};
    for (const auto& r : rows) {
        t.add_row({static_cast<double>(r.index), r.p, r.beta_xc, r.beta_yc, r.beta_xy, r.observed,
                   r.partial_eq6, r.corrected_gaussian, r.corrected_empirical, r.pcor_perm_closed,
                   r.pcor_perm_mc});
    }
    return t;
}

AsymptoticsStudy run_asymptotics_study(const std::vector<int>& test_sizes,
                                       const std::vector<MetricId>& metrics, int b,
                                       std::uint64_t seed, int threads) {
    AsymptoticsStudy study;
    study.null_samples.columns = {"metric_index", "test_size", "iteration", "value"};

    LearnerSpec logistic{LearnerKind::logistic, 1e-3, 100, 1e-8};
    LearnerSpec ols{LearnerKind::ols, 1e-3, 100, 1e-8};

    for (std::size_t mi = 0; mi < metrics.size(); ++mi) {
        const MetricId id = metrics[mi];
        const MetricSpec spec = metric_spec(id);
        const bool classification = id == MetricId::auc || id == MetricId::accuracy;
        for (int test_size : test_sizes) {
            const std::uint64_t ds_seed =
                derive_seed(derive_seed(seed, mi + 1), static_cast<std::uint64_t>(test_size));
            RngStream gen_rng(derive_seed(ds_seed, 0), 0);
            Dataset ds;
            if (classification) {
                ClassGenParams params;
                params.n = 2 * test_size;
                // unbalanced labels (prevalence 0.3) with strong confounding
                params.joint = BernoulliJoint{0.24, 0.06, 0.06, 0.64};
                params.beta = 1.0;
                params.theta = 1.0;
                params.rho = 0.5;
                ds = gen_classification(params, gen_rng);
            } else {
                RegGenParams params;
                params.n = 2 * test_size;
                params.p_c = 0.5;
                params.beta_yc = 1.0;
                params.beta = 0.5;
                params.theta = 1.0;
                params.rho = 0.5;
                params.error = NoiseKind::exponential;
                ds = gen_regression(params, gen_rng);
            }
            const SplitIndexes sp =
                split(ds, 0.5, Stratify::joint, derive_seed(ds_seed, 1));
            const NullDistribution null_r =
                restricted_null(ds, sp, classification ? logistic : ols, spec, b,
                                derive_seed(ds_seed, 2), threads);

            AsymptoticsRow row;
            row.metric = id;
            row.test_size = test_size;
            if (classification) {
                for (int i : sp.test) row.n_pos += ds.response[i] == 1.0 ? 1 : 0;
                row.n_neg = static_cast<int>(sp.test.size()) - row.n_pos;
            }
            const GaussianFit fit = fit_gaussian(null_r);
            row.ks = stats::ks_statistic(null_r.samples, [&](double x) {
                return stats::normal_cdf((x - fit.a) / fit.s);
            });
            row.max_jump = stats::max_cdf_jump(null_r.samples);
            study.rows.push_back(row);

            for (int i = 0; i < null_r.b; ++i) {
                study.null_samples.add_row({static_cast<double>(mi),
                                            static_cast<double>(test_size),
                                            static_cast<double>(i), null_r.samples[i]});
            }
        }
    }
    return study;
}

Table asymptotics_table(const AsymptoticsStudy& study) {
    Table t;
    t.columns = {"metric_index", "test_size", "n_neg", "n_pos", "ks", "max_cdf_jump"};
    for (const auto& r : study.rows) {
        t.add_row({static_cast<double>(static_cast<int>(r.metric)),
                   static_cast<double>(r.test_size), static_cast<double>(r.n_neg),
                   static_cast<double>(r.n_pos), r.ks, r.max_jump});
    }
    return t;
}

JointTable section4_target_joint() {
    // Prevalence 1/3, disease twice as common in males, gender split 50/50:
    // P(case|male) = 4/9, P(case|female) = 2/9.
    JointTable t;
    t.levels = {"0", "1"};  // female, male
    t.labels = {0.0, 1.0};
    t.proportions.resize(2, 2);
    t.proportions(0, 0) = 7.0 / 18.0;  // female control
    t.proportions(0, 1) = 1.0 / 9.0;   // female case
    t.proportions(1, 0) = 5.0 / 18.0;  // male control
    t.proportions(1, 1) = 2.0 / 9.0;   // male case
    return t;
}

BaselineScenario run_baseline_scenario(int n, std::uint64_t seed, int threads) {
    ClassGenParams params;
    params.n = n;
    params.joint = joint_from_cor(0.8);  // strongly associated development sample
    params.beta = 0.8;
    params.theta = 1.0;
    params.rho = 0.5;
    RngStream gen_rng(derive_seed(seed, 42), 0);
    const Dataset dev = gen_classification(params, gen_rng);

    BaselineScenario scenario;
    scenario.target = section4_target_joint();
    scenario.development = joint_table(dev);

    LearnerSpec learner;  // logistic defaults
    BaselineOptions options;
    options.threads = threads;
    scenario.report = baseline_workflow(dev, scenario.target, learner, metric_spec(MetricId::auc),
                                        seed, options);

    scenario.nulls.columns = {"iteration", "dev_restricted", "dev_standard", "baseline"};
    const auto& rep = scenario.report;
    for (int i = 0; i < rep.dev_restricted.b; ++i) {
        scenario.nulls.add_row({static_cast<double>(i), rep.dev_restricted.samples[i],
                                rep.dev_standard.samples[i], rep.baseline_restricted.samples[i]});
    }
    return scenario;
}

}  // namespace confound
