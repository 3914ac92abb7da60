#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "confound/errors.hpp"
#include "confound/harness.hpp"
#include "confound/inference.hpp"
#include "confound/partials.hpp"
#include "confound/report.hpp"
#include "confound/rng.hpp"
#include "confound/table.hpp"

namespace confound::cli {

namespace fs = std::filesystem;

namespace {

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory: " + dir);
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

/// Every command echoes its effective configuration (but not the worker
/// count: outputs are independent of it by contract).
void write_manifest(const std::string& out_dir, const std::string& command,
                    const RunConfig& cfg) {
    OrderedJson doc;
    doc["command"] = command;
    doc["version"] = "0.1.0";
    OrderedJson entries;
    for (const auto& [key, value] : cfg.entries()) entries[key] = value;
    doc["config"] = entries;
    write_json(join(out_dir, "manifest.json"), doc);
}

MetricSpec metric_for(const RunConfig& cfg, Task task) {
    const std::string fallback = task == Task::classification ? "auc" : "mse";
    return metric_spec(metric_from_string(cfg.get_or("metric", fallback)));
}

Stratify stratify_for(const RunConfig& cfg, Task task) {
    const std::string fallback = task == Task::classification ? "joint" : "none";
    const std::string s = cfg.get_or("stratify", fallback);
    if (s == "none") return Stratify::none;
    if (s == "response") return Stratify::response;
    if (s == "joint") return Stratify::joint;
    throw ValidationError("config: stratify must be none, response or joint", "stratify");
}

struct FittedSplit {
    SplitIndexes split;
    Eigen::MatrixXd x_train, x_test;
    Eigen::VectorXd y_train, y_test;
    double observed = 0.0;
    int n_neg = 0, n_pos = 0;
};

FittedSplit fit_and_score(const Dataset& ds, const SplitIndexes& sp, const LearnerSpec& learner,
                          const MetricSpec& metric) {
    FittedSplit out;
    out.split = sp;
    out.x_train.resize(static_cast<Eigen::Index>(sp.train.size()), ds.p());
    out.x_test.resize(static_cast<Eigen::Index>(sp.test.size()), ds.p());
    out.y_train.resize(static_cast<Eigen::Index>(sp.train.size()));
    out.y_test.resize(static_cast<Eigen::Index>(sp.test.size()));
    for (std::size_t k = 0; k < sp.train.size(); ++k) {
        out.x_train.row(static_cast<Eigen::Index>(k)) = ds.features.row(sp.train[k]);
        out.y_train[static_cast<Eigen::Index>(k)] = ds.response[sp.train[k]];
    }
    for (std::size_t k = 0; k < sp.test.size(); ++k) {
        out.x_test.row(static_cast<Eigen::Index>(k)) = ds.features.row(sp.test[k]);
        out.y_test[static_cast<Eigen::Index>(k)] = ds.response[sp.test[k]];
    }
    const Model model = train(learner, out.x_train, out.y_train);
    out.observed = evaluate(metric, out.y_test, predict(model, out.x_test));
    if (ds.task == Task::classification) {
        const auto [lo, hi] = class_labels(ds.response);
        for (Eigen::Index i = 0; i < out.y_test.size(); ++i)
            (out.y_test[i] == hi ? out.n_pos : out.n_neg) += 1;
    }
    return out;
}

JointTable load_joint_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open target joint file: " + path, "target_joint");
    std::string line;
    if (!std::getline(in, line))
        throw ValidationError("format error: empty target joint file", "target_joint");
    struct Entry {
        std::string level;
        double label, prop;
    };
    std::vector<Entry> entries;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::istringstream row(line);
        std::string level, label_s, prop_s;
        if (!std::getline(row, level, ',') || !std::getline(row, label_s, ',') ||
            !std::getline(row, prop_s))
            throw ValidationError("target joint: expected 'confounder,response,proportion' rows",
                                  "target_joint");
        entries.push_back({level, std::stod(label_s), std::stod(prop_s)});
    }
    if (entries.empty()) throw ValidationError("target joint: no rows", "target_joint");

    std::set<std::string> levels;
    std::set<double> labels;
    for (const auto& e : entries) {
        levels.insert(e.level);
        labels.insert(e.label);
    }
    JointTable t;
    t.levels.assign(levels.begin(), levels.end());
    t.labels.assign(labels.begin(), labels.end());
    t.proportions = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.levels.size()),
                                          static_cast<Eigen::Index>(t.labels.size()));
    for (const auto& e : entries) {
        const auto li = std::find(t.levels.begin(), t.levels.end(), e.level) - t.levels.begin();
        const auto ji = std::find(t.labels.begin(), t.labels.end(), e.label) - t.labels.begin();
        if (e.prop < 0.0) throw ValidationError("target joint: negative proportion", "target_joint");
        t.proportions(li, ji) = e.prop;
    }
    if (std::abs(t.proportions.sum() - 1.0) > 1e-12)
        throw ValidationError("target joint: proportions must sum to 1", "target_joint");
    return t;
}

OrderedJson baseline_report_json(const BaselineReport& rep) {
    OrderedJson doc;
    doc["observed"] = rep.observed;
    doc["corrected_baseline"] = to_json(rep.corrected);
    doc["corrected_standard"] = to_json(rep.corrected_standard);
    doc["confounding_vs_baseline"] = to_json(rep.test);
    doc["baseline_n"] = rep.baseline_n;
    doc["test_size"] = rep.test_size;
    doc["null_summaries"] = {
        {"dev_restricted", to_json(fit_gaussian(rep.dev_restricted), rep.dev_restricted.b)},
        {"dev_standard", to_json(fit_gaussian(rep.dev_standard), rep.dev_standard.b)},
        {"baseline", to_json(fit_gaussian(rep.baseline_restricted), rep.baseline_restricted.b)},
    };
    return doc;
}

std::vector<double> alpha_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(static_cast<double>(i) / 100.0);
    return grid;
}

}  // namespace

RunConfig effective_config(const CommonArgs& args) {
    RunConfig cfg;
    if (!args.config_path.empty()) cfg = RunConfig::from_file(args.config_path);
    if (args.seed_set || !cfg.has("seed")) cfg.set("seed", std::to_string(args.seed));
    if (args.b_set) cfg.set("b", std::to_string(args.b));
    if (!args.metric.empty()) cfg.set("metric", args.metric);
    return cfg;
}

int cmd_analyze(const CommonArgs& args) {
    RunConfig cfg = effective_config(args);
    ensure_out_dir(args.out_dir);
    const std::uint64_t seed = cfg.get_u64("seed", 1);

    const Dataset ds = load_table(cfg.get("data"), cfg.table_schema());
    const LearnerSpec learner = cfg.learner_spec();
    const MetricSpec metric = metric_for(cfg, ds.task);
    const double test_fraction = cfg.get_double("test_fraction", 0.3);
    const SplitIndexes sp =
        split(ds, test_fraction, stratify_for(cfg, ds.task), derive_seed(seed, 1));

    const FittedSplit fitted = fit_and_score(ds, sp, learner, metric);
    const int test_size = static_cast<int>(sp.test.size());
    const int b_main = cfg.get_int("b", 1000);

    const std::uint64_t null_seed = derive_seed(seed, 2);
    const NullDistribution null_r =
        restricted_null(ds, sp, learner, metric, b_main, null_seed, args.threads);
    const NullDistribution null_s =
        standard_null(ds, sp, learner, metric, b_main, null_seed, args.threads);
    const GaussianFit fit_r = fit_gaussian(null_r);
    const GaussianFit fit_s = fit_gaussian(null_s);

    AnalysisReport report;
    report.metric = metric_name(metric.id);
    report.observed = fitted.observed;
    report.n_train = static_cast<int>(sp.train.size());
    report.n_test = test_size;
    report.restricted_fit = fit_r;
    report.standard_fit = fit_s;
    report.b_nulls = b_main;

    const std::string method = cfg.get_or("correction.method", "gaussian");
    std::vector<CorrectionResult> corrections;
    corrections.push_back(correct_gaussian(fitted.observed, fit_r, fit_s));
    corrections.push_back(correct_empirical(fitted.observed, null_r, null_s));
    if (metric.id == MetricId::auc)
        corrections.push_back(
            correct_auc_analytic(fitted.observed, fit_r, fitted.n_neg, fitted.n_pos));
    bool found = false;
    for (const auto& c : corrections) {
        if (correction_name(c.method) == method) {
            report.corrected = c;
            found = true;
        } else {
            report.alternatives.push_back(c);
        }
    }
    if (!found)
        throw ValidationError("config: correction.method '" + method + "' not applicable here",
                              "correction.method");

    report.response_test = response_learning_test(null_r, fitted.observed);

    // Confounding test: the permutation count is pinned to the test-set
    // size; reuse the main null only when it already satisfies that.
    const NullDistribution null_conf =
        b_main == test_size
            ? null_r
            : restricted_null(ds, sp, learner, metric, test_size, derive_seed(seed, 3),
                              args.threads);
    report.b_confounding = test_size;
    report.confounding_test =
        metric.id == MetricId::auc
            ? confounding_test_auc(null_conf, fitted.n_neg, fitted.n_pos, test_size)
            : confounding_test(null_conf, fit_s, test_size);

    write_json(join(args.out_dir, "report.json"), to_json(report));
    write_null_samples(join(args.out_dir, "nulls_restricted.csv"), null_r);
    write_null_samples(join(args.out_dir, "nulls_standard.csv"), null_s);
    write_manifest(args.out_dir, "analyze", cfg);
    return 0;
}

int cmd_simulate(const CommonArgs& args, const std::string& study, int experiment, int n_datasets,
                 double scale) {
    RunConfig cfg = effective_config(args);
    ensure_out_dir(args.out_dir);
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    cfg.set("study", study);

    if (study == "experiments") {
        std::vector<int> ids;
        if (experiment == 0) {
            ids = {1, 2, 3, 4};
        } else if (experiment >= 1 && experiment <= 4) {
            ids = {experiment};
        } else {
            throw ValidationError("simulate: --experiment must be 0 (all) or 1..4", "experiment");
        }
        cfg.set("n_datasets", std::to_string(n_datasets));
        cfg.set("scale_factor", format_double(scale));

        std::map<int, std::vector<ExperimentRow>> results;
        for (int id : ids) {
            ExperimentConfig ecfg;
            ecfg.experiment_id = id;
            ecfg.n_datasets = n_datasets;
            ecfg.learner = cfg.learner_spec();
            ecfg.seed = derive_seed(seed, static_cast<std::uint64_t>(id));
            ecfg.scale_factor = scale;
            ecfg.threads = args.threads;
            results[id] = run_experiment(ecfg);
            write_csv(join(args.out_dir, "exp" + std::to_string(id) + "_rows.csv"),
                      experiment_rows_table(results[id]));
            write_csv(join(args.out_dir, "exp" + std::to_string(id) + "_power.csv"),
                      power_curve(results[id], alpha_grid()));
        }
        if (ids.size() == 4) {
            Table resp, conf;
            resp.columns = {"alpha", "exp1", "exp2", "exp3", "exp4"};
            conf.columns = resp.columns;
            for (double alpha : alpha_grid()) {
                std::vector<double> rrow{alpha}, crow{alpha};
                for (int id : ids) {
                    double rr = 0.0, rc = 0.0;
                    for (const auto& row : results[id]) {
                        if (row.p_response <= alpha) rr += 1.0;
                        if (row.p_confounding <= alpha) rc += 1.0;
                    }
                    rrow.push_back(rr / static_cast<double>(results[id].size()));
                    crow.push_back(rc / static_cast<double>(results[id].size()));
                }
                resp.add_row(rrow);
                conf.add_row(crow);
            }
            write_csv(join(args.out_dir, "fig6a_curves.csv"), resp);
            write_csv(join(args.out_dir, "fig6b_curves.csv"), conf);
            const char* panel = "cdef";
            for (int id : ids) {
                Table hist;
                hist.columns = {"observed", "corrected"};
                for (const auto& row : results[id]) hist.add_row({row.observed, row.corrected});
                write_csv(join(args.out_dir,
                               std::string("fig6") + panel[id - 1] + "_hist.csv"),
                          hist);
            }
        }
    } else if (study == "correlation") {
        const int b = args.b_set ? args.b : cfg.get_int("b", 500);
        const int n = cfg.get_int("corr.n", 1000);
        cfg.set("n_datasets", std::to_string(n_datasets));
        const auto rows = run_correlation_study(n_datasets, b, n, seed, args.threads);
        write_csv(join(args.out_dir, "corr_study_rows.csv"), correlation_study_table(rows));
        auto scatter = [&](const char* name, double CorrelationStudyRow::*field) {
            Table t;
            t.columns = {"corrected", "partial_eq6"};
            for (const auto& r : rows) t.add_row({r.*field, r.partial_eq6});
            write_csv(join(args.out_dir, name), t);
        };
        scatter("fig5a_scatter.csv", &CorrelationStudyRow::corrected_empirical);
        scatter("fig5b_scatter.csv", &CorrelationStudyRow::corrected_gaussian);
        scatter("fig5c_scatter.csv", &CorrelationStudyRow::pcor_perm_closed);
    } else if (study == "asymptotics") {
        const int b = args.b_set ? args.b : cfg.get_int("b", 1000);
        const std::vector<int> sizes = {15, 30, 100};
        const std::vector<MetricId> metrics = {MetricId::mae,     MetricId::mse,
                                               MetricId::ccc,     MetricId::pearson,
                                               MetricId::auc,     MetricId::accuracy};
        const AsymptoticsStudy study_out =
            run_asymptotics_study(sizes, metrics, b, seed, args.threads);
        write_csv(join(args.out_dir, "asymptotics_ks.csv"), asymptotics_table(study_out));
        write_csv(join(args.out_dir, "asymptotics_nulls.csv"), study_out.null_samples);
    } else if (study == "baseline") {
        const int n = cfg.get_int("baseline.n", 10000);
        const BaselineScenario scenario = run_baseline_scenario(n, seed, args.threads);
        write_csv(join(args.out_dir, "fig9_nulls.csv"), scenario.nulls);
        write_json(join(args.out_dir, "baseline_report.json"),
                   baseline_report_json(scenario.report));
    } else {
        throw ValidationError(
            "simulate: --study must be experiments, correlation, asymptotics or baseline", "study");
    }
    write_manifest(args.out_dir, "simulate", cfg);
    return 0;
}

int cmd_partials(const CommonArgs& args) {
    RunConfig cfg = effective_config(args);
    ensure_out_dir(args.out_dir);
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    const int b = args.b_set ? args.b : cfg.get_int("b", 500);

    const std::string x_col = cfg.get("x_col");
    const std::string y_col = cfg.get("y_col");
    if (x_col == y_col) throw ValidationError("partials: x_col and y_col must differ", "x_col");

    TableSchema schema;
    schema.feature_cols = {x_col, y_col};
    schema.response_col = y_col;
    schema.confounder_cols = cfg.get_list("confounder_cols");
    schema.task = Task::regression;
    const std::string delim = cfg.get_or("delimiter", "comma");
    schema.delimiter = (delim == "tab" || delim == "\\t") ? '\t' : ',';
    for (const auto& [key, value] : cfg.entries()) {
        const std::string bins_prefix = "confounder_bins.";
        const std::string cuts_prefix = "confounder_cuts.";
        if (key.rfind(bins_prefix, 0) == 0) {
            schema.confounder_bins[key.substr(bins_prefix.size())] = cfg.get_int(key, 0);
        } else if (key.rfind(cuts_prefix, 0) == 0) {
            std::vector<double> cuts;
            for (const auto& item : cfg.get_list(key)) cuts.push_back(std::stod(item));
            schema.confounder_cuts[key.substr(cuts_prefix.size())] = cuts;
        }
    }
    const Dataset ds = load_table(cfg.get("data"), schema);
    const Eigen::VectorXd x = ds.features.col(0);
    const Eigen::VectorXd y = ds.features.col(1);
    const std::vector<int>& strata = ds.confounder.codes;
    Eigen::VectorXd c_numeric(static_cast<Eigen::Index>(strata.size()));
    for (std::size_t i = 0; i < strata.size(); ++i)
        c_numeric[static_cast<Eigen::Index>(i)] = strata[i];

    const double ref_pcov = pcov_definitional(x, y, strata);
    const double ref_pcor = pcor_residual(x, y, strata);
    const double ref_pdcov = pdcov(x, y, c_numeric);
    const double ref_pdcor = pdcor(x, y, c_numeric);

    struct Row {
        PartialEstimate est;
        double reference;
    };
    std::vector<Row> rows;
    rows.push_back({pcov_perm(x, y, strata, ExpectationMode::closed_form), ref_pcov});
    rows.push_back({pcov_perm(x, y, strata, ExpectationMode::monte_carlo, b, derive_seed(seed, 1)),
                    ref_pcov});
    rows.push_back({pcor_perm(x, y, strata, ExpectationMode::closed_form), ref_pcor});
    rows.push_back({pcor_perm(x, y, strata, ExpectationMode::monte_carlo, b, derive_seed(seed, 2)),
                    ref_pcor});
    rows.push_back({pdcov_perm(x, y, strata, b, derive_seed(seed, 3), args.threads), ref_pdcov});
    rows.push_back({pdcor_perm(x, y, strata, b, derive_seed(seed, 4), args.threads), ref_pdcor});

    std::ofstream out(join(args.out_dir, "partials.csv"));
    if (!out) throw ValidationError("cannot open output file");
    out << "estimator,mode,b,value,reference,abs_gap\n";
    for (const auto& row : rows) {
        out << estimator_name(row.est.estimator) << "," << expectation_mode_name(row.est.mode)
            << "," << row.est.b << "," << format_double(row.est.value) << ","
            << format_double(row.reference) << ","
            << format_double(std::abs(row.est.value - row.reference)) << "\n";
    }
    out.close();
    write_manifest(args.out_dir, "partials", cfg);
    return 0;
}

int cmd_baseline(const CommonArgs& args) {
    RunConfig cfg = effective_config(args);
    ensure_out_dir(args.out_dir);
    const std::uint64_t seed = cfg.get_u64("seed", 1);

    const Dataset dev = load_table(cfg.get("data"), cfg.table_schema());
    const JointTable target = load_joint_table(cfg.get("target_joint"));
    const LearnerSpec learner = cfg.learner_spec();
    const MetricSpec metric = metric_for(cfg, dev.task);

    BaselineOptions options;
    options.test_fraction = cfg.get_double("test_fraction", 0.5);
    options.b = args.b_set ? args.b : cfg.get_int("b", 0);
    options.threads = args.threads;

    const BaselineReport report = baseline_workflow(dev, target, learner, metric, seed, options);
    write_json(join(args.out_dir, "baseline_report.json"), baseline_report_json(report));

    Table nulls;
    nulls.columns = {"iteration", "dev_restricted", "dev_standard", "baseline"};
    for (int i = 0; i < report.dev_restricted.b; ++i) {
        nulls.add_row({static_cast<double>(i), report.dev_restricted.samples[i],
                       report.dev_standard.samples[i], report.baseline_restricted.samples[i]});
    }
    write_csv(join(args.out_dir, "fig9_nulls.csv"), nulls);
    write_manifest(args.out_dir, "baseline", cfg);
    return 0;
}

int cmd_generate(const CommonArgs& args, const std::string& model, int n,
                 const std::string& out_file) {
    RunConfig cfg = effective_config(args);
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    ensure_out_dir(fs::path(out_file).parent_path().empty()
                       ? std::string(".")
                       : fs::path(out_file).parent_path().string());
    RngStream rng(derive_seed(seed, 7), 0);

    if (model == "classification") {
        ClassGenParams params;
        params.n = n;
        if (cfg.has("gen.cor")) {
            params.joint = joint_from_cor(cfg.get_double("gen.cor", 0.8));
        } else {
            params.joint = BernoulliJoint{cfg.get_double("gen.p11", 0.45),
                                          cfg.get_double("gen.p10", 0.05),
                                          cfg.get_double("gen.p01", 0.05),
                                          cfg.get_double("gen.p00", 0.45)};
        }
        params.beta = cfg.get_double("gen.beta", 1.0);
        params.theta = cfg.get_double("gen.theta", 1.0);
        params.rho = cfg.get_double("gen.rho", 0.5);
        params.p = cfg.get_int("gen.p", 10);
        write_dataset_csv(out_file, gen_classification(params, rng));
    } else if (model == "regression") {
        RegGenParams params;
        params.n = n;
        params.p_c = cfg.get_double("gen.p_c", 0.5);
        params.beta_yc = cfg.get_double("gen.beta_yc", 1.0);
        params.beta = cfg.get_double("gen.beta", 1.0);
        params.theta = cfg.get_double("gen.theta", 1.0);
        params.rho = cfg.get_double("gen.rho", 0.5);
        params.p = cfg.get_int("gen.p", 10);
        params.error = cfg.get_or("gen.error", "gaussian") == "exponential"
                           ? NoiseKind::exponential
                           : NoiseKind::gaussian;
        write_dataset_csv(out_file, gen_regression(params, rng));
    } else if (model == "correlation") {
        CorrGenParams params;
        params.n = n;
        params.p = cfg.get_double("gen.p", 0.5);
        params.beta_xc = cfg.get_double("gen.beta_xc", 1.0);
        params.beta_yc = cfg.get_double("gen.beta_yc", 1.0);
        params.beta_xy = cfg.get_double("gen.beta_xy", 1.0);
        const CorrelationDraw draw = gen_correlation_model(params, rng);
        std::ofstream out(out_file);
        if (!out) throw ValidationError("cannot open output file: " + out_file);
        out << "x,y,c\n";
        for (int i = 0; i < params.n; ++i) {
            out << format_double(draw.x[i]) << "," << format_double(draw.y[i]) << ","
                << static_cast<int>(draw.c_numeric[i]) << "\n";
        }
    } else {
        throw ValidationError("generate: --model must be classification, regression or correlation",
                              "model");
    }
    return 0;
}

}  // namespace confound::cli
