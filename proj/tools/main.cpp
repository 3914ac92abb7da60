#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "commands.hpp"
#include "confound/errors.hpp"

namespace {

using confound::cli::CommonArgs;

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Config file (key = value or JSON)");
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_option("--seed", args.seed, "Master seed (all randomness flows from it)")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--threads", args.threads, "Worker count (outputs are independent of it)");
    cmd->add_option("--b", args.b, "Permutation count")->each([&args](const std::string&) {
        args.b_set = true;
    });
    cmd->add_option("--metric", args.metric, "Metric: auc, accuracy, mse, mae, pearson, ccc");
}

void write_error_record(const CommonArgs& args, const std::string& type, const std::string& message,
                        const std::string& field) {
    nlohmann::ordered_json doc;
    doc["error"]["type"] = type;
    doc["error"]["message"] = message;
    if (!field.empty()) doc["error"]["field"] = field;
    std::fprintf(stderr, "%s\n", doc.dump().c_str());
    std::error_code ec;
    if (!args.out_dir.empty() && std::filesystem::is_directory(args.out_dir, ec)) {
        std::ofstream out(std::filesystem::path(args.out_dir) / "error.json");
        if (out) out << doc.dump(2) << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Permutation-based confounding diagnostics for machine learning evaluation"};
    app.require_subcommand(1);

    CommonArgs args;

    auto* analyze = app.add_subcommand(
        "analyze", "Test response/confounding learning and correct a metric on a dataset");
    add_common(analyze, args);

    auto* simulate = app.add_subcommand("simulate", "Reproduce the simulation studies");
    add_common(simulate, args);
    std::string study = "experiments";
    int experiment = 0;
    int n_datasets = 200;
    double scale = 1.0;
    simulate->add_option("--study", study,
                         "experiments | correlation | asymptotics | baseline");
    simulate->add_option("--experiment", experiment, "Experiment 1..4, or 0 for all");
    simulate->add_option("--datasets", n_datasets, "Datasets per experiment/study");
    simulate->add_option("--scale", scale, "Scale factor in (0,1] for desk runs");

    auto* partials = app.add_subcommand(
        "partials", "Estimate partial (distance) covariance/correlation via restricted permutations");
    add_common(partials, args);

    auto* baseline = app.add_subcommand(
        "baseline", "Correct against a population-of-interest joint distribution");
    add_common(baseline, args);

    auto* generate = app.add_subcommand("generate", "Generate synthetic datasets");
    add_common(generate, args);
    std::string model = "classification";
    int gen_n = 600;
    std::string out_file = "dataset.csv";
    generate->add_option("--model", model, "classification | regression | correlation");
    generate->add_option("--n", gen_n, "Rows to generate");
    generate->add_option("--out-file", out_file, "Output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return confound::cli::cmd_analyze(args);
        if (simulate->parsed())
            return confound::cli::cmd_simulate(args, study, experiment, n_datasets, scale);
        if (partials->parsed()) return confound::cli::cmd_partials(args);
        if (baseline->parsed()) return confound::cli::cmd_baseline(args);
        if (generate->parsed()) return confound::cli::cmd_generate(args, model, gen_n, out_file);
    } catch (const confound::ValidationError& e) {
        write_error_record(args, "validation", e.what(), e.field);
        return 1;
    } catch (const confound::ComputationError& e) {
        write_error_record(args, "computation", e.what(), "");
        return 2;
    } catch (const std::exception& e) {
        write_error_record(args, "computation", e.what(), "");
        return 2;
    }
    return 0;
}
