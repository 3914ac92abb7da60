#pragma once

#include <string>

#include "confound/config.hpp"

namespace confound::cli {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int threads = 1;
    int b = 0;           // 0 = command default
    std::string metric;  // empty = config / default
    bool seed_set = false, b_set = false;
};

/// Merge flag overrides into the config (flags win), normalize defaults.
RunConfig effective_config(const CommonArgs& args);

int cmd_analyze(const CommonArgs& args);
int cmd_simulate(const CommonArgs& args, const std::string& study, int experiment, int n_datasets,
                 double scale);
int cmd_partials(const CommonArgs& args);
int cmd_baseline(const CommonArgs& args);
int cmd_generate(const CommonArgs& args, const std::string& model, int n, const std::string& out_file);

}  // namespace confound::cli
