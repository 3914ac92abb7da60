#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "confound/dataset.hpp"
#include "confound/learners.hpp"
#include "confound/metrics.hpp"

namespace confound {

/// Flat key = value configuration with dotted keys. Files may be either the
/// plain "key = value" format (# comments) or a JSON object, which is
/// flattened into dotted keys.
class RunConfig {
public:
    static RunConfig from_file(const std::string& path);
    static RunConfig from_text(const std::string& text);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get(const std::string& key) const;                      // throws if missing
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;    // comma separated

    const std::map<std::string, std::string>& entries() const { return entries_; }

    /// learner.kind / learner.l2 / learner.max_iters / learner.tol.
    LearnerSpec learner_spec() const;
    /// feature_cols / response_col / confounder_cols / task / delimiter /
    /// confounder_bins.<col> / id_col.
    TableSchema table_schema() const;

private:
    std::map<std::string, std::string> entries_;
};

}  // namespace confound
