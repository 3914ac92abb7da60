#include "confound/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "confound/errors.hpp"

namespace confound {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

void flatten_json(const nlohmann::json& node, const std::string& prefix,
                  std::map<std::string, std::string>& out) {
    if (node.is_object()) {
        for (const auto& [key, value] : node.items()) {
            flatten_json(value, prefix.empty() ? key : prefix + "." + key, out);
        }
    } else if (node.is_array()) {
        std::string joined;
        for (std::size_t i = 0; i < node.size(); ++i) {
            if (i) joined += ",";
            if (node[i].is_string()) {
                joined += node[i].get<std::string>();
            } else {
                joined += node[i].dump();
            }
        }
        out[prefix] = joined;
    } else if (node.is_string()) {
        out[prefix] = node.get<std::string>();
    } else {
        out[prefix] = node.dump();
    }
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    const std::string body = trim(text);
    if (!body.empty() && body.front() == '{') {
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("config JSON parse error: ") + e.what());
        }
        if (!parsed.is_object()) throw ValidationError("config JSON must be an object");
        flatten_json(parsed, "", cfg.entries_);
        return cfg;
    }
    std::istringstream in(body);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ValidationError("config line " + std::to_string(line_no) + ": empty key");
        cfg.entries_[key] = value;
    }
    return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) { entries_[key] = value; }

bool RunConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string RunConfig::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ValidationError("config: missing required key '" + key + "'");
    return it->second;
}

std::string RunConfig::get_or(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end != it->second.c_str() + it->second.size())
        throw ValidationError("config: key '" + key + "' is not a number");
    return v;
}

int RunConfig::get_int(const std::string& key, int fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    return static_cast<int>(v);
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw ValidationError("config: key '" + key + "' is not an unsigned integer");
    }
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::istringstream in(get(key));
    std::string item;
    while (std::getline(in, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    if (out.empty()) throw ValidationError("config: key '" + key + "' is an empty list");
    return out;
}

LearnerSpec RunConfig::learner_spec() const {
    LearnerSpec spec;
    const std::string kind = get_or("learner.kind", "logistic");
    if (kind == "logistic") {
        spec.kind = LearnerKind::logistic;
    } else if (kind == "ols") {
        spec.kind = LearnerKind::ols;
    } else {
        throw ValidationError("config: learner.kind must be 'logistic' or 'ols'");
    }
    spec.l2_penalty = get_double("learner.l2", spec.l2_penalty);
    spec.max_iters = get_int("learner.max_iters", spec.max_iters);
    spec.tol = get_double("learner.tol", spec.tol);
    return spec;
}

TableSchema RunConfig::table_schema() const {
    TableSchema schema;
    schema.feature_cols = get_list("feature_cols");
    schema.response_col = get("response_col");
    schema.confounder_cols = get_list("confounder_cols");
    const std::string task = get_or("task", "classification");
    if (task == "classification") {
        schema.task = Task::classification;
    } else if (task == "regression") {
        schema.task = Task::regression;
    } else {
        throw ValidationError("config: task must be 'classification' or 'regression'");
    }
    const std::string delim = get_or("delimiter", "comma");
    if (delim == "comma" || delim == ",") {
        schema.delimiter = ',';
    } else if (delim == "tab" || delim == "\\t") {
        schema.delimiter = '\t';
    } else {
        throw ValidationError("config: delimiter must be 'comma' or 'tab'");
    }
    schema.id_col = get_or("id_col", "");
    for (const auto& [key, value] : entries_) {
        const std::string bins_prefix = "confounder_bins.";
        const std::string cuts_prefix = "confounder_cuts.";
        if (key.rfind(bins_prefix, 0) == 0) {
            schema.confounder_bins[key.substr(bins_prefix.size())] = get_int(key, 0);
        } else if (key.rfind(cuts_prefix, 0) == 0) {
            std::vector<double> cuts;
            for (const auto& item : get_list(key)) cuts.push_back(std::stod(item));
            schema.confounder_cuts[key.substr(cuts_prefix.size())] = cuts;
        }
    }
    return schema;
}

}  // namespace confound
