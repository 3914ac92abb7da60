#include "confound/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "confound/errors.hpp"
#include "confound/rng.hpp"

namespace confound {

namespace {

bool parse_double(const std::string& s, double* out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + s.size()) return false;
    if (!std::isfinite(v)) return false;
    *out = v;
    return true;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == delim) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::string escape_level(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        if (ch == '|' || ch == '\\') out += '\\';
        out += ch;
    }
    return out;
}

/// Largest-remainder allocation: integer counts a_i >= 0 with sum == total
/// and |a_i - quota_i| < 1, subject to quota_i >= 0 and sum(quota) ~ total.
std::vector<int> largest_remainder(const std::vector<double>& quotas, int total) {
    const std::size_t k = quotas.size();
    std::vector<int> alloc(k, 0);
    std::vector<std::pair<double, std::size_t>> rema(k);
    int assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        alloc[i] = static_cast<int>(std::floor(quotas[i]));
        assigned += alloc[i];
        rema[i] = {quotas[i] - std::floor(quotas[i]), i};
    }
    std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    int leftover = total - assigned;
    for (std::size_t j = 0; j < k && leftover > 0; ++j) {
        ++alloc[rema[j].second];
        --leftover;
    }
    // Negative leftover can occur only from floating error in the quotas;
    // trim from the smallest remainders.
    for (std::size_t j = k; j-- > 0 && leftover < 0;) {
        if (alloc[rema[j].second] > 0) {
            --alloc[rema[j].second];
            ++leftover;
        }
    }
    return alloc;
}

/// Choose k of the given rows uniformly without replacement (partial
/// Fisher-Yates); returns them sorted ascending.
std::vector<int> choose_rows(std::vector<int> rows, int k, RngStream& rng) {
    const int m = static_cast<int>(rows.size());
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(m - i)));
        std::swap(rows[i], rows[j]);
    }
    rows.resize(k);
    std::sort(rows.begin(), rows.end());
    return rows;
}

struct CellKey {
    int code;
    int label_idx;
    bool operator<(const CellKey& o) const {
        return code != o.code ? code < o.code : label_idx < o.label_idx;
    }
};

}  // namespace

Categorical make_categorical(const std::vector<std::string>& values) {
    if (values.empty()) throw ValidationError("categorical: empty vector");
    std::vector<std::string> levels(values);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < levels.size(); ++i) index[levels[i]] = static_cast<int>(i);
    Categorical cat;
    cat.levels = std::move(levels);
    cat.codes.reserve(values.size());
    for (const auto& v : values) cat.codes.push_back(index.at(v));
    return cat;
}

Dataset make_dataset(Eigen::MatrixXd features, Eigen::VectorXd response, Categorical confounder,
                     Task task, std::vector<std::string> ids) {
    const Eigen::Index n = features.rows();
    if (n < 2) throw ValidationError("dataset: need at least 2 rows");
    if (features.cols() < 1) throw ValidationError("dataset: need at least 1 feature");
    if (response.size() != n) throw ValidationError("dataset: response length mismatch");
    if (static_cast<Eigen::Index>(confounder.size()) != n)
        throw ValidationError("dataset: confounder length mismatch");
    if (!ids.empty() && static_cast<Eigen::Index>(ids.size()) != n)
        throw ValidationError("dataset: ids length mismatch");
    if (!features.allFinite() || !response.allFinite())
        throw ValidationError("dataset: non-finite values");
    if (task == Task::classification) class_labels(response);  // throws if not binary
    Dataset ds;
    ds.features = std::move(features);
    ds.response = std::move(response);
    ds.confounder = std::move(confounder);
    ds.task = task;
    ds.ids = std::move(ids);
    return ds;
}

std::pair<double, double> class_labels(const Eigen::VectorXd& y) {
    std::set<double> labels;
    for (Eigen::Index i = 0; i < y.size(); ++i) labels.insert(y[i]);
    if (labels.size() != 2)
        throw ValidationError("classification response must have exactly 2 distinct labels, got " +
                              std::to_string(labels.size()));
    return {*labels.begin(), *labels.rbegin()};
}

double JointTable::proportion(const std::string& level, double label) const {
    for (std::size_t i = 0; i < levels.size(); ++i) {
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (levels[i] == level && labels[j] == label) return proportions(i, j);
        }
    }
    return 0.0;
}

std::vector<std::string> combine_confounders(const std::vector<std::vector<std::string>>& vectors) {
    if (vectors.empty()) throw ValidationError("combine_confounders: no input vectors");
    const std::size_t n = vectors.front().size();
    for (const auto& v : vectors) {
        if (v.size() != n) throw ValidationError("combine_confounders: length mismatch");
    }
    std::vector<std::string> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string combined;
        for (std::size_t k = 0; k < vectors.size(); ++k) {
            if (k > 0) combined += '|';
            combined += escape_level(vectors[k][i]);
        }
        out[i] = combined;
    }
    return out;
}

std::vector<std::string> discretize(const Eigen::VectorXd& values, const std::vector<double>& cut_points) {
    if (cut_points.empty()) throw ValidationError("discretize: need at least one cut point");
    for (std::size_t i = 1; i < cut_points.size(); ++i) {
        if (!(cut_points[i - 1] < cut_points[i]))
            throw ValidationError("discretize: cut points must be strictly increasing");
    }
    const int n_bins = static_cast<int>(cut_points.size()) + 1;
    int width = 1;
    for (int b = n_bins; b >= 10; b /= 10) ++width;
    width = std::min(width, 9);
    std::vector<std::string> out(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        // half-open [lo, hi): a value equal to a cut starts the next bin
        const int bin = static_cast<int>(
            std::upper_bound(cut_points.begin(), cut_points.end(), values[i]) - cut_points.begin());
        char buf[32];
        std::snprintf(buf, sizeof(buf), "b%0*d", width, bin + 1);
        out[i] = buf;
    }
    return out;
}

std::vector<std::string> discretize_quantiles(const Eigen::VectorXd& values, int bins) {
    if (bins < 2) throw ValidationError("discretize: need at least 2 bins");
    std::vector<double> sorted(values.data(), values.data() + values.size());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t distinct =
        std::set<double>(sorted.begin(), sorted.end()).size();
    if (distinct < static_cast<std::size_t>(bins))
        throw ValidationError("discretize: fewer distinct values than requested quantile bins");
    const double n1 = static_cast<double>(sorted.size() - 1);
    std::vector<double> cuts;
    for (int j = 1; j < bins; ++j) {
        const double h = n1 * static_cast<double>(j) / static_cast<double>(bins);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const double frac = h - std::floor(h);
        double q = sorted[lo];
        if (lo + 1 < sorted.size()) q += frac * (sorted[lo + 1] - sorted[lo]);
        cuts.push_back(q);
    }
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        if (!(cuts[i - 1] < cuts[i]))
            throw ValidationError("discretize: fewer distinct values than requested quantile bins");
    }
    return discretize(values, cuts);
}

namespace {

std::map<CellKey, std::vector<int>> build_cells(const Dataset& ds, Stratify stratify) {
    std::map<CellKey, std::vector<int>> cells;
    std::vector<double> labels;
    std::map<double, int> label_idx;
    if (ds.task == Task::classification) {
        auto [lo, hi] = class_labels(ds.response);
        labels = {lo, hi};
        label_idx[lo] = 0;
        label_idx[hi] = 1;
    }
    for (int i = 0; i < static_cast<int>(ds.n()); ++i) {
        CellKey key{0, 0};
        switch (stratify) {
            case Stratify::none:
                break;
            case Stratify::response:
                if (ds.task != Task::classification)
                    throw ValidationError("split: stratify=response requires a classification task");
                key.label_idx = label_idx.at(ds.response[i]);
                break;
            case Stratify::joint:
                key.code = ds.confounder.codes[i];
                if (ds.task == Task::classification) key.label_idx = label_idx.at(ds.response[i]);
                break;
        }
        cells[key].push_back(i);
    }
    return cells;
}

void check_classification_split(const Dataset& ds, const SplitIndexes& s) {
    if (s.test.size() < 2) throw ValidationError("split: test set smaller than 2 rows");
    if (s.train.size() < 2) throw ValidationError("split: train set smaller than 2 rows");
    if (ds.task != Task::classification) return;
    for (const auto* part : {&s.train, &s.test}) {
        std::set<double> seen;
        for (int i : *part) seen.insert(ds.response[i]);
        if (seen.size() != 2)
            throw ValidationError(
                "split: a cell is too small to place both class labels in train and test");
    }
}

}  // namespace

SplitIndexes split_exact_test(const Dataset& ds, int test_count, Stratify stratify,
                              std::uint64_t seed) {
    const int n = static_cast<int>(ds.n());
    if (test_count < 1 || test_count >= n)
        throw ValidationError("split: test count out of range");
    auto cells = build_cells(ds, stratify);

    std::vector<double> quotas;
    std::vector<const std::vector<int>*> cell_rows;
    for (const auto& [key, rows] : cells) {
        quotas.push_back(static_cast<double>(test_count) * static_cast<double>(rows.size()) /
                         static_cast<double>(n));
        cell_rows.push_back(&rows);
    }
    const std::vector<int> alloc = largest_remainder(quotas, test_count);

    RngStream rng(seed, 0);
    std::vector<char> in_test(n, 0);
    for (std::size_t c = 0; c < cell_rows.size(); ++c) {
        const auto chosen = choose_rows(*cell_rows[c], alloc[c], rng);
        for (int r : chosen) in_test[r] = 1;
    }
    SplitIndexes out;
    for (int i = 0; i < n; ++i) (in_test[i] ? out.test : out.train).push_back(i);
    check_classification_split(ds, out);
    return out;
}

SplitIndexes split(const Dataset& ds, double test_fraction, Stratify stratify, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ValidationError("split: test_fraction must lie in (0,1)");
    const int test_count =
        static_cast<int>(std::llround(test_fraction * static_cast<double>(ds.n())));
    return split_exact_test(ds, test_count, stratify, seed);
}

JointTable joint_table(const Dataset& ds) {
    if (ds.task != Task::classification)
        throw ValidationError("joint_table: requires a classification task");
    auto [lo, hi] = class_labels(ds.response);
    JointTable t;
    t.levels = ds.confounder.levels;
    t.labels = {lo, hi};
    t.proportions = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.levels.size()), 2);
    for (int i = 0; i < static_cast<int>(ds.n()); ++i) {
        const int li = ds.confounder.codes[i];
        const int yi = ds.response[i] == hi ? 1 : 0;
        t.proportions(li, yi) += 1.0;
    }
    t.proportions /= static_cast<double>(ds.n());
    return t;
}

Dataset take_rows(const Dataset& ds, const std::vector<int>& rows) {
    const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd X(m, ds.p());
    Eigen::VectorXd y(m);
    std::vector<std::string> labels(m);
    std::vector<std::string> ids;
    if (!ds.ids.empty()) ids.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const int r = rows[i];
        X.row(i) = ds.features.row(r);
        y[i] = ds.response[r];
        labels[i] = ds.confounder.label(r);
        if (!ds.ids.empty()) ids[i] = ds.ids[r];
    }
    return make_dataset(std::move(X), std::move(y), make_categorical(labels), ds.task,
                        std::move(ids));
}

Dataset subsample_to_joint(const Dataset& ds, const JointTable& target, std::uint64_t seed) {
    if (ds.task != Task::classification)
        throw ValidationError("subsample_to_joint: requires a classification task");
    auto [lo, hi] = class_labels(ds.response);

    // Source rows per (level name, label index) cell.
    std::map<std::pair<std::string, int>, std::vector<int>> source;
    for (int i = 0; i < static_cast<int>(ds.n()); ++i) {
        const int yi = ds.response[i] == hi ? 1 : 0;
        source[{ds.confounder.label(i), yi}].push_back(i);
    }

    // Positive target cells in a deterministic order.
    struct Cell {
        std::string level;
        int label_idx;
        double prop;
        const std::vector<int>* rows;
    };
    std::vector<Cell> cells;
    for (std::size_t li = 0; li < target.levels.size(); ++li) {
        for (std::size_t ji = 0; ji < target.labels.size(); ++ji) {
            const double prop = target.proportions(li, ji);
            if (prop <= 0.0) continue;
            int label_idx;
            if (target.labels[ji] == lo) {
                label_idx = 0;
            } else if (target.labels[ji] == hi) {
                label_idx = 1;
            } else {
                throw ValidationError("subsample_to_joint: target label not present in dataset");
            }
            const auto it = source.find({target.levels[li], label_idx});
            if (it == source.end())
                throw ValidationError("subsample_to_joint: target cell '" + target.levels[li] +
                                      "' x " + std::to_string(target.labels[ji]) +
                                      " is empty in the source data");
            cells.push_back({target.levels[li], label_idx, prop, &it->second});
        }
    }
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        return a.level != b.level ? a.level < b.level : a.label_idx < b.label_idx;
    });

    // Largest N whose largest-remainder allocation fits inside every cell.
    // The nudge keeps exact-ratio targets from losing a row to division
    // rounding; the feasibility loop below corrects any overshoot.
    int n_max = static_cast<int>(ds.n());
    for (const auto& c : cells) {
        n_max = std::min(n_max, static_cast<int>(std::floor(
                                    static_cast<double>(c.rows->size()) / c.prop + 1e-9)));
    }
    std::vector<int> alloc;
    int n_sub = n_max;
    for (; n_sub >= 2; --n_sub) {
        std::vector<double> quotas;
        for (const auto& c : cells) quotas.push_back(c.prop * static_cast<double>(n_sub));
        alloc = largest_remainder(quotas, n_sub);
        bool ok = true;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (alloc[k] > static_cast<int>(cells[k].rows->size())) {
                ok = false;
                break;
            }
        }
        if (ok) break;
    }
    if (n_sub < 2) throw ValidationError("subsample_to_joint: target not satisfiable");

    RngStream rng(seed, 0);
    std::vector<int> keep;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto chosen = choose_rows(*cells[k].rows, alloc[k], rng);
        keep.insert(keep.end(), chosen.begin(), chosen.end());
    }
    std::sort(keep.begin(), keep.end());
    return take_rows(ds, keep);
}

Dataset load_table(const std::string& path, const TableSchema& schema) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("format error: empty file: " + path);
    const std::vector<std::string> header = split_line(line, schema.delimiter);
    std::map<std::string, int> col_index;
    for (std::size_t i = 0; i < header.size(); ++i) col_index[header[i]] = static_cast<int>(i);

    auto find_col = [&](const std::string& name, const std::string& role,
                        const std::string& field) {
        const auto it = col_index.find(name);
        if (it == col_index.end())
            throw ValidationError("schema error: missing " + role + " column '" + name + "'",
                                  field);
        return it->second;
    };

    // Expand feature column patterns ('x*' matches by prefix, header order).
    std::vector<int> feature_idx;
    std::set<int> seen;
    for (const auto& pat : schema.feature_cols) {
        if (!pat.empty() && pat.back() == '*') {
            const std::string prefix = pat.substr(0, pat.size() - 1);
            bool any = false;
            for (std::size_t i = 0; i < header.size(); ++i) {
                if (header[i].rfind(prefix, 0) == 0) {
                    if (seen.insert(static_cast<int>(i)).second)
                        feature_idx.push_back(static_cast<int>(i));
                    any = true;
                }
            }
            if (!any)
                throw ValidationError("schema error: no columns match feature pattern '" + pat + "'");
        } else {
            const int idx = find_col(pat, "feature", "feature_cols");
            if (seen.insert(idx).second) feature_idx.push_back(idx);
        }
    }
    if (feature_idx.empty()) throw ValidationError("schema error: no feature columns");
    const int response_idx = find_col(schema.response_col, "response", "response_col");
    if (schema.confounder_cols.empty())
        throw ValidationError("schema error: no confounder columns");
    std::vector<int> conf_idx;
    for (const auto& c : schema.confounder_cols)
        conf_idx.push_back(find_col(c, "confounder", "confounder_cols"));
    int id_idx = -1;
    if (!schema.id_col.empty()) id_idx = find_col(schema.id_col, "id", "id_col");

    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = split_line(line, schema.delimiter);
        if (fields.size() != header.size())
            throw ValidationError("format error: row " + std::to_string(rows.size() + 2) + " has " +
                                  std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(header.size()));
        rows.push_back(std::move(fields));
    }
    if (rows.empty()) throw ValidationError("format error: no data rows in " + path);
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());

    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(feature_idx.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < feature_idx.size(); ++j) {
            double v;
            if (!parse_double(rows[i][feature_idx[j]], &v))
                throw ValidationError("missing value: non-numeric cell in feature column '" +
                                      header[feature_idx[j]] + "', row " + std::to_string(i + 2));
            X(i, static_cast<Eigen::Index>(j)) = v;
        }
    }
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double v;
        if (!parse_double(rows[i][response_idx], &v))
            throw ValidationError("missing value: non-numeric cell in response column '" +
                                  schema.response_col + "', row " + std::to_string(i + 2));
        y[i] = v;
    }
    if (schema.task == Task::classification) {
        std::set<double> labels(y.data(), y.data() + y.size());
        if (labels.size() != 2)
            throw ValidationError("label error: classification response '" + schema.response_col +
                                  "' has " + std::to_string(labels.size()) +
                                  " distinct labels, expected 2");
    }

    std::vector<std::vector<std::string>> conf_vectors;
    for (std::size_t k = 0; k < conf_idx.size(); ++k) {
        std::vector<std::string> raw(n);
        bool all_numeric = true;
        Eigen::VectorXd numeric(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            raw[i] = rows[i][conf_idx[k]];
            double v;
            if (all_numeric && parse_double(raw[i], &v)) {
                numeric[i] = v;
            } else {
                all_numeric = false;
            }
        }
        const auto& name = schema.confounder_cols[k];
        const auto bins_it = schema.confounder_bins.find(name);
        const auto cuts_it = schema.confounder_cuts.find(name);
        if (bins_it != schema.confounder_bins.end() && cuts_it != schema.confounder_cuts.end())
            throw ValidationError("schema error: both bins and cut points supplied for '" + name +
                                  "'");
        if (bins_it != schema.confounder_bins.end() || cuts_it != schema.confounder_cuts.end()) {
            if (!all_numeric)
                throw ValidationError(
                    "schema error: discretization supplied for non-numeric confounder '" + name +
                    "'");
            conf_vectors.push_back(cuts_it != schema.confounder_cuts.end()
                                       ? discretize(numeric, cuts_it->second)
                                       : discretize_quantiles(numeric, bins_it->second));
        } else {
            if (all_numeric)
                throw ValidationError("schema error: numeric confounder '" + name +
                                      "' requires a discretization (confounder_bins or "
                                      "confounder_cuts)");
            conf_vectors.push_back(std::move(raw));
        }
    }
    const auto combined = combine_confounders(conf_vectors);

    std::vector<std::string> ids;
    if (id_idx >= 0) {
        ids.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) ids[i] = rows[i][id_idx];
    }
    return make_dataset(std::move(X), std::move(y), make_categorical(combined), schema.task,
                        std::move(ids));
}

void write_dataset_csv(const std::string& path, const Dataset& ds, char delimiter) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open output file: " + path);
    const bool has_ids = !ds.ids.empty();
    if (has_ids) out << "id" << delimiter;
    for (Eigen::Index j = 0; j < ds.p(); ++j) out << "x" << (j + 1) << delimiter;
    out << "y" << delimiter << "c\n";
    char buf[64];
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        if (has_ids) out << ds.ids[i] << delimiter;
        for (Eigen::Index j = 0; j < ds.p(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.12g", ds.features(i, j));
            out << buf << delimiter;
        }
        std::snprintf(buf, sizeof(buf), "%.12g", ds.response[i]);
        out << buf << delimiter << ds.confounder.label(i) << "\n";
    }
}

}  // namespace confound
