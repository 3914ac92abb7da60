#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace confound {

enum class Task { classification, regression };

/// Categorical vector: per-row integer codes into a sorted level table.
/// Levels present in the table always have at least one row.
struct Categorical {
    std::vector<int> codes;
    std::vector<std::string> levels;

    std::size_t size() const { return codes.size(); }
    int n_levels() const { return static_cast<int>(levels.size()); }
    const std::string& label(std::size_t row) const { return levels[codes[row]]; }
};

/// Build a Categorical from raw string labels; levels are sorted and
/// re-coded so the representation is canonical.
Categorical make_categorical(const std::vector<std::string>& values);

struct Dataset {
    Eigen::MatrixXd features;  // n x p
    Eigen::VectorXd response;  // n
    Categorical confounder;    // n rows
    Task task = Task::classification;
    std::vector<std::string> ids;  // optional; empty or length n

    Eigen::Index n() const { return features.rows(); }
    Eigen::Index p() const { return features.cols(); }
};

/// Validate invariants (consistent lengths, n >= 2, p >= 1, binary labels
/// for classification) and return the dataset; throws ValidationError.
Dataset make_dataset(Eigen::MatrixXd features, Eigen::VectorXd response, Categorical confounder,
                     Task task, std::vector<std::string> ids = {});

/// The two class labels of a classification response, (lo, hi); the larger
/// label plays the role of the positive class.
std::pair<double, double> class_labels(const Eigen::VectorXd& y);

struct SplitIndexes {
    std::vector<int> train;
    std::vector<int> test;
};

/// Joint distribution over (confounder level x response label) cells.
struct JointTable {
    std::vector<std::string> levels;
    std::vector<double> labels;
    Eigen::MatrixXd proportions;  // levels x labels, sums to 1

    double proportion(const std::string& level, double label) const;
};

enum class Stratify { none, response, joint };

struct TableSchema {
    std::vector<std::string> feature_cols;  // entries ending in '*' match by prefix
    std::string response_col;
    std::vector<std::string> confounder_cols;
    Task task = Task::classification;
    char delimiter = ',';
    std::map<std::string, int> confounder_bins;  // quantile bins for numeric confounders
    std::map<std::string, std::vector<double>> confounder_cuts;  // explicit cut points
    std::string id_col;  // optional
};

/// Read a delimited text file (header required) into a Dataset under the
/// given column-role schema. Numeric confounder columns are rejected unless
/// a quantile bin count is supplied for them.
Dataset load_table(const std::string& path, const TableSchema& schema);

/// Write a dataset back out in the same delimited format (columns
/// x1..xp, y, c and optionally id).
void write_dataset_csv(const std::string& path, const Dataset& ds, char delimiter = ',');

/// Paste parallel categorical vectors row-wise into one combined vector.
/// Levels are joined with '|'; literal '|' and '\' in names are escaped.
std::vector<std::string> combine_confounders(const std::vector<std::vector<std::string>>& vectors);

/// Map reals to half-open bins [cut_{k-1}, cut_k); the final bin is closed
/// above. Unoccupied bins are dropped from the level set.
std::vector<std::string> discretize(const Eigen::VectorXd& values, const std::vector<double>& cut_points);

/// Cut at the k-quantiles of the data. Fails if the values cannot support k
/// distinct bins.
std::vector<std::string> discretize_quantiles(const Eigen::VectorXd& values, int bins);

/// Seeded train/test split. Stratified variants use largest-remainder
/// allocation per cell, so each cell's test share is within one row of
/// test_fraction * cell size.
SplitIndexes split(const Dataset& ds, double test_fraction, Stratify stratify, std::uint64_t seed);

/// As split(), but with an exact test-set row count (used when two splits
/// must produce equally sized test sets).
SplitIndexes split_exact_test(const Dataset& ds, int test_count, Stratify stratify, std::uint64_t seed);

/// Empirical joint table of a classification dataset.
JointTable joint_table(const Dataset& ds);

/// Largest subsample of ds whose empirical (confounder x response) table
/// matches `target` within one row per cell; rows are drawn uniformly
/// within cells and returned in original row order.
Dataset subsample_to_joint(const Dataset& ds, const JointTable& target, std::uint64_t seed);

/// Row subset (indexes must be valid; order preserved).
Dataset take_rows(const Dataset& ds, const std::vector<int>& rows);

}  // namespace confound
