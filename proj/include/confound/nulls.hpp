#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "confound/dataset.hpp"
#include "confound/learners.hpp"
#include "confound/metrics.hpp"

namespace confound {

enum class Scheme { restricted, standard, baseline };

std::string scheme_name(Scheme s);

struct NullDistribution {
    std::vector<double> samples;
    Scheme scheme = Scheme::restricted;
    MetricSpec metric;
    int b = 0;
    std::uint64_t master_seed = 0;
};

struct GaussianFit {
    double a = 0.0;  // sample mean
    double s = 0.0;  // sample sd, denominator b-1
};

/// Monte Carlo restricted permutation null: each iteration shuffles the
/// train and test responses within confounder strata, retrains, and records
/// the metric on the shuffled test response. Iteration i draws from RNG
/// stream (seed, i), so results are identical for any worker count.
NullDistribution restricted_null(const Dataset& ds, const SplitIndexes& split,
                                 const LearnerSpec& learner, const MetricSpec& metric, int b,
                                 std::uint64_t seed, int threads = 1);

/// Same loop with unrestricted shuffles of the train and test responses.
NullDistribution standard_null(const Dataset& ds, const SplitIndexes& split,
                               const LearnerSpec& learner, const MetricSpec& metric, int b,
                               std::uint64_t seed, int threads = 1);

/// Permutation null of an association metric between two raw vectors
/// (no learner): sample i is metric(y*, x) with y shuffled restrictedly
/// within the strata (Scheme::restricted) or freely (Scheme::standard).
NullDistribution association_null(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                  const std::vector<int>& strata, const MetricSpec& metric,
                                  Scheme scheme, int b, std::uint64_t seed);

/// Variant of restricted_null with explicit strata codes in place of the
/// dataset's confounder (used by the exact confounding test, which shuffles
/// the confounder itself).
NullDistribution restricted_null_with_strata(const Dataset& ds, const SplitIndexes& split,
                                             const std::vector<int>& strata,
                                             const LearnerSpec& learner, const MetricSpec& metric,
                                             int b, std::uint64_t seed, int threads = 1);

/// Orientation-aware add-one permutation p-value:
/// (1 + #{samples at least as good as observed}) / (b + 1).
double p_value(const NullDistribution& null, double observed);

/// Sample mean / sd of the null (b >= 2).
GaussianFit fit_gaussian(const NullDistribution& null);

/// Write the samples as a single-column delimited file with header "value".
void write_null_samples(const std::string& path, const NullDistribution& null);

}  // namespace confound
