#include "confound/nulls.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "confound/errors.hpp"
#include "confound/parallel.hpp"
#include "confound/rng.hpp"
#include "confound/shuffle.hpp"
#include "confound/stats.hpp"

namespace confound {

namespace {

struct SplitParts {
    Eigen::MatrixXd x_train, x_test;
    Eigen::VectorXd y_train, y_test;
    std::vector<int> strata_train, strata_test;
};

SplitParts gather(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const std::vector<int>& strata, const SplitIndexes& split) {
    const auto n = static_cast<Eigen::Index>(X.rows());
    for (const auto* part : {&split.train, &split.test}) {
        if (part->empty()) throw ValidationError("null engine: empty split part");
        for (int i : *part)
            if (i < 0 || i >= n) throw ValidationError("null engine: split index out of range");
    }
    SplitParts parts;
    auto fill = [&](const std::vector<int>& idx, Eigen::MatrixXd& Xo, Eigen::VectorXd& yo,
                    std::vector<int>& so) {
        Xo.resize(static_cast<Eigen::Index>(idx.size()), X.cols());
        yo.resize(static_cast<Eigen::Index>(idx.size()));
        so.resize(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) {
            Xo.row(static_cast<Eigen::Index>(k)) = X.row(idx[k]);
            yo[static_cast<Eigen::Index>(k)] = y[idx[k]];
            so[k] = strata[idx[k]];
        }
    };
    fill(split.train, parts.x_train, parts.y_train, parts.strata_train);
    fill(split.test, parts.x_test, parts.y_test, parts.strata_test);
    return parts;
}

bool single_class(const Eigen::VectorXd& y) {
    for (Eigen::Index i = 1; i < y.size(); ++i)
        if (y[i] != y[0]) return false;
    return true;
}

NullDistribution metric_null(const Dataset& ds, const SplitIndexes& split,
                             const std::vector<int>& strata, const LearnerSpec& learner,
                             const MetricSpec& metric, int b, std::uint64_t seed, Scheme scheme,
                             int threads) {
    if (b < 1) throw ValidationError("null engine: b must be >= 1");
    if (static_cast<Eigen::Index>(strata.size()) != ds.n())
        throw ValidationError("null engine: strata length mismatch");
    const SplitParts parts = gather(ds.features, ds.response, strata, split);
    const bool needs_both_labels = ds.task == Task::classification;

    NullDistribution null;
    null.samples.resize(b);
    null.scheme = scheme;
    null.metric = metric;
    null.b = b;
    null.master_seed = seed;

    parallel_for(static_cast<std::size_t>(b), threads, [&](std::size_t i) {
        RngStream rng(seed, i);
        Eigen::VectorXd y_train = parts.y_train;
        Eigen::VectorXd y_test = parts.y_test;
        int redraws = 0;
        for (;;) {
            if (scheme == Scheme::restricted) {
                restricted_shuffle_inplace(y_train, parts.strata_train, rng);
                restricted_shuffle_inplace(y_test, parts.strata_test, rng);
            } else {
                standard_shuffle_inplace(y_train, rng);
                standard_shuffle_inplace(y_test, rng);
            }
            // AUC needs both labels in the shuffled test response. Shuffling
            // within each set preserves the label multisets, so for a valid
            // split this never trips; kept as a guard for degenerate inputs.
            if (metric.id == MetricId::auc && needs_both_labels &&
                (single_class(y_test) || single_class(y_train))) {
                if (++redraws > 100)
                    throw ComputationError("iteration " + std::to_string(i) +
                                           ": single-class response after 100 redraws");
                y_train = parts.y_train;
                y_test = parts.y_test;
                continue;
            }
            break;
        }
        try {
            const Model model = train(learner, parts.x_train, y_train);
            const Eigen::VectorXd pred = predict(model, parts.x_test);
            null.samples[i] = evaluate(metric, y_test, pred);
        } catch (const std::exception& e) {
            throw ComputationError(scheme_name(scheme) + " null iteration " + std::to_string(i) +
                                   ": " + e.what());
        }
        if (!std::isfinite(null.samples[i]))
            throw ComputationError(scheme_name(scheme) + " null iteration " + std::to_string(i) +
                                   ": non-finite metric value");
    });
    return null;
}

}  // namespace

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::restricted: return "restricted";
        case Scheme::standard: return "standard";
        case Scheme::baseline: return "baseline";
    }
    return "?";
}

NullDistribution restricted_null(const Dataset& ds, const SplitIndexes& split,
                                 const LearnerSpec& learner, const MetricSpec& metric, int b,
                                 std::uint64_t seed, int threads) {
    return metric_null(ds, split, ds.confounder.codes, learner, metric, b, seed,
                       Scheme::restricted, threads);
}

NullDistribution standard_null(const Dataset& ds, const SplitIndexes& split,
                               const LearnerSpec& learner, const MetricSpec& metric, int b,
                               std::uint64_t seed, int threads) {
    return metric_null(ds, split, ds.confounder.codes, learner, metric, b, seed, Scheme::standard,
                       threads);
}

NullDistribution restricted_null_with_strata(const Dataset& ds, const SplitIndexes& split,
                                             const std::vector<int>& strata,
                                             const LearnerSpec& learner, const MetricSpec& metric,
                                             int b, std::uint64_t seed, int threads) {
    return metric_null(ds, split, strata, learner, metric, b, seed, Scheme::restricted, threads);
}

NullDistribution association_null(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                  const std::vector<int>& strata, const MetricSpec& metric,
                                  Scheme scheme, int b, std::uint64_t seed) {
    if (b < 1) throw ValidationError("association_null: b must be >= 1");
    if (static_cast<std::size_t>(y.size()) != strata.size())
        throw ValidationError("association_null: strata length mismatch");
    NullDistribution null;
    null.samples.resize(b);
    null.scheme = scheme;
    null.metric = metric;
    null.b = b;
    null.master_seed = seed;
    for (int i = 0; i < b; ++i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        Eigen::VectorXd ys = y;
        if (scheme == Scheme::restricted) {
            restricted_shuffle_inplace(ys, strata, rng);
        } else {
            standard_shuffle_inplace(ys, rng);
        }
        null.samples[i] = evaluate(metric, ys, x);
    }
    return null;
}

double p_value(const NullDistribution& null, double observed) {
    if (null.samples.empty()) throw ValidationError("p_value: empty null");
    std::size_t k = 0;
    if (null.metric.orientation == Orientation::higher_better) {
        for (double s : null.samples)
            if (s >= observed) ++k;
    } else {
        for (double s : null.samples)
            if (s <= observed) ++k;
    }
    return static_cast<double>(k + 1) / static_cast<double>(null.samples.size() + 1);
}

GaussianFit fit_gaussian(const NullDistribution& null) {
    if (null.samples.size() < 2) throw ValidationError("fit_gaussian: need b >= 2");
    return {stats::mean(null.samples), stats::sd(null.samples)};
}

void write_null_samples(const std::string& path, const NullDistribution& null) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open output file: " + path);
    out << "value\n";
    char buf[64];
    for (double v : null.samples) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        out << buf << "\n";
    }
}

}  // namespace confound
