#pragma once

#include <json.hpp>
#include <string>

#include "confound/inference.hpp"
#include "confound/nulls.hpp"

namespace confound {

using OrderedJson = nlohmann::ordered_json;

OrderedJson to_json(const GaussianFit& fit, int b);
OrderedJson to_json(const TestResult& result);
OrderedJson to_json(const CorrectionResult& result);

/// The analysis report: observed metric, the chosen correction, both tests
/// and the null summaries.
struct AnalysisReport {
    std::string metric;
    double observed = 0.0;
    CorrectionResult corrected;                 // primary (config-selected) correction
    std::vector<CorrectionResult> alternatives; // other applicable corrections
    TestResult response_test;
    TestResult confounding_test;
    GaussianFit restricted_fit, standard_fit;
    int b_nulls = 0;            // permutations behind the correction nulls
    int b_confounding = 0;      // permutations behind the confounding test
    int n_train = 0, n_test = 0;
};

OrderedJson to_json(const AnalysisReport& report);

void write_json(const std::string& path, const OrderedJson& doc);
OrderedJson read_json(const std::string& path);

}  // namespace confound
