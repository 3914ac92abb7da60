#include "confound/report.hpp"

#include <fstream>

#include "confound/errors.hpp"

namespace confound {

OrderedJson to_json(const GaussianFit& fit, int b) {
    OrderedJson j;
    j["mean"] = fit.a;
    j["sd"] = fit.s;
    j["b"] = b;
    return j;
}

OrderedJson to_json(const TestResult& result) {
    OrderedJson j;
    j["test"] = test_name(result.test_id);
    j["statistic"] = result.statistic;
    j["p"] = result.p_value;
    j["b"] = result.b;
    j["null"] = {{"mean", result.null_fit.a}, {"sd", result.null_fit.s}};
    return j;
}

OrderedJson to_json(const CorrectionResult& result) {
    OrderedJson j;
    j["method"] = correction_name(result.method);
    j["observed"] = result.m_o;
    j["corrected"] = result.m_c;
    j["restricted_null"] = {{"mean", result.restricted_fit.a}, {"sd", result.restricted_fit.s}};
    j["reference_null"] = {{"mean", result.reference_fit.a}, {"sd", result.reference_fit.s}};
    return j;
}

OrderedJson to_json(const AnalysisReport& report) {
    OrderedJson j;
    j["metric"] = report.metric;
    j["observed"] = report.observed;
    j["n_train"] = report.n_train;
    j["n_test"] = report.n_test;
    j["corrected"] = to_json(report.corrected);
    OrderedJson alts = OrderedJson::array();
    for (const auto& alt : report.alternatives) alts.push_back(to_json(alt));
    j["corrected_alternatives"] = alts;
    j["response_test"] = to_json(report.response_test);
    j["confounding_test"] = to_json(report.confounding_test);
    j["null_summaries"] = {
        {"restricted", to_json(report.restricted_fit, report.b_nulls)},
        {"standard", to_json(report.standard_fit, report.b_nulls)},
    };
    j["b_confounding"] = report.b_confounding;
    return j;
}

void write_json(const std::string& path, const OrderedJson& doc) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open output file: " + path);
    out << doc.dump(2) << "\n";
}

OrderedJson read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input file: " + path);
    try {
        return OrderedJson::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("JSON parse error in ") + path + ": " + e.what());
    }
}

}  // namespace confound
