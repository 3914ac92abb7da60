#include <doctest.h>

#include <cmath>

#include "confound/errors.hpp"
#include "confound/inference.hpp"
#include "confound/rng.hpp"
#include "confound/stats.hpp"
#include "confound/synthdata.hpp"

using namespace confound;

namespace {

NullDistribution make_null(std::vector<double> samples, Scheme scheme,
                           MetricId id = MetricId::auc) {
    NullDistribution null;
    null.samples = std::move(samples);
    null.b = static_cast<int>(null.samples.size());
    null.scheme = scheme;
    null.metric = metric_spec(id);
    return null;
}

const LearnerSpec kLogistic{LearnerKind::logistic, 1e-3, 100, 1e-8};

}  // namespace

TEST_CASE("response_learning_test") {
    const NullDistribution null =
        make_null({0.4, 0.45, 0.5, 0.55, 0.6}, Scheme::restricted);
    SUBCASE("scheme mismatch throws") {
        const NullDistribution std_null = make_null({0.5, 0.6}, Scheme::standard);
        CHECK_THROWS_AS(response_learning_test(std_null, 0.7), ValidationError);
    }
    SUBCASE("observed below every sample has p = 1 under add-one") {
        const TestResult r = response_learning_test(null, 0.1);
        CHECK(r.p_value == doctest::Approx(1.0));
        CHECK(r.statistic == doctest::Approx(0.1));
    }
    SUBCASE("observed above every sample hits the add-one floor") {
        const TestResult r = response_learning_test(null, 0.99);
        CHECK(r.p_value == doctest::Approx(1.0 / 6.0));
    }
}

TEST_CASE("correct_gaussian") {
    SUBCASE("zero offset maps to the reference mean") {
        const auto c = correct_gaussian(0.6, {0.6, 0.05}, {0.5, 0.04});
        CHECK(c.m_c == doctest::Approx(0.5));
    }
    SUBCASE("worked example") {
        const auto c = correct_gaussian(0.7, {0.6, 0.05}, {0.5, 0.04});
        CHECK(c.m_c == doctest::Approx(0.58).epsilon(1e-12));
    }
    SUBCASE("affine equivariance: swapped fits invert the map") {
        const GaussianFit r{0.62, 0.031}, s{0.49, 0.047};
        const double once = correct_gaussian(0.71, r, s).m_c;
        const double back = correct_gaussian(once, s, r).m_c;
        CHECK(back == doctest::Approx(0.71).epsilon(1e-12));
    }
    SUBCASE("identical fits return the observed value exactly") {
        const GaussianFit f{0.5903, 0.0213};
        CHECK(correct_gaussian(0.677, f, f).m_c == 0.677);
    }
    SUBCASE("degenerate restricted null throws") {
        CHECK_THROWS_AS(correct_gaussian(0.7, {0.6, 0.0}, {0.5, 0.04}), ValidationError);
    }
}

TEST_CASE("correct_empirical") {
    RngStream rng(301, 0);
    std::vector<double> r_samples, s_samples;
    for (int i = 0; i < 500; ++i) {
        r_samples.push_back(0.7 + 0.03 * rng.normal());
        s_samples.push_back(0.5 + 0.05 * rng.normal());
    }
    const NullDistribution null_r = make_null(r_samples, Scheme::restricted);
    const NullDistribution null_s = make_null(s_samples, Scheme::standard);
    const double s_max = *std::max_element(s_samples.begin(), s_samples.end());
    const double s_min = *std::min_element(s_samples.begin(), s_samples.end());

    SUBCASE("inside the restricted range it tracks the gaussian correction") {
        const double m_o = 0.72;
        const double emp = correct_empirical(m_o, null_r, null_s).m_c;
        const double gau =
            correct_gaussian(m_o, fit_gaussian(null_r), fit_gaussian(null_s)).m_c;
        CHECK(std::abs(emp - gau) < 0.03);
    }
    SUBCASE("above the restricted range it saturates at the reference maximum") {
        CHECK(correct_empirical(0.95, null_r, null_s).m_c == doctest::Approx(s_max));
    }
    SUBCASE("below the restricted range it saturates at the reference minimum") {
        CHECK(correct_empirical(0.3, null_r, null_s).m_c == doctest::Approx(s_min));
    }
    SUBCASE("monotone non-decreasing in the observed value") {
        double prev = -10.0;
        for (double m = 0.55; m <= 0.9; m += 0.01) {
            const double v = correct_empirical(m, null_r, null_s).m_c;
            CHECK(v >= prev - 1e-15);
            prev = v;
        }
    }
    SUBCASE("b >= 20 is required") {
        const NullDistribution tiny = make_null({0.4, 0.5, 0.6}, Scheme::restricted);
        CHECK_THROWS_AS(correct_empirical(0.5, tiny, null_s), ValidationError);
    }
}

TEST_CASE("correct_auc_analytic") {
    SUBCASE("zero offset maps to 0.5") {
        const auto c = correct_auc_analytic(0.9, {0.9, 0.02}, 50, 50);
        CHECK(c.m_c == doctest::Approx(0.5));
    }
    SUBCASE("worked example with s* equal to the analytic sd") {
        const double sigma = auc_null_gaussian(50, 50).second;
        const auto c = correct_auc_analytic(0.98, {0.90, sigma}, 50, 50);
        CHECK(c.m_c == doctest::Approx(0.58).epsilon(1e-9));
    }
}

TEST_CASE("confounding_test and the analytic AUC reference") {
    SUBCASE("worked z example: mean 0.51, b = 100, n_n = n_p = 50") {
        const NullDistribution null = make_null(std::vector<double>(100, 0.51), Scheme::restricted);
        const TestResult r = confounding_test_auc(null, 50, 50, 100);
        CHECK(r.statistic == doctest::Approx(0.51));
        CHECK(std::abs(r.p_value - 0.042) <= 0.001);
    }
    SUBCASE("statistic at the reference mean gives p = 0.5") {
        const NullDistribution null = make_null(std::vector<double>(60, 0.5), Scheme::restricted);
        const TestResult r = confounding_test(null, {0.5, 0.05}, 60);
        CHECK(r.p_value == doctest::Approx(0.5));
    }
    SUBCASE("b mismatch is a contract error") {
        const NullDistribution null = make_null(std::vector<double>(50, 0.5), Scheme::restricted);
        CHECK_THROWS_AS(confounding_test(null, {0.5, 0.05}, 60), ValidationError);
        CHECK_THROWS_AS(confounding_test_auc(null, 30, 30, 50), ValidationError);
    }
    SUBCASE("statistic ignores sample order") {
        NullDistribution a = make_null({0.4, 0.5, 0.6, 0.7}, Scheme::restricted);
        NullDistribution b = make_null({0.7, 0.4, 0.6, 0.5}, Scheme::restricted);
        CHECK(confounding_test(a, {0.5, 0.1}, 4).statistic ==
              doctest::Approx(confounding_test(b, {0.5, 0.1}, 4).statistic));
    }
}

TEST_CASE("confounding_test_exact") {
    ClassGenParams params;
    params.n = 60;
    params.joint = joint_from_cor(0.0);
    params.beta = 1.0;
    params.theta = 0.0;
    RngStream rng(401, 0);
    Dataset ds = gen_classification(params, rng);

    SUBCASE("runs and returns a valid p-value") {
        const SplitIndexes sp = split(ds, 0.5, Stratify::joint, 402);
        const TestResult r = confounding_test_exact(ds, sp, kLogistic,
                                                    metric_spec(MetricId::auc), 20, 403, 2);
        CHECK(r.p_value > 0.0);
        CHECK(r.p_value <= 1.0);
        CHECK(r.b == 20);
        CHECK(r.test_id == TestId::confounding_exact);
    }
    SUBCASE("deterministic across thread counts") {
        const SplitIndexes sp = split(ds, 0.5, Stratify::joint, 402);
        const TestResult a = confounding_test_exact(ds, sp, kLogistic,
                                                    metric_spec(MetricId::auc), 20, 404, 1);
        const TestResult b = confounding_test_exact(ds, sp, kLogistic,
                                                    metric_spec(MetricId::auc), 20, 404, 2);
        CHECK(a.p_value == b.p_value);
        CHECK(a.statistic == b.statistic);
    }
    SUBCASE("b_s below 20 is rejected") {
        const SplitIndexes sp = split(ds, 0.5, Stratify::joint, 402);
        CHECK_THROWS_AS(
            confounding_test_exact(ds, sp, kLogistic, metric_spec(MetricId::auc), 10, 405),
            ValidationError);
    }
    SUBCASE("strong confounding is detected") {
        ClassGenParams strong;
        strong.n = 300;
        strong.joint = joint_from_cor(0.8);
        strong.beta = 0.0;
        strong.theta = 1.0;
        RngStream rng2(406, 0);
        const Dataset conf = gen_classification(strong, rng2);
        const SplitIndexes sp = split(conf, 0.5, Stratify::joint, 407);
        const TestResult r = confounding_test_exact(conf, sp, kLogistic,
                                                    metric_spec(MetricId::auc), 39, 408, 2);
        CHECK(r.p_value < 0.05);
    }
}

TEST_CASE("baseline_workflow") {
    SUBCASE("target equal to the development joint is the exact null case") {
        ClassGenParams params;
        params.n = 600;
        params.joint = joint_from_cor(0.0);  // unconfounded development data
        params.beta = 1.0;
        params.theta = 1.0;
        RngStream rng(501, 0);
        const Dataset dev = gen_classification(params, rng);
        BaselineOptions options;
        options.threads = 2;
        const BaselineReport rep = baseline_workflow(dev, joint_table(dev), kLogistic,
                                                     metric_spec(MetricId::auc), 502, options);
        // identical population + shared seeds: the two restricted nulls coincide
        CHECK(rep.dev_restricted.samples == rep.baseline_restricted.samples);
        CHECK(rep.test.p_value == doctest::Approx(0.5));
        CHECK(rep.corrected.m_c == doctest::Approx(rep.observed));
        // unconfounded: baseline-corrected tracks the standard-null correction
        CHECK(std::abs(rep.corrected.m_c - rep.corrected_standard.m_c) < 0.03);
        const GaussianFit fd = fit_gaussian(rep.dev_restricted);
        const GaussianFit fb = fit_gaussian(rep.baseline_restricted);
        const double pooled = std::sqrt((fd.s * fd.s + fb.s * fb.s) / rep.test_size);
        CHECK(std::abs(fd.a - fb.a) <= 2.0 * pooled + 1e-12);
    }
    SUBCASE("biased development sample vs the section-4 target") {
        ClassGenParams params;
        params.n = 2000;
        params.joint = joint_from_cor(0.8);
        params.beta = 0.8;
        params.theta = 1.0;
        RngStream rng(503, 0);
        const Dataset dev = gen_classification(params, rng);

        JointTable target;
        target.levels = {"0", "1"};
        target.labels = {0.0, 1.0};
        target.proportions.resize(2, 2);
        target.proportions(0, 0) = 7.0 / 18.0;
        target.proportions(0, 1) = 1.0 / 9.0;
        target.proportions(1, 0) = 5.0 / 18.0;
        target.proportions(1, 1) = 2.0 / 9.0;

        BaselineOptions options;
        options.threads = 2;
        const BaselineReport rep = baseline_workflow(dev, target, kLogistic,
                                                     metric_spec(MetricId::auc), 504, options);
        const double base_mean = fit_gaussian(rep.baseline_restricted).a;
        const double dev_mean = fit_gaussian(rep.dev_restricted).a;
        CHECK(base_mean > 0.5);
        CHECK(base_mean < dev_mean);
        CHECK(rep.corrected.m_c > rep.corrected_standard.m_c);
        CHECK(rep.corrected.m_c < rep.observed);
        CHECK(rep.test.p_value < 0.05);
        CHECK(rep.dev_restricted.b == rep.test_size);
        CHECK(static_cast<int>(rep.baseline_restricted.samples.size()) == rep.test_size);
    }
}
