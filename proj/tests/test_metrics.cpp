#include <doctest.h>

#include <cmath>

#include "confound/errors.hpp"
#include "confound/metrics.hpp"
#include "confound/rng.hpp"
#include "oracles.hpp"

using namespace confound;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

}  // namespace

TEST_CASE("evaluate: worked examples") {
    const MetricSpec auc = metric_spec(MetricId::auc);
    CHECK(evaluate(auc, vec({0, 0, 1, 1}), vec({.1, .2, .8, .9})) == doctest::Approx(1.0));
    // frozen from the brute-force pairwise oracle: 1 win of 4 pairs
    const Eigen::VectorXd y = vec({0, 1, 0, 1});
    const Eigen::VectorXd s = vec({.9, .8, .2, .1});
    CHECK(oracles::brute_force_auc(y, s) == doctest::Approx(0.25));
    CHECK(evaluate(auc, y, s) == doctest::Approx(0.25));
    CHECK(evaluate(auc, vec({0, 1}), vec({.5, .5})) == doctest::Approx(0.5));

    CHECK(evaluate(metric_spec(MetricId::mae), vec({1, 2}), vec({2, 4})) == doctest::Approx(1.5));
    CHECK(evaluate(metric_spec(MetricId::mse), vec({1, 2}), vec({2, 4})) == doctest::Approx(2.5));
    const Eigen::VectorXd t = vec({1, 2, 3, 4});
    CHECK(evaluate(metric_spec(MetricId::ccc), t, t) == doctest::Approx(1.0));
    CHECK_THROWS_AS(evaluate(auc, vec({1, 1, 1}), vec({.1, .2, .3})), ValidationError);
}

TEST_CASE("auc rank formula equals the pairwise oracle (property)") {
    RngStream rng(3, 0);
    for (int rep = 0; rep < 200; ++rep) {
        const int n = 4 + static_cast<int>(rng.uniform_below(30));
        Eigen::VectorXd y(n), s(n);
        bool has0 = false, has1 = false;
        for (int i = 0; i < n; ++i) {
            y[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
            s[i] = rng.normal();
            (y[i] == 1.0 ? has1 : has0) = true;
        }
        if (!has0 || !has1) continue;
        const double got = evaluate(metric_spec(MetricId::auc), y, s);
        CHECK(got == doctest::Approx(oracles::brute_force_auc(y, s)).epsilon(1e-12));
        // section "analytical results": AUC = 1 - U / (n_n n_p), tie-free
        int n_pos = 0;
        for (int i = 0; i < n; ++i) n_pos += y[i] == 1.0;
        const double u = oracles::brute_force_u(y, s);
        CHECK(got == doctest::Approx(1.0 - u / ((n - n_pos) * double(n_pos))).epsilon(1e-12));
        CHECK(mann_whitney_u(got, n - n_pos, n_pos) == doctest::Approx(u).epsilon(1e-9));
        // flipping score signs flips the AUC
        CHECK(evaluate(metric_spec(MetricId::auc), y, (-s).eval()) ==
              doctest::Approx(1.0 - got).epsilon(1e-12));
    }
}

TEST_CASE("evaluate is invariant to joint permutation") {
    RngStream rng(5, 0);
    const int n = 25;
    Eigen::VectorXd y(n), s(n);
    for (int i = 0; i < n; ++i) {
        y[i] = rng.uniform() < 0.4 ? 0.0 : 1.0;
        s[i] = rng.uniform();
    }
    Eigen::VectorXd yp(n), sp(n);
    for (int i = 0; i < n; ++i) {
        const int src = (i * 7 + 3) % n;
        yp[i] = y[src];
        sp[i] = s[src];
    }
    for (MetricId id : {MetricId::auc, MetricId::accuracy, MetricId::mse, MetricId::mae}) {
        const MetricSpec spec = metric_spec(id);
        CHECK(evaluate(spec, y, s) == doctest::Approx(evaluate(spec, yp, sp)).epsilon(1e-12));
    }
}

TEST_CASE("mann_whitney_u and the analytic AUC null") {
    CHECK(mann_whitney_u(0.75, 10, 5) == doctest::Approx(12.5));
    CHECK(mann_whitney_u(1.0, 10, 5) == doctest::Approx(0.0));
    CHECK(mann_whitney_u(0.5, 4, 4) == doctest::Approx(8.0));

    const auto [mean, sd] = auc_null_gaussian(50, 50);
    CHECK(mean == 0.5);
    CHECK(std::abs(sd - 0.058023) <= 1e-6);
    // sd strictly decreasing in n for balanced sets
    double prev = 1.0;
    for (int n : {5, 10, 20, 40, 80}) {
        const double s = auc_null_gaussian(n, n).second;
        CHECK(s < prev);
        prev = s;
    }
    CHECK(auc_null_gaussian(7, 3).first == 0.5);
}

TEST_CASE("distance covariance basics and the brute-force oracle") {
    const Eigen::VectorXd x = vec({1, 2, 3, 4});
    const Eigen::VectorXd y = vec({1, 3, 2, 4});
    CHECK(dcov2(x, y) == doctest::Approx(oracles::brute_dcov2(x, y)).epsilon(1e-12));

    CHECK(dcov2(Eigen::VectorXd::Constant(5, 2.0), vec({1, 2, 3, 4, 5})) == doctest::Approx(0.0));
    CHECK(dcor2(Eigen::VectorXd::Constant(5, 2.0), vec({1, 2, 3, 4, 5})) == doctest::Approx(0.0));
    CHECK(dcor2(x, x) == doctest::Approx(1.0).epsilon(1e-12));

    RngStream rng(17, 0);
    for (int rep = 0; rep < 30; ++rep) {
        const int n = 3 + static_cast<int>(rng.uniform_below(12));
        Eigen::VectorXd a(n), b(n);
        for (int i = 0; i < n; ++i) {
            a[i] = rng.normal();
            b[i] = rng.normal();
        }
        const double v = dcov2(a, b);
        CHECK(v == doctest::Approx(oracles::brute_dcov2(a, b)).epsilon(1e-12));
        CHECK(v >= -1e-12);
        const double r2 = dcor2(a, b);
        CHECK(r2 >= -1e-12);
        CHECK(r2 <= 1.0 + 1e-12);
        // translation invariance
        CHECK(dcov2((a.array() + 5.0).matrix(), b) == doctest::Approx(v).epsilon(1e-9));
    }
}

TEST_CASE("partial correlation") {
    SUBCASE("orthogonal confounder reduces to the plain correlation") {
        const Eigen::VectorXd x = vec({1, -1, 1, -1});
        const Eigen::VectorXd y = vec({2, -2, 1, -1});
        const Eigen::VectorXd c = vec({1, 1, -1, -1});
        // cor(x,c) = 0 and cor(y,c) = 0 by construction
        CHECK(partial_correlation(x, y, c) == doctest::Approx(pearson(x, y)).epsilon(1e-12));
    }
    SUBCASE("conditional independence at large n drives the estimate to 0") {
        RngStream rng(23, 0);
        const int n = 100000;
        Eigen::VectorXd x(n), y(n), c(n);
        for (int i = 0; i < n; ++i) {
            c[i] = rng.normal();
            x[i] = 0.8 * c[i] + rng.normal();
            y[i] = -0.6 * c[i] + rng.normal();
        }
        CHECK(std::abs(partial_correlation(x, y, c)) < 0.02);
    }
    SUBCASE("worked instance equals the regression-residual oracle") {
        const Eigen::VectorXd x = vec({1, 2, 4, 3});
        const Eigen::VectorXd y = vec({2, 1, 3, 5});
        const Eigen::VectorXd c = vec({0, 0, 1, 1});
        CHECK(partial_correlation(x, y, c) ==
              doctest::Approx(oracles::residual_partial_corr(x, y, c)).epsilon(1e-12));
    }
    SUBCASE("degenerate inputs throw") {
        const Eigen::VectorXd x = vec({1, 2, 3, 4});
        CHECK_THROWS_AS(partial_correlation(x, x, Eigen::VectorXd::Constant(4, 1.0)),
                        ValidationError);
        CHECK_THROWS_AS(partial_correlation(x, vec({4, 3, 2, 1}), x), ValidationError);
    }
}

TEST_CASE("closed-form partial distance statistics") {
    SUBCASE("c independent of both leaves dcov2 nearly untouched") {
        RngStream rng(29, 0);
        const int n = 10000;
        Eigen::VectorXd x(n), y(n), c(n);
        for (int i = 0; i < n; ++i) {
            x[i] = rng.normal();
            y[i] = 0.5 * x[i] + rng.normal();
            c[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
        }
        CHECK(std::abs(pdcov(x, y, c) - dcov2(x, y)) < 0.01);
    }
    SUBCASE("y = x with an independent c gives pdcor near 1") {
        RngStream rng(31, 0);
        const int n = 10000;
        Eigen::VectorXd x(n), c(n);
        for (int i = 0; i < n; ++i) {
            x[i] = rng.normal();
            c[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
        }
        CHECK(pdcor(x, x, c) == doctest::Approx(1.0).epsilon(0.05));
    }
    SUBCASE("small instance matches an independent re-evaluation of the formula") {
        const Eigen::VectorXd x = vec({1, 2, 4, 3, 5});
        const Eigen::VectorXd y = vec({2, 1, 3, 5, 4});
        const Eigen::VectorXd c = vec({0, 1, 0, 1, 0});
        const double vxy = oracles::brute_dcov2(x, y);
        const double vxc = oracles::brute_dcov2(x, c);
        const double vyc = oracles::brute_dcov2(y, c);
        const double vcc = oracles::brute_dcov2(c, c);
        const double expected_pdcov = vxy - vxc * vyc / vcc;
        CHECK(pdcov(x, y, c) == doctest::Approx(expected_pdcov).epsilon(1e-12));

        const double vxx = oracles::brute_dcov2(x, x);
        const double vyy = oracles::brute_dcov2(y, y);
        const double r2xc = vxc / std::sqrt(vxx * vcc);
        const double r2yc = vyc / std::sqrt(vyy * vcc);
        const double expected_pdcor =
            expected_pdcov /
            (std::sqrt(vxx * (1 - r2xc * r2xc)) * std::sqrt(vyy * (1 - r2yc * r2yc)));
        CHECK(pdcor(x, y, c) == doctest::Approx(expected_pdcor).epsilon(1e-12));
    }
    SUBCASE("degenerate denominators throw") {
        const Eigen::VectorXd x = vec({1, 2, 3, 4});
        CHECK_THROWS_AS(pdcov(x, x, Eigen::VectorXd::Constant(4, 1.0)), ValidationError);
        CHECK_THROWS_AS(pdcor(x, vec({2, 1, 4, 3}), x), ValidationError);
    }
}

TEST_CASE("metric spec table") {
    CHECK(metric_spec(MetricId::auc).orientation == Orientation::higher_better);
    CHECK(metric_spec(MetricId::accuracy).orientation == Orientation::higher_better);
    CHECK(metric_spec(MetricId::pearson).orientation == Orientation::higher_better);
    CHECK(metric_spec(MetricId::ccc).orientation == Orientation::higher_better);
    CHECK(metric_spec(MetricId::mse).orientation == Orientation::lower_better);
    CHECK(metric_spec(MetricId::mae).orientation == Orientation::lower_better);
    CHECK(metric_spec(MetricId::auc).baseline == 0.5);
    CHECK(std::isnan(metric_spec(MetricId::mse).baseline));
    CHECK(metric_from_string("pearson") == MetricId::pearson);
    CHECK_THROWS_AS(metric_from_string("f1"), ValidationError);
}
