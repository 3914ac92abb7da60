#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "confound/dataset.hpp"
#include "confound/errors.hpp"
#include "confound/rng.hpp"
#include "confound/synthdata.hpp"

using namespace confound;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = std::string("/tmp/confound_test_") + name;
    std::ofstream out(path);
    out << content;
    return path;
}

TableSchema basic_schema() {
    TableSchema s;
    s.feature_cols = {"x1", "x2"};
    s.response_col = "y";
    s.confounder_cols = {"site"};
    s.task = Task::classification;
    return s;
}

}  // namespace

TEST_CASE("load_table parses a small file with declared roles") {
    const auto path = write_temp("basic.csv",
                                 "x1,x2,y,site\n"
                                 "1.0,2.0,0,a\n"
                                 "2.0,1.5,1,a\n"
                                 "0.5,0.5,0,b\n"
                                 "1.5,2.5,1,b\n");
    const Dataset ds = load_table(path, basic_schema());
    CHECK(ds.n() == 4);
    CHECK(ds.p() == 2);
    CHECK(ds.confounder.n_levels() == 2);
    CHECK(ds.task == Task::classification);
    CHECK(ds.features(1, 0) == 2.0);
    CHECK(ds.response[3] == 1.0);
}

TEST_CASE("load_table error paths") {
    SUBCASE("NaN feature cell is a missing value") {
        const auto path = write_temp("nan.csv", "x1,x2,y,site\n1,nan,0,a\n2,1,1,b\n0,1,0,a\n1,1,1,b\n");
        CHECK_THROWS_WITH_AS(load_table(path, basic_schema()),
                             doctest::Contains("missing value"), ValidationError);
    }
    SUBCASE("three labels under classification is a label error") {
        const auto path = write_temp("l3.csv", "x1,x2,y,site\n1,1,0,a\n2,1,1,b\n0,1,2,a\n1,1,1,b\n");
        CHECK_THROWS_WITH_AS(load_table(path, basic_schema()),
                             doctest::Contains("label error"), ValidationError);
    }
    SUBCASE("empty file is a format error") {
        const auto path = write_temp("empty.csv", "");
        CHECK_THROWS_WITH_AS(load_table(path, basic_schema()),
                             doctest::Contains("format error"), ValidationError);
    }
    SUBCASE("missing response column reports the schema field") {
        const auto path = write_temp("noy.csv", "x1,x2,site\n1,1,a\n2,1,b\n");
        try {
            load_table(path, basic_schema());
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(e.field == "response_col");
        }
    }
    SUBCASE("numeric confounder without discretization is rejected") {
        const auto path = write_temp("num.csv", "x1,x2,y,site\n1,1,0,3\n2,1,1,4\n0,1,0,3\n1,1,1,4\n");
        CHECK_THROWS_WITH_AS(load_table(path, basic_schema()),
                             doctest::Contains("discretization"), ValidationError);
        TableSchema with_cuts = basic_schema();
        with_cuts.confounder_cuts["site"] = {3.5};
        const Dataset ds = load_table(path, with_cuts);
        CHECK(ds.confounder.n_levels() == 2);
    }
}

TEST_CASE("feature prefix patterns expand in header order") {
    const auto path = write_temp("glob.csv", "x1,x2,x10,y,site\n1,2,3,0,a\n4,5,6,1,b\n7,8,9,0,a\n1,2,3,1,b\n");
    TableSchema s = basic_schema();
    s.feature_cols = {"x*"};
    const Dataset ds = load_table(path, s);
    CHECK(ds.p() == 3);
    CHECK(ds.features(1, 2) == 6.0);
}

TEST_CASE("combine_confounders pastes levels") {
    SUBCASE("3 x 2 inputs yield up to six levels") {
        const std::vector<std::string> age{"young", "young", "middle", "middle", "senior", "senior"};
        const std::vector<std::string> gender{"M", "F", "M", "F", "M", "F"};
        const auto combined = combine_confounders({age, gender});
        CHECK(make_categorical(combined).n_levels() == 6);
        CHECK(combined[0] == "young|M");
    }
    SUBCASE("single input is the identity") {
        const std::vector<std::string> v{"a", "b", "a"};
        CHECK(combine_confounders({v}) == v);
    }
    SUBCASE("two short vectors") {
        const auto out = combine_confounders({{"A", "A"}, {"B", "C"}});
        CHECK(out == std::vector<std::string>{"A|B", "A|C"});
    }
    SUBCASE("levels containing the separator stay distinct") {
        const auto out = combine_confounders({{"a|b", "a"}, {"c", "b|c"}});
        CHECK(make_categorical(out).n_levels() == 2);
        CHECK(out[0] != out[1]);
    }
    SUBCASE("length mismatch throws") {
        CHECK_THROWS_AS(combine_confounders({{"a"}, {"b", "c"}}), ValidationError);
    }
}

TEST_CASE("combine_confounders is associative as a partition") {
    RngStream rng(31, 0);
    const int n = 40;
    std::vector<std::string> a(n), b(n), c(n);
    for (int i = 0; i < n; ++i) {
        a[i] = "a" + std::to_string(rng.uniform_below(3));
        b[i] = "b" + std::to_string(rng.uniform_below(2));
        c[i] = "c" + std::to_string(rng.uniform_below(2));
    }
    const auto ab_c = make_categorical(combine_confounders({combine_confounders({a, b}), c}));
    const auto abc = make_categorical(combine_confounders({a, b, c}));
    // same partition: equal codes up to relabeling
    std::map<int, int> mapping;
    bool same = true;
    for (int i = 0; i < n; ++i) {
        const auto it = mapping.find(ab_c.codes[i]);
        if (it == mapping.end()) {
            mapping[ab_c.codes[i]] = abc.codes[i];
        } else if (it->second != abc.codes[i]) {
            same = false;
        }
    }
    CHECK(same);
    CHECK(ab_c.n_levels() == abc.n_levels());
}

TEST_CASE("discretize maps to half-open bins") {
    Eigen::VectorXd v(4);
    v << 1, 2, 3, 4;
    const auto bins = discretize(v, {2.5});
    CHECK(bins == std::vector<std::string>{"b1", "b1", "b2", "b2"});

    SUBCASE("boundary value opens the upper bin") {
        Eigen::VectorXd w(2);
        w << 2.5, 2.4999;
        const auto out = discretize(w, {2.5});
        CHECK(out[0] == "b2");
        CHECK(out[1] == "b1");
    }
    SUBCASE("cut points must increase") {
        CHECK_THROWS_AS(discretize(v, {2.0, 2.0}), ValidationError);
    }
}

TEST_CASE("discretize_quantiles balances occupancy") {
    RngStream rng(8, 0);
    Eigen::VectorXd v(100);
    for (int i = 0; i < 100; ++i) v[i] = rng.uniform();
    const auto bins = discretize_quantiles(v, 4);
    std::map<std::string, int> counts;
    for (const auto& b : bins) counts[b]++;
    CHECK(counts.size() == 4);
    for (const auto& [name, count] : counts) CHECK(std::abs(count - 25) <= 1);

    SUBCASE("constant vector cannot support two bins") {
        Eigen::VectorXd c = Eigen::VectorXd::Constant(10, 3.0);
        CHECK_THROWS_AS(discretize_quantiles(c, 2), ValidationError);
    }
    SUBCASE("discretize then self-combine is the same partition") {
        const auto once = make_categorical(bins);
        const auto twice = make_categorical(combine_confounders({bins, bins}));
        CHECK(once.n_levels() == twice.n_levels());
        for (std::size_t i = 0; i < bins.size(); ++i)
            for (std::size_t j = 0; j < bins.size(); ++j)
                CHECK((once.codes[i] == once.codes[j]) == (twice.codes[i] == twice.codes[j]));
    }
}

namespace {

Dataset balanced_dataset(int n, std::uint64_t seed) {
    ClassGenParams params;
    params.n = n;
    params.joint = joint_from_cor(0.5);
    RngStream rng(seed, 0);
    return gen_classification(params, rng);
}

std::map<std::pair<int, double>, int> cell_counts(const Dataset& ds, const std::vector<int>& rows) {
    std::map<std::pair<int, double>, int> counts;
    for (int i : rows) counts[{ds.confounder.codes[i], ds.response[i]}]++;
    return counts;
}

}  // namespace

TEST_CASE("split is deterministic and joint-stratified within one row per cell") {
    const Dataset ds = balanced_dataset(100, 5);
    const SplitIndexes s1 = split(ds, 0.3, Stratify::joint, 17);
    const SplitIndexes s2 = split(ds, 0.3, Stratify::joint, 17);
    CHECK(s1.train == s2.train);
    CHECK(s1.test == s2.test);
    CHECK(s1.test.size() == 30);

    const auto total = cell_counts(ds, [&] {
        std::vector<int> all(ds.n());
        for (int i = 0; i < ds.n(); ++i) all[i] = i;
        return all;
    }());
    const auto test_cells = cell_counts(ds, s1.test);
    for (const auto& [cell, count] : total) {
        const auto it = test_cells.find(cell);
        const int got = it == test_cells.end() ? 0 : it->second;
        CHECK(std::abs(got - 0.3 * count) <= 1.0);
    }

    SUBCASE("train and test are disjoint and cover all rows") {
        std::set<int> seen(s1.train.begin(), s1.train.end());
        for (int i : s1.test) CHECK(seen.insert(i).second);
        CHECK(seen.size() == static_cast<std::size_t>(ds.n()));
    }
}

TEST_CASE("split rejects a test set that cannot hold both labels") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(100, 2);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(100);
    y[0] = 1.0;  // one positive
    std::vector<std::string> site(100, "a");
    const Dataset ds =
        make_dataset(X, y, make_categorical(site), Task::classification);
    CHECK_THROWS_AS(split(ds, 0.01, Stratify::none, 3), ValidationError);
}

TEST_CASE("subsample_to_joint") {
    const Dataset ds = balanced_dataset(400, 9);

    SUBCASE("identity target returns the whole dataset in order") {
        const Dataset sub = subsample_to_joint(ds, joint_table(ds), 21);
        REQUIRE(sub.n() == ds.n());
        CHECK(sub.features == ds.features);
        CHECK(sub.response == ds.response);
    }

    SUBCASE("balanced target on imbalanced cells is limited by the smallest cell") {
        // Source with 70/30 level imbalance within each response class.
        std::vector<std::string> labels;
        Eigen::VectorXd y(200);
        Eigen::MatrixXd X = Eigen::MatrixXd::Random(200, 1);
        for (int i = 0; i < 200; ++i) {
            y[i] = i % 2;
            labels.push_back(i % 10 < 7 ? "big" : "small");
        }
        const Dataset src = make_dataset(X, y, make_categorical(labels), Task::classification);
        JointTable target;
        target.levels = {"big", "small"};
        target.labels = {0.0, 1.0};
        target.proportions.resize(2, 2);
        target.proportions.setConstant(0.25);
        const Dataset sub = subsample_to_joint(src, target, 4);
        // the smallest cell (small, y=0) holds 20 rows -> 4 x 20 = 80 rows
        CHECK(sub.n() == 80);
        const auto counts = cell_counts(sub, [&] {
            std::vector<int> all(sub.n());
            for (int i = 0; i < sub.n(); ++i) all[i] = i;
            return all;
        }());
        for (const auto& [cell, count] : counts) CHECK(count == 20);
    }

    SUBCASE("per-cell counts never exceed the source counts (property)") {
        JointTable target = joint_table(ds);
        target.proportions(0, 0) += 0.1;
        target.proportions(1, 1) -= 0.1;
        if (target.proportions(1, 1) < 0) target.proportions(1, 1) = 0.0;
        const double s = target.proportions.sum();
        target.proportions /= s;
        const Dataset sub = subsample_to_joint(ds, target, 4);
        const auto src_counts = cell_counts(ds, [&] {
            std::vector<int> all(ds.n());
            for (int i = 0; i < ds.n(); ++i) all[i] = i;
            return all;
        }());
        auto sub_counts = cell_counts(sub, [&] {
            std::vector<int> all(sub.n());
            for (int i = 0; i < sub.n(); ++i) all[i] = i;
            return all;
        }());
        for (const auto& [cell, count] : sub_counts) CHECK(count <= src_counts.at(cell));
    }

    SUBCASE("positive target cell with empty source cell throws") {
        std::vector<std::string> labels(100, "only");
        Eigen::VectorXd y(100);
        for (int i = 0; i < 100; ++i) y[i] = i % 2;
        const Dataset src = make_dataset(Eigen::MatrixXd::Random(100, 1), y,
                                         make_categorical(labels), Task::classification);
        JointTable target;
        target.levels = {"only", "ghost"};
        target.labels = {0.0, 1.0};
        target.proportions.resize(2, 2);
        target.proportions << 0.4, 0.4, 0.1, 0.1;
        CHECK_THROWS_AS(subsample_to_joint(src, target, 1), ValidationError);
    }
}

TEST_CASE("make_dataset validates invariants") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(4, 2);
    Eigen::VectorXd y(4);
    y << 0, 1, 0, 1;
    const Categorical c = make_categorical({"a", "a", "b", "b"});
    CHECK_NOTHROW(make_dataset(X, y, c, Task::classification));

    Eigen::VectorXd y3(4);
    y3 << 0, 1, 2, 1;
    CHECK_THROWS_AS(make_dataset(X, y3, c, Task::classification), ValidationError);
    CHECK_NOTHROW(make_dataset(X, y3, c, Task::regression));

    Eigen::VectorXd short_y(3);
    short_y << 0, 1, 0;
    CHECK_THROWS_AS(make_dataset(X, short_y, c, Task::classification), ValidationError);
}
