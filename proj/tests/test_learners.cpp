#include <doctest.h>

#include <cmath>
#include <set>

#include "oralstack/learners.hpp"
#include "oralstack/parallel.hpp"
#include "oralstack/split.hpp"
#include "support.hpp"

using namespace oralstack;

namespace {

struct Toy {
    Matrix x;
    std::vector<int> y;
};

double accuracy(const Matrix& p, const std::vector<int>& y) {
    double hits = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) hits += testing::oracle_argmax(p, i) == y[i];
    return hits / static_cast<double>(y.size());
}

// Four-class Gaussian blobs; each class has two well-separated clusters.
Toy blobs(Rng& rng, std::size_t n, std::size_t d, double spread) {
    Toy t{Matrix(n, d), std::vector<int>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % 4);
        const double side = (i / 4) % 2 ? 1.0 : -1.0;
        t.y[i] = c;
        for (std::size_t j = 0; j < d; ++j) {
            const double centre = j == static_cast<std::size_t>(c) ? 6.0 * side : 0.0;
            t.x(i, j) = centre + spread * rng.normal();
        }
    }
    return t;
}

Toy xor_data(Rng& rng, std::size_t n) {
    Toy t{Matrix(n, 2), std::vector<int>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.uniform(-1.0, 1.0);
        const double b = rng.uniform(-1.0, 1.0);
        t.x(i, 0) = a;
        t.x(i, 1) = b;
        t.y[i] = (a > 0.0) != (b > 0.0) ? 1 : 0;
    }
    return t;
}

} // namespace

TEST_SUITE("base-learners") {

TEST_CASE("logistic regression on tiny problems") {
    Toy sep{Matrix(4, 1), {0, 0, 1, 1}};
    sep.x(0, 0) = -2;
    sep.x(1, 0) = -1;
    sep.x(2, 0) = 1;
    sep.x(3, 0) = 2;
    std::vector<double> trace;
    const auto lr = LogisticRegression::fit(sep.x, sep.y, LogRegConfig{}, &trace);
    CHECK(accuracy(lr.predict_proba(sep.x), sep.y) == 1.0);
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);

    Toy flat{Matrix(6, 3, 1.0), {0, 1, 0, 1, 0, 1}};
    const Matrix p = LogisticRegression::fit(flat.x, flat.y, LogRegConfig{}).predict_proba(flat.x);
    CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(p(0, 1) == doctest::Approx(0.5).epsilon(1e-3));

    Rng rng(1);
    const Toy x = xor_data(rng, 200);
    CHECK(accuracy(LogisticRegression::fit(x.x, x.y, LogRegConfig{}).predict_proba(x.x), x.y) <= 0.75);
}

TEST_CASE("logistic loss never increases on random problems") {
    Rng rng(12);
    for (int trial = 0; trial < 5; ++trial) {
        const Toy t = blobs(rng, 80, 6, 3.0);
        std::vector<double> trace;
        CHECK_NOTHROW(LogisticRegression::fit(t.x, t.y, LogRegConfig{}, &trace));
        for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
    }
}

TEST_CASE("extra trees") {
    Toy one{Matrix(5, 2), {2, 2, 2, 2, 2}};
    for (std::size_t i = 0; i < 5; ++i) one.x(i, 0) = static_cast<double>(i);
    const Matrix p1 = ExtraTrees::fit(one.x, one.y, ExtraTreesConfig{}, 1).predict_proba(one.x);
    for (std::size_t i = 0; i < 5; ++i) CHECK(p1(i, 2) == 1.0);

    Rng rng(33);
    const Toy train = blobs(rng, 200, 5, 1.0);
    const Toy test = blobs(rng, 100, 5, 1.0);
    ExtraTreesConfig cfg;
    cfg.n_trees = 200;
    const ExtraTrees et = ExtraTrees::fit(train.x, train.y, cfg, 5);
    CHECK(accuracy(et.predict_proba(test.x), test.y) >= 0.95);
    CHECK(ExtraTrees::fit(train.x, train.y, cfg, 5).predict_proba(test.x) == et.predict_proba(test.x));
}

TEST_CASE("gradient boosting") {
    Toy step{Matrix(40, 1), std::vector<int>(40)};
    for (std::size_t i = 0; i < 40; ++i) {
        step.x(i, 0) = static_cast<double>(i) - 19.5;
        step.y[i] = step.x(i, 0) > 0.0 ? 1 : 0;
    }
    GbdtConfig cfg;
    cfg.rounds = 10;
    CHECK(accuracy(Gbdt::fit(step.x, step.y, cfg).predict_proba(step.x), step.y) == 1.0);

    Toy skewed{Matrix(10, 1), {0, 0, 0, 0, 0, 0, 1, 1, 1, 3}};
    for (std::size_t i = 0; i < 10; ++i) skewed.x(i, 0) = static_cast<double>(i);
    for (int rounds : {0, 5}) {
        GbdtConfig prior_only;
        prior_only.rounds = rounds;
        prior_only.learning_rate = rounds == 0 ? 0.1 : 0.0;
        const Matrix p = Gbdt::fit(skewed.x, skewed.y, prior_only).predict_proba(skewed.x);
        for (std::size_t i = 0; i < 10; ++i) {
            CHECK(p(i, 0) == doctest::Approx(0.6).epsilon(1e-9));
            CHECK(p(i, 1) == doctest::Approx(0.3).epsilon(1e-9));
            CHECK(p(i, 2) == doctest::Approx(1e-12).epsilon(1e-3));
            CHECK(p(i, 3) == doctest::Approx(0.1).epsilon(1e-9));
        }
    }

    Rng rng(2);
    const Toy x = xor_data(rng, 200);
    GbdtConfig deep;
    deep.max_depth = 2;
    deep.rounds = 50;
    CHECK(accuracy(Gbdt::fit(x.x, x.y, deep).predict_proba(x.x), x.y) == 1.0);
}

TEST_CASE("training is independent of the thread count") {
    Rng rng(17);
    const Toy t = blobs(rng, 120, 8, 2.5);
    std::vector<Matrix> probs;
    for (unsigned threads : {1u, 3u, 8u}) {
        set_thread_count(threads);
        for (LearnerKind k : kLearnerKinds) {
            auto cfg = BaseLearnerConfig::defaults(k, 99);
            cfg.gbdt.rounds = 20;
            cfg.extra_trees.n_trees = 40;
            probs.push_back(predict_proba(train_base_learner(t.x, t.y, cfg), t.x));
        }
    }
    set_thread_count(1);
    for (std::size_t i = 4; i < probs.size(); ++i) CHECK(probs[i] == probs[i % 4]);
    for (const auto& p : probs) CHECK(is_probability_matrix(p));
}

TEST_CASE("out-of-fold predictions never see their own patient") {
    Rng rng(41);
    const Toy t = blobs(rng, 90, 4, 2.0);
    std::vector<std::size_t> group(90);
    for (std::size_t i = 0; i < 90; ++i) group[i] = i / 3;  // 30 patients x 3 images
    for (LearnerKind k : kLearnerKinds) {
        auto cfg = BaseLearnerConfig::defaults(k, 3);
        cfg.gbdt.rounds = 15;
        cfg.extra_trees.n_trees = 30;
        const OofResult oof = oof_probabilities(t.x, t.y, group, cfg, 3, 7);
        CHECK(is_probability_matrix(oof.probs));
        for (std::size_t i = 0; i < 90; ++i) {
            const auto& train = oof.train_rows[static_cast<std::size_t>(oof.fold_of_row[i])];
            for (std::size_t r : train) CHECK(group[r] != group[i]);
        }
    }
}

TEST_CASE("one fold per patient equals leave-one-patient-out") {
    Rng rng(43);
    const Toy t = blobs(rng, 24, 3, 2.0);
    std::vector<std::size_t> group(24);
    for (std::size_t i = 0; i < 24; ++i) group[i] = i / 2;
    const auto cfg = BaseLearnerConfig::defaults(LearnerKind::logreg, 0);
    const OofResult oof = oof_probabilities(t.x, t.y, group, cfg, 12, 1);
    for (std::size_t g = 0; g < 12; ++g) {
        std::vector<std::size_t> train;
        std::vector<int> labels;
        for (std::size_t i = 0; i < 24; ++i) {
            if (group[i] != g) {
                train.push_back(i);
                labels.push_back(t.y[i]);
            }
        }
        const BaseModel m = train_base_learner(t.x.select_rows(train), labels, cfg);
        const std::vector<std::size_t> held = {2 * g, 2 * g + 1};
        const Matrix p = predict_proba(m, t.x.select_rows(held));
        for (std::size_t j = 0; j < 2; ++j) {
            for (std::size_t c = 0; c < 4; ++c) CHECK(p(j, c) == oof.probs(held[j], c));
        }
    }
}

TEST_CASE("out-of-fold accuracy tracks training accuracy on separable data") {
    Rng rng(45);
    const Toy t = blobs(rng, 120, 5, 1.0);
    std::vector<std::size_t> group(120);
    for (std::size_t i = 0; i < 120; ++i) group[i] = i / 4;
    for (LearnerKind k : kLearnerKinds) {
        auto cfg = BaseLearnerConfig::defaults(k, 1);
        cfg.gbdt.rounds = 30;
        const double full = accuracy(predict_proba(train_base_learner(t.x, t.y, cfg), t.x), t.y);
        const double oof = accuracy(oof_probabilities(t.x, t.y, group, cfg, 3, 2).probs, t.y);
        CHECK(oof >= full - 0.10);
    }
}

TEST_CASE("hyperparameter validation") {
    auto cfg = BaseLearnerConfig::defaults(LearnerKind::gbdt_leaf, 0);
    CHECK(cfg.gbdt.policy == GrowPolicy::leaf_wise);
    CHECK(cfg.gbdt.min_leaf == 5);
    cfg.gbdt.learning_rate = -1.0;
    CHECK_THROWS(cfg.validate());
    CHECK(parse_learner("extra_trees") == LearnerKind::extra_trees);
}

}
