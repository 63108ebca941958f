#include <doctest.h>

#include "oralstack/isotonic.hpp"
#include "oralstack/learners.hpp"
#include "support.hpp"

using namespace oralstack;

namespace {

std::vector<double> fitted(const IsotonicMap& map, const std::vector<double>& scores) {
    std::vector<double> out;
    for (double s : scores) out.push_back(map(s));
    return out;
}

} // namespace

TEST_SUITE("isotonic") {

TEST_CASE("small worked cases") {
    CHECK(fitted(fit_isotonic(std::vector<double>{0.1, 0.2, 0.3}, std::vector<double>{0, 1, 1}), {0.1, 0.2, 0.3}) ==
          std::vector<double>{0, 1, 1});
    CHECK(fitted(fit_isotonic(std::vector<double>{0.2, 0.8}, std::vector<double>{1, 0}), {0.2, 0.8}) ==
          std::vector<double>{0.5, 0.5});
    CHECK(fitted(fit_isotonic(std::vector<double>{0.1, 0.2, 0.3}, std::vector<double>{1, 0, 1}), {0.1, 0.2, 0.3}) ==
          std::vector<double>{0.5, 0.5, 1});
}

TEST_CASE("pool adjacent violators with weights") {
    const auto v = pool_adjacent_violators(std::vector<double>{3, 1, 2}, std::vector<double>{1, 1, 2});
    CHECK(v[0] == doctest::Approx(2.0));
    CHECK(v[1] == doctest::Approx(2.0));
    CHECK(v[2] == doctest::Approx(2.0));
}

TEST_CASE("matches exhaustive monotone least squares") {
    Rng rng(2024);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng.below(8);
        std::vector<double> scores(n);
        std::vector<double> targets(n);
        const bool coarse = rng.bernoulli(0.5);  // coarse grids force tied scores
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = coarse ? 0.25 * static_cast<double>(rng.below(4)) : rng.uniform();
            targets[i] = rng.bernoulli(0.5) ? (rng.bernoulli(0.5) ? 1.0 : 0.0) : rng.uniform();
        }
        const auto want = testing::oracle_isotonic(scores, targets);
        const auto got = fitted(fit_isotonic(scores, targets), scores);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-9);
    }
}

TEST_CASE("map interpolates and clamps") {
    const IsotonicMap map = fit_isotonic(std::vector<double>{0.2, 0.6}, std::vector<double>{0, 1});
    CHECK(map(0.0) == 0.0);
    CHECK(map(0.4) == doctest::Approx(0.5));
    CHECK(map(0.9) == 1.0);
    const IsotonicMap identity;
    CHECK(identity(0.37) == 0.37);
}

TEST_CASE("calibration") {
    Matrix p(1, 4);
    p(0, 0) = 0.9;
    p(0, 1) = 0.1;
    ClassCalibrators same;
    const Matrix same_out = calibrate(p, same);
    const double floor_sum = 1.0 + 2e-6;
    CHECK(same_out(0, 0) == doctest::Approx(0.9 / floor_sum).epsilon(1e-15));

    ClassCalibrators maps;
    maps[0].breakpoints = {0.0};
    maps[0].values = {0.5};
    const Matrix out = calibrate(p, maps);
    const double sum = 0.5 + 0.1 + 2e-6;
    CHECK(out(0, 0) == doctest::Approx(0.5 / sum).epsilon(1e-14));
    CHECK(out(0, 1) == doctest::Approx(0.1 / sum).epsilon(1e-14));
    CHECK(out(0, 2) == doctest::Approx(1e-6 / sum).epsilon(1e-12));

    Rng rng(8);
    Matrix probs(40, 4);
    std::vector<int> labels(40);
    for (std::size_t i = 0; i < 40; ++i) {
        const auto row = testing::random_simplex(rng);
        std::copy(row.begin(), row.end(), probs.row(i).begin());
        labels[i] = static_cast<int>(rng.below(4));
    }
    CHECK(is_probability_matrix(calibrate(probs, fit_calibrators(probs, labels))));
}

}
