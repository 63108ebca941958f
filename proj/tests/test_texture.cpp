#include <doctest.h>

#include <cmath>

#include "oralstack/texture_features.hpp"
#include "support.hpp"

using namespace oralstack;

namespace {

constexpr double kPi = 3.14159265358979323846;

GrayImage random_image(Rng& rng, std::size_t rows, std::size_t cols) {
    GrayImage g(rows, cols);
    for (auto& v : g.pixels) v = rng.uniform();
    return g;
}

GrayImage checkerboard(std::size_t n) {
    GrayImage g(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) g.at(r, c) = (r + c) % 2 ? 0.99 : 0.0;
    }
    return g;
}

// Half-sample symmetric reflection by repeated folding.
long fold(long i, long n) {
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
    return i;
}

GrayImage oracle_filter(const GrayImage& img, const GrayImage& k) {
    GrayImage out(img.rows, img.cols);
    const long hr = static_cast<long>(k.rows / 2);
    const long hc = static_cast<long>(k.cols / 2);
    for (long r = 0; r < static_cast<long>(img.rows); ++r) {
        for (long c = 0; c < static_cast<long>(img.cols); ++c) {
            double acc = 0.0;
            for (long i = -hr; i <= hr; ++i) {
                for (long j = -hc; j <= hc; ++j) {
                    const long rr = fold(r + i, static_cast<long>(img.rows));
                    const long cc = fold(c + j, static_cast<long>(img.cols));
                    acc += img.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)) *
                           k.at(static_cast<std::size_t>(i + hr), static_cast<std::size_t>(j + hc));
                }
            }
            out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
        }
    }
    return out;
}

// Gabor kernel from the textbook definition with library trig.
GrayImage oracle_kernel(double theta_deg, double lambda) {
    const double sigma = lambda / 2.0;
    const int half = static_cast<int>(std::ceil(2.0 * sigma));
    GrayImage k(static_cast<std::size_t>(2 * half + 1), static_cast<std::size_t>(2 * half + 1));
    const double t = theta_deg * kPi / 180.0;
    double sum = 0.0;
    for (int y = -half; y <= half; ++y) {
        for (int x = -half; x <= half; ++x) {
            const double xr = x * std::cos(t) + y * std::sin(t);
            const double yr = -x * std::sin(t) + y * std::cos(t);
            const double v = std::exp(-(xr * xr + yr * yr) / (2 * sigma * sigma)) * std::cos(2 * kPi * xr / lambda);
            k.at(static_cast<std::size_t>(y + half), static_cast<std::size_t>(x + half)) = v;
            sum += v;
        }
    }
    for (auto& v : k.pixels) v -= sum / static_cast<double>(k.pixels.size());
    return k;
}

} // namespace

TEST_SUITE("texture-features") {

TEST_CASE("co-occurrence of a constant image is a single diagonal cell") {
    const GrayImage g(5, 5, 0.3);
    for (const Offset& off : kGlcmOffsets) {
        const auto p = glcm(g, off);
        for (std::size_t i = 0; i < kGlcmLevels; ++i) {
            for (std::size_t j = 0; j < kGlcmLevels; ++j) CHECK(p[i][j] == (i == 2 && j == 2 ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("hand-enumerated co-occurrence pairs") {
    GrayImage pair(1, 2);
    pair.at(0, 1) = 0.99;
    auto p = glcm(pair, {0, 1});
    CHECK(p[0][7] == 0.5);
    CHECK(p[7][0] == 0.5);

    // Directed pairs (0,1): 0->0.99 and 0.99->0 per row; symmetrized.
    p = glcm(checkerboard(2), {0, 1});
    CHECK(p[0][7] == 0.5);
    CHECK(p[7][0] == 0.5);
    CHECK(p[0][0] == 0.0);

    CHECK_THROWS_AS(glcm(pair, {1, 0}), std::invalid_argument);
}

TEST_CASE("co-occurrence statistics") {
    GlcmMatrix delta{};
    delta[3][3] = 1.0;
    auto s = glcm_stats(delta);
    CHECK(s.contrast == 0.0);
    CHECK(s.dissimilarity == 0.0);
    CHECK(s.homogeneity == 1.0);
    CHECK(s.energy == 1.0);
    CHECK(s.correlation == 0.0);
    CHECK(s.entropy == 0.0);

    GlcmMatrix two{};
    two[0][7] = two[7][0] = 0.5;
    s = glcm_stats(two);
    CHECK(s.contrast == doctest::Approx(49.0));
    CHECK(s.dissimilarity == doctest::Approx(7.0));
    CHECK(s.homogeneity == doctest::Approx(0.02));
    CHECK(s.energy == doctest::Approx(0.5));
    CHECK(s.entropy == doctest::Approx(std::log(2.0)));
    CHECK(s.correlation == doctest::Approx(-1.0));

    GlcmMatrix uniform{};
    for (auto& row : uniform) row.fill(1.0 / 64.0);
    s = glcm_stats(uniform);
    CHECK(s.energy == doctest::Approx(1.0 / 64.0));
    CHECK(s.entropy == doctest::Approx(std::log(64.0)));
}

TEST_CASE("contrast scales with the fraction of crossing pairs") {
    CHECK(glcm_stats(glcm(checkerboard(8), {0, 1})).contrast == doctest::Approx(49.0));
    CHECK(glcm_stats(glcm(checkerboard(8), {1, 1})).contrast == doctest::Approx(0.0));

    // Stripes two pixels wide: 3 of every 7 horizontal pairs cross.
    GrayImage stripes(8, 8);
    for (std::size_t r = 0; r < 8; ++r) {
        for (std::size_t c = 0; c < 8; ++c) stripes.at(r, c) = (c / 2) % 2 ? 0.99 : 0.0;
    }
    CHECK(glcm_stats(glcm(stripes, {0, 1})).contrast == doctest::Approx(49.0 * 3.0 / 7.0));
}

TEST_CASE("local binary patterns") {
    auto h = lbp_riu2_hist(GrayImage(6, 6, 0.4));
    for (std::size_t b = 0; b < kLbpBins; ++b) CHECK(h[b] == (b == 8 ? 1.0 : 0.0));

    GrayImage peak(3, 3, 0.1);
    peak.at(1, 1) = 0.9;
    h = lbp_riu2_hist(peak);
    CHECK(h[0] == 1.0);

    // Interior pixels of a vertical step: the dark side sees all neighbours
    // >= centre (bin 8); the bright side sees five contiguous set bits (bin 5).
    GrayImage step(4, 4);
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 2; c < 4; ++c) step.at(r, c) = 1.0;
    }
    h = lbp_riu2_hist(step);
    CHECK(h[8] == 0.5);
    CHECK(h[5] == 0.5);
    CHECK(h[9] == 0.0);

    Rng rng(3);
    const auto rh = lbp_riu2_hist(random_image(rng, 12, 9));
    CHECK(std::accumulate(rh.begin(), rh.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("gabor kernels match the reference definition") {
    for (const auto& spec : gabor_bank()) {
        const GrayImage k = gabor_kernel(spec);
        const GrayImage ref = oracle_kernel(spec.theta_deg, spec.wavelength);
        REQUIRE(k.rows == ref.rows);
        double sum = 0.0;
        for (std::size_t i = 0; i < k.pixels.size(); ++i) {
            CHECK(std::abs(k.pixels[i] - ref.pixels[i]) < 1e-12);
            sum += k.pixels[i];
        }
        CHECK(std::abs(sum) < 1e-10);
    }
}

TEST_CASE("reflect filtering matches an independent convolution") {
    Rng rng(21);
    for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{7, 9}, {16, 16}, {3, 4}}) {
        const GrayImage img = random_image(rng, rows, cols);
        for (const auto& spec : gabor_bank()) {
            const GrayImage k = gabor_kernel(spec);
            const GrayImage got = filter_reflect(img, k);
            const GrayImage want = oracle_filter(img, k);
            for (std::size_t i = 0; i < got.pixels.size(); ++i) CHECK(std::abs(got.pixels[i] - want.pixels[i]) < 1e-10);
        }
    }
}

TEST_CASE("gabor responses") {
    for (double v : gabor_features(GrayImage(32, 32, 0.7))) CHECK(std::abs(v) <= 1e-9);

    GrayImage grating(32, 32);
    for (std::size_t r = 0; r < 32; ++r) {
        for (std::size_t c = 0; c < 32; ++c) grating.at(r, c) = 0.5 + 0.5 * std::cos(2.0 * kPi * static_cast<double>(c) / 8.0);
    }
    const auto f = gabor_features(grating);
    std::size_t best = 0;
    for (std::size_t i = 1; i < 12; ++i) {
        if (f[2 * i] > f[2 * best]) best = i;
    }
    CHECK(gabor_bank()[best].theta_deg == 0.0);
    CHECK(gabor_bank()[best].wavelength == 8.0);

    // Oracle agreement of the summary statistics.
    for (std::size_t i = 0; i < 12; ++i) {
        const GrayImage resp = oracle_filter(grating, oracle_kernel(gabor_bank()[i].theta_deg, gabor_bank()[i].wavelength));
        double abs_sum = 0.0;
        for (double v : resp.pixels) abs_sum += std::abs(v);
        CHECK(f[2 * i] == doctest::Approx(abs_sum / 1024.0).epsilon(1e-9));
    }
}

TEST_CASE("gabor features rotate with the image") {
    Rng rng(9);
    const GrayImage img = random_image(rng, 16, 16);
    GrayImage rot(16, 16);
    for (std::size_t r = 0; r < 16; ++r) {
        for (std::size_t c = 0; c < 16; ++c) rot.at(r, c) = img.at(15 - c, r);
    }
    const auto a = gabor_features(img);
    const auto b = gabor_features(rot);
    // Orientation blocks of 6 values: 0 <-> 90 and 45 <-> 135.
    const std::array<std::size_t, 4> partner = {2, 3, 0, 1};
    for (std::size_t o = 0; o < 4; ++o) {
        for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(a[6 * o + j] - b[6 * partner[o] + j]) < 1e-9);
    }
}

TEST_CASE("texture vector layout") {
    const auto t = texture_features(GrayImage(8, 8, 0.2));
    CHECK(t.size() == 58);
    for (std::size_t o = 0; o < 4; ++o) {
        const std::array<double, 6> want = {0, 0, 1, 1, 0, 0};
        for (std::size_t j = 0; j < 6; ++j) CHECK(t[6 * o + j] == want[j]);
    }
    for (std::size_t b = 0; b < kLbpBins; ++b) CHECK(t[24 + b] == (b == 8 ? 1.0 : 0.0));
    for (std::size_t i = 34; i < 58; ++i) CHECK(std::abs(t[i]) <= 1e-9);
}

}
