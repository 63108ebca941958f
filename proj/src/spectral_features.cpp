#include "oralstack/spectral_features.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace oralstack {

namespace {

constexpr std::array<std::pair<double, double>, 4> kRatioPairs = {
    {{545.0, 575.0}, {560.0, 600.0}, {540.0, 575.0}, {550.0, 570.0}}};
constexpr std::array<std::pair<double, double>, 3> kDifferencePairs = {
    {{560.0, 600.0}, {545.0, 575.0}, {540.0, 580.0}}};
constexpr std::array<std::size_t, 3> kCurvatureCenters = {14, 17, 20};

} // namespace

double window_slope(const Spectrum& spectrum, std::size_t start_band, std::size_t length) {
    if (length < 2 || start_band + length > kBands) {
        throw std::out_of_range("slope window [" + std::to_string(start_band) + ", +" + std::to_string(length) +
                                ") outside the 31-band spectrum");
    }
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t k = start_band; k < start_band + length; ++k) {
        mean_x += band_wavelength(k);
        mean_y += spectrum.values[k];
    }
    mean_x /= static_cast<double>(length);
    mean_y /= static_cast<double>(length);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = start_band; k < start_band + length; ++k) {
        const double dx = band_wavelength(k) - mean_x;
        sxy += dx * (spectrum.values[k] - mean_y);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

double window_curvature(const Spectrum& spectrum, std::size_t center_band, std::size_t halfwidth) {
    if (halfwidth < 1 || center_band < halfwidth || center_band + halfwidth >= kBands) {
        throw std::out_of_range("curvature window centred at band " + std::to_string(center_band) +
                                " outside the 31-band spectrum");
    }
    // Symmetric abscissae make the odd moments vanish, so the quadratic
    // coefficient decouples from the linear one.
    const double n = static_cast<double>(2 * halfwidth + 1);
    double s2 = 0.0;
    double s4 = 0.0;
    double sy = 0.0;
    double s2y = 0.0;
    for (std::size_t k = center_band - halfwidth; k <= center_band + halfwidth; ++k) {
        const double u = band_wavelength(k) - band_wavelength(center_band);
        const double y = spectrum.values[k];
        s2 += u * u;
        s4 += u * u * u * u;
        sy += y;
        s2y += u * u * y;
    }
    return (n * s2y - s2 * sy) / (n * s4 - s2 * s2);
}

double normalized_difference(double a, double b) {
    const double sum = a + b;
    if (sum < kDenominatorFloor) return 0.0;
    return (a - b) / sum;
}

double floored_ratio(double a, double b) { return a / std::max(b, kDenominatorFloor); }

HbFeatureVector hb_features(const BandStatistics& stats) {
    HbFeatureVector f{};
    const Spectrum& s = stats.mean;
    auto r = [&](double nm) { return reflectance_at(s, nm); };

    std::size_t i = 0;
    for (std::size_t k = 12; k <= 20; ++k) f[i++] = s.values[k];
    for (std::size_t k = 12; k <= 20; ++k) f[i++] = stats.stddev.values[k];
    for (auto [a, b] : kRatioPairs) f[i++] = floored_ratio(r(a), r(b));
    for (auto [a, b] : kRatioPairs) f[i++] = normalized_difference(r(a), r(b));
    for (auto [a, b] : kDifferencePairs) f[i++] = r(a) - r(b);
    for (std::size_t start = 0; start <= 26; start += 2) f[i++] = window_slope(s, start, 5);
    for (std::size_t c : kCurvatureCenters) f[i++] = window_curvature(s, c, 2);
    return f;
}

HbFeatureVector hb_features(const SpectralCube& cube) { return hb_features(roi_band_statistics(cube)); }

SpectralShapeVector spectral_shape_features(const Spectrum& spectrum) {
    const auto& s = spectrum.values;
    SpectralShapeVector f{};

    std::size_t argmax = 0;
    std::size_t argmin = 0;
    for (std::size_t k = 1; k < kBands; ++k) {
        if (s[k] > s[argmax]) argmax = k;
        if (s[k] < s[argmin]) argmin = k;
    }
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(kBands);
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    var /= static_cast<double>(kBands);

    double area = 0.0;
    double variation = 0.0;
    for (std::size_t k = 0; k + 1 < kBands; ++k) {
        area += 0.5 * (s[k] + s[k + 1]);
        variation += std::abs(s[k + 1] - s[k]);
    }
    area /= static_cast<double>(kBands - 1);

    f[0] = s[argmax];
    f[1] = s[argmin];
    f[2] = (band_wavelength(argmax) - kFirstWavelength) / (kLastWavelength - kFirstWavelength);
    f[3] = (band_wavelength(argmin) - kFirstWavelength) / (kLastWavelength - kFirstWavelength);
    f[4] = s[argmax] - s[argmin];
    f[5] = mean;
    f[6] = std::sqrt(var);
    f[7] = area;
    f[8] = variation;
    std::size_t i = 9;
    for (std::size_t k = 2; k <= 26; k += 2) f[i++] = (s[k + 1] - s[k - 1]) / (2.0 * kBandStep);
    for (std::size_t k = 3; k <= 27; k += 3) f[i++] = (s[k - 1] - 2.0 * s[k] + s[k + 1]) / (kBandStep * kBandStep);
    return f;
}

SpectralShapeVector spectral_shape_features(const SpectralCube& cube) {
    return spectral_shape_features(roi_mean_spectrum(cube));
}

} // namespace oralstack
