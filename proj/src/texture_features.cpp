#include "oralstack/texture_features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace oralstack {

namespace {

std::size_t quantize(double v) {
    const double clipped = std::clamp(v, 0.0, std::nextafter(1.0, 0.0));
    return static_cast<std::size_t>(clipped * static_cast<double>(kGlcmLevels));
}

// Bilinear sample written as nested lerps so equal corners reproduce the
// corner value exactly (ties matter for the >= rule).
double bilinear(const GrayImage& g, double r, double c) {
    const auto r0 = static_cast<std::size_t>(std::floor(r));
    const auto c0 = static_cast<std::size_t>(std::floor(c));
    const double fr = r - static_cast<double>(r0);
    const double fc = c - static_cast<double>(c0);
    const std::size_t r1 = fr > 0.0 ? r0 + 1 : r0;
    const std::size_t c1 = fc > 0.0 ? c0 + 1 : c0;
    const double top = g.at(r0, c0) + fc * (g.at(r0, c1) - g.at(r0, c0));
    const double bottom = g.at(r1, c0) + fc * (g.at(r1, c1) - g.at(r1, c0));
    return top + fr * (bottom - top);
}

std::size_t reflect_index(long i, std::size_t n) {
    const long period = 2 * static_cast<long>(n);
    long m = i % period;
    if (m < 0) m += period;
    if (m >= static_cast<long>(n)) m = period - 1 - m;
    return static_cast<std::size_t>(m);
}

} // namespace

GlcmMatrix glcm(const GrayImage& gray, Offset offset) {
    GlcmMatrix counts{};
    double total = 0.0;
    for (std::size_t r = 0; r < gray.rows; ++r) {
        const long r2 = static_cast<long>(r) + offset.drow;
        if (r2 < 0 || r2 >= static_cast<long>(gray.rows)) continue;
        for (std::size_t c = 0; c < gray.cols; ++c) {
            const long c2 = static_cast<long>(c) + offset.dcol;
            if (c2 < 0 || c2 >= static_cast<long>(gray.cols)) continue;
            const std::size_t a = quantize(gray.at(r, c));
            const std::size_t b = quantize(gray.at(static_cast<std::size_t>(r2), static_cast<std::size_t>(c2)));
            counts[a][b] += 1.0;
            counts[b][a] += 1.0;
            total += 2.0;
        }
    }
    if (total == 0.0) {
        throw std::invalid_argument("image too small for GLCM offset (" + std::to_string(offset.drow) + "," +
                                    std::to_string(offset.dcol) + ")");
    }
    for (auto& row : counts) {
        for (auto& v : row) v /= total;
    }
    return counts;
}

GlcmStats glcm_stats(const GlcmMatrix& p) {
    GlcmStats s;
    double mu_i = 0.0;
    double mu_j = 0.0;
    for (std::size_t i = 0; i < kGlcmLevels; ++i) {
        for (std::size_t j = 0; j < kGlcmLevels; ++j) {
            mu_i += static_cast<double>(i) * p[i][j];
            mu_j += static_cast<double>(j) * p[i][j];
        }
    }
    double var_i = 0.0;
    double var_j = 0.0;
    double cov = 0.0;
    for (std::size_t i = 0; i < kGlcmLevels; ++i) {
        for (std::size_t j = 0; j < kGlcmLevels; ++j) {
            const double v = p[i][j];
            const double d = static_cast<double>(i) - static_cast<double>(j);
            s.contrast += d * d * v;
            s.dissimilarity += std::abs(d) * v;
            s.homogeneity += v / (1.0 + d * d);
            s.energy += v * v;
            if (v > 0.0) s.entropy -= v * std::log(v);
            const double di = static_cast<double>(i) - mu_i;
            const double dj = static_cast<double>(j) - mu_j;
            var_i += di * di * v;
            var_j += dj * dj * v;
            cov += di * dj * v;
        }
    }
    const double sd_i = std::sqrt(var_i);
    const double sd_j = std::sqrt(var_j);
    s.correlation = (sd_i < 1e-12 || sd_j < 1e-12) ? 0.0 : cov / (sd_i * sd_j);
    return s;
}

std::array<double, kLbpBins> lbp_riu2_hist(const GrayImage& gray) {
    if (gray.rows < 3 || gray.cols < 3) throw std::invalid_argument("LBP needs an image of at least 3x3");

    // Circle offsets (row, col) for P = 8, R = 1, snapped to exact grid
    // positions on the axes.
    std::array<std::pair<double, double>, 8> pts{};
    for (std::size_t p = 0; p < 8; ++p) {
        const double angle = 2.0 * 3.14159265358979323846 * static_cast<double>(p) / 8.0;
        double dr = -std::sin(angle);
        double dc = std::cos(angle);
        if (std::abs(dr - std::round(dr)) < 1e-12) dr = std::round(dr);
        if (std::abs(dc - std::round(dc)) < 1e-12) dc = std::round(dc);
        pts[p] = {dr, dc};
    }

    std::array<double, kLbpBins> hist{};
    double n = 0.0;
    for (std::size_t r = 1; r + 1 < gray.rows; ++r) {
        for (std::size_t c = 1; c + 1 < gray.cols; ++c) {
            const double center = gray.at(r, c);
            unsigned pattern = 0;
            for (std::size_t p = 0; p < 8; ++p) {
                const double v = bilinear(gray, static_cast<double>(r) + pts[p].first,
                                          static_cast<double>(c) + pts[p].second);
                if (v >= center) pattern |= 1u << p;
            }
            const unsigned rotated = ((pattern >> 1) | (pattern << 7)) & 0xFFu;
            const int transitions = std::popcount(pattern ^ rotated);
            const std::size_t bin = transitions <= 2 ? static_cast<std::size_t>(std::popcount(pattern)) : 9;
            hist[bin] += 1.0;
            n += 1.0;
        }
    }
    for (auto& v : hist) v /= n;
    return hist;
}

const std::array<GaborSpec, 12>& gabor_bank() {
    static const std::array<GaborSpec, 12> bank = [] {
        std::array<GaborSpec, 12> b{};
        std::size_t i = 0;
        for (double theta : {0.0, 45.0, 90.0, 135.0}) {
            for (double wavelength : {4.0, 8.0, 16.0}) b[i++] = {theta, wavelength};
        }
        return b;
    }();
    return bank;
}

GrayImage gabor_kernel(const GaborSpec& spec) {
    const double sigma = 0.5 * spec.wavelength;
    const auto half = static_cast<std::size_t>(std::ceil(2.0 * sigma));
    const std::size_t size = 2 * half + 1;

    // Exact direction cosines for the four bank orientations.
    double cos_t = std::cos(spec.theta_deg * 3.14159265358979323846 / 180.0);
    double sin_t = std::sin(spec.theta_deg * 3.14159265358979323846 / 180.0);
    const double s = std::sqrt(0.5);
    if (spec.theta_deg == 0.0) { cos_t = 1.0; sin_t = 0.0; }
    if (spec.theta_deg == 45.0) { cos_t = s; sin_t = s; }
    if (spec.theta_deg == 90.0) { cos_t = 0.0; sin_t = 1.0; }
    if (spec.theta_deg == 135.0) { cos_t = -s; sin_t = s; }

    GrayImage k(size, size);
    double sum = 0.0;
    for (std::size_t r = 0; r < size; ++r) {
        const double y = static_cast<double>(r) - static_cast<double>(half);
        for (std::size_t c = 0; c < size; ++c) {
            const double x = static_cast<double>(c) - static_cast<double>(half);
            const double xr = x * cos_t + y * sin_t;
            const double yr = -x * sin_t + y * cos_t;
            const double v = std::exp(-(xr * xr + yr * yr) / (2.0 * sigma * sigma)) *
                             std::cos(2.0 * 3.14159265358979323846 * xr / spec.wavelength);
            k.at(r, c) = v;
            sum += v;
        }
    }
    const double mean = sum / static_cast<double>(size * size);
    for (auto& v : k.pixels) v -= mean;
    return k;
}

GrayImage filter_reflect(const GrayImage& gray, const GrayImage& kernel) {
    const long half_r = static_cast<long>(kernel.rows / 2);
    const long half_c = static_cast<long>(kernel.cols / 2);

    // Pad once so the inner loop is a plain dot product.
    const std::size_t prow = gray.rows + 2 * static_cast<std::size_t>(half_r);
    const std::size_t pcol = gray.cols + 2 * static_cast<std::size_t>(half_c);
    GrayImage padded(prow, pcol);
    for (std::size_t r = 0; r < prow; ++r) {
        const std::size_t sr = reflect_index(static_cast<long>(r) - half_r, gray.rows);
        for (std::size_t c = 0; c < pcol; ++c) {
            padded.at(r, c) = gray.at(sr, reflect_index(static_cast<long>(c) - half_c, gray.cols));
        }
    }

    GrayImage out(gray.rows, gray.cols);
    for (std::size_t r = 0; r < gray.rows; ++r) {
        for (std::size_t c = 0; c < gray.cols; ++c) {
            double acc = 0.0;
            for (std::size_t kr = 0; kr < kernel.rows; ++kr) {
                const double* src = &padded.pixels[(r + kr) * pcol + c];
                const double* kv = &kernel.pixels[kr * kernel.cols];
                for (std::size_t kc = 0; kc < kernel.cols; ++kc) acc += src[kc] * kv[kc];
            }
            out.at(r, c) = acc;
        }
    }
    return out;
}

std::array<double, kGaborDim> gabor_features(const GrayImage& gray) {
    std::array<double, kGaborDim> out{};
    const auto& bank = gabor_bank();
    const double n = static_cast<double>(gray.pixels.size());
    for (std::size_t f = 0; f < bank.size(); ++f) {
        const GrayImage resp = filter_reflect(gray, gabor_kernel(bank[f]));
        double abs_sum = 0.0;
        double sum = 0.0;
        for (double v : resp.pixels) {
            abs_sum += std::abs(v);
            sum += v;
        }
        const double mean = sum / n;
        double ss = 0.0;
        for (double v : resp.pixels) ss += (v - mean) * (v - mean);
        out[2 * f] = abs_sum / n;
        out[2 * f + 1] = std::sqrt(ss / n);
    }
    return out;
}

TextureVector texture_features(const GrayImage& gray) {
    if (gray.rows < 3 || gray.cols < 3) throw std::invalid_argument("texture needs an image of at least 3x3");
    TextureVector t{};
    std::size_t i = 0;
    for (const Offset& off : kGlcmOffsets) {
        const GlcmStats s = glcm_stats(glcm(gray, off));
        for (double v : {s.contrast, s.dissimilarity, s.homogeneity, s.energy, s.correlation, s.entropy}) t[i++] = v;
    }
    for (double v : lbp_riu2_hist(gray)) t[i++] = v;
    for (double v : gabor_features(gray)) t[i++] = v;
    return t;
}

} // namespace oralstack
