#include "oralstack/synth.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "oralstack/error.hpp"
#include "oralstack/parallel.hpp"
#include "oralstack/random.hpp"

namespace oralstack {

namespace {

constexpr std::size_t kInformativeDeepDims = 32;
constexpr double kPi = 3.14159265358979323846;

struct Generated {
    std::vector<SampleRecord> samples;
    int label = 0;
};

int draw_class(Rng& rng, const std::array<double, kClasses>& priors) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t c = 0; c < kClasses; ++c) {
        acc += priors[c];
        if (u < acc) return static_cast<int>(c);
    }
    return static_cast<int>(kClasses - 1);
}

// Class-dependent spatial modulation in [-1, 1].
double pattern(int label, std::size_t r, std::size_t c, double phase) {
    static constexpr std::array<double, kClasses> period = {4.0, 6.0, 8.0, 12.0};
    const double p = period[static_cast<std::size_t>(label)];
    if (label % 2 == 0) return std::sin(2.0 * kPi * static_cast<double>(c) / p + phase);
    return std::sin(2.0 * kPi * static_cast<double>(c) / p + phase) * std::sin(2.0 * kPi * static_cast<double>(r) / p);
}

std::vector<float> box_smoothed_noise(Rng& rng, std::size_t size, double sd) {
    std::vector<double> raw(size * size);
    for (auto& v : raw) v = rng.normal(0.0, sd);
    std::vector<float> out(size * size);
    for (std::size_t r = 0; r < size; ++r) {
        for (std::size_t c = 0; c < size; ++c) {
            double acc = 0.0;
            double n = 0.0;
            for (long dr = -1; dr <= 1; ++dr) {
                for (long dc = -1; dc <= 1; ++dc) {
                    const long rr = static_cast<long>(r) + dr;
                    const long cc = static_cast<long>(c) + dc;
                    if (rr < 0 || cc < 0 || rr >= static_cast<long>(size) || cc >= static_cast<long>(size)) continue;
                    acc += raw[static_cast<std::size_t>(rr) * size + static_cast<std::size_t>(cc)];
                    n += 1.0;
                }
            }
            out[r * size + c] = static_cast<float>(acc / n);
        }
    }
    return out;
}

double dip_profile(std::size_t band) {
    const double d = band_wavelength(band) - 560.0;
    return std::exp(-d * d / (2.0 * 20.0 * 20.0));
}

std::string patient_name(std::size_t p) {
    std::string digits = std::to_string(p);
    return "p" + std::string(digits.size() < 4 ? 4 - digits.size() : 0, '0') + digits;
}

} // namespace

void SynthConfig::set_signal(double s) {
    signal_deep = signal_spectral = signal_texture = signal_demographic = s;
}

void SynthConfig::validate() const {
    if (patients < 1) throw ConfigError("patients must be ≥ 1");
    if (images_min < 1 || images_max < images_min) throw ConfigError("images range must satisfy 1 <= min <= max");
    if (cube_size < 3) throw ConfigError("cube size must be >= 3");
    double total = 0.0;
    for (double p : class_priors) {
        if (!(p >= 0.0)) throw ConfigError("class priors must be non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("class priors must sum to 1");
    for (double s : {signal_deep, signal_spectral, signal_texture, signal_demographic}) {
        if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("signal strengths must lie in [0, 1]");
    }
    if (!(patient_effect >= 0.0) || !(noise >= 0.0)) throw ConfigError("patient effect and noise must be >= 0");
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw ConfigError("missing rate must lie in [0, 1)");
}

Spectrum class_prototype_spectrum(int label, double spectral_signal) {
    // Rising tissue baseline with a haemoglobin absorption dip at 560 nm.
    const double depth = 0.04 + 0.015 * spectral_signal * static_cast<double>(label);
    Spectrum s;
    for (std::size_t k = 0; k < kBands; ++k) {
        const double lambda = band_wavelength(k);
        const double baseline = 0.30 + 0.30 * (lambda - kFirstWavelength) / (kLastWavelength - kFirstWavelength);
        s.values[k] = baseline - depth * dip_profile(k);
    }
    return s;
}

const std::array<std::array<double, kBands>, 3>& rgb_basis() {
    static const std::array<std::array<double, kBands>, 3> basis = [] {
        std::array<std::array<double, kBands>, 3> b{};
        const std::array<double, 3> peaks = {610.0, 550.0, 460.0};
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t k = 0; k < kBands; ++k) {
                const double d = band_wavelength(k) - peaks[i];
                b[i][k] = std::exp(-d * d / (2.0 * 40.0 * 40.0));
            }
        }
        return b;
    }();
    return basis;
}

Spectrum expand_rgb_to_pseudo_hsi(double r, double g, double b) {
    for (double v : {r, g, b}) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::out_of_range("RGB components must lie in [0, 1]");
    }
    const auto& basis = rgb_basis();
    Spectrum s;
    for (std::size_t k = 0; k < kBands; ++k) s.values[k] = r * basis[0][k] + g * basis[1][k] + b * basis[2][k];
    return s;
}

SynthSummary generate_cohort(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "cubes", ec);
    if (!ec) std::filesystem::create_directories(out_dir / "embeddings", ec);
    if (ec) throw DataError("cannot create output directory " + out_dir.string() + ": " + ec.message());

    // Class centroids of the deep embedding: a random sparse direction per class.
    std::array<std::vector<double>, kClasses> deep_means;
    {
        Rng rng(derive_seed(cfg.seed, 0xdee9));
        std::vector<std::size_t> dims(kDeepDim);
        std::iota(dims.begin(), dims.end(), 0);
        rng.shuffle(dims);
        for (auto& mean : deep_means) {
            mean.assign(kDeepDim, 0.0);
            for (std::size_t j = 0; j < kInformativeDeepDims; ++j) mean[dims[j]] = rng.normal();
        }
    }

    const std::size_t size = cfg.cube_size;
    std::vector<Generated> generated(cfg.patients);
    parallel_for(cfg.patients, [&](std::size_t p) {
        Rng rng(derive_seed(cfg.seed, 1000 + p));
        Generated& gen = generated[p];
        const int label = draw_class(rng, cfg.class_priors);
        gen.label = label;
        const double c = static_cast<double>(label);
        const std::string pid = patient_name(p);

        // Patient-level quantities shared by all images.
        const double spectral_bias = rng.normal(0.0, 0.02 * cfg.patient_effect);
        const double patient_dip = rng.normal(0.0, 0.012 * cfg.patient_effect);
        std::vector<double> deep_bias(kDeepDim);
        for (auto& v : deep_bias) v = rng.normal(0.0, 0.5 * cfg.patient_effect);
        const double sd = cfg.signal_demographic;
        auto maybe = [&](int v) { return rng.bernoulli(cfg.missing_rate) ? kMissingFlag : v; };
        double age = std::clamp(rng.normal(45.0 + 8.0 * sd * c, 10.0), 18.0, 95.0);
        age = std::round(age * 10.0) / 10.0;
        if (rng.bernoulli(cfg.missing_rate)) age = kMissingAge;
        const int sex = maybe(rng.bernoulli(0.5) ? 1 : 0);
        const int smoking = maybe(rng.bernoulli(0.2 + 0.15 * sd * c) ? 1 : 0);
        const int alcohol = maybe(rng.bernoulli(0.2 + 0.10 * sd * c) ? 1 : 0);
        const int betel = maybe(rng.bernoulli(0.1 + 0.20 * sd * c) ? 1 : 0);

        const Spectrum proto = class_prototype_spectrum(label, cfg.signal_spectral);
        const std::size_t n_images = cfg.images_min + rng.below(cfg.images_max - cfg.images_min + 1);
        const double amplitude = 0.03 * cfg.signal_texture * c / 3.0;

        for (std::size_t i = 0; i < n_images; ++i) {
            SampleRecord rec;
            rec.sample_id = pid + "_i" + std::to_string(i);
            rec.patient_id = pid;
            rec.label = static_cast<Label>(label);
            rec.age = age;
            rec.sex = sex;
            rec.smoking = smoking;
            rec.alcohol = alcohol;
            rec.betel = betel;
            rec.cube_path = std::filesystem::path("cubes") / (rec.sample_id + ".hsc");
            rec.embedding_path = std::filesystem::path("embeddings") / (rec.sample_id + ".emb");

            const double image_bias = rng.normal(0.0, 0.01 * cfg.noise);
            const double dip = patient_dip + rng.normal(0.0, 0.006 * cfg.noise);
            const double phase = rng.uniform(0.0, 2.0 * kPi);
            const std::vector<float> shared = box_smoothed_noise(rng, size, 0.03 * cfg.noise);
            SpectralCube cube(size, size);
            for (std::size_t k = 0; k < kBands; ++k) {
                const std::vector<float> own = box_smoothed_noise(rng, size, 0.01 * cfg.noise);
                const double level = proto.values[k] + spectral_bias + image_bias - dip * dip_profile(k);
                for (std::size_t r = 0; r < size; ++r) {
                    for (std::size_t col = 0; col < size; ++col) {
                        const double mod = 1.0 + amplitude * pattern(label, r, col, phase);
                        const double v = level * mod + shared[r * size + col] + own[r * size + col];
                        cube.at(k, r, col) = static_cast<float>(std::clamp(v, 0.001, 1.0));
                    }
                }
            }
            write_cube(out_dir / rec.cube_path, cube);

            std::vector<float> emb(kDeepDim);
            for (std::size_t j = 0; j < kDeepDim; ++j) {
                emb[j] = static_cast<float>(0.5 * cfg.signal_deep * deep_means[static_cast<std::size_t>(label)][j] +
                                            deep_bias[j] + rng.normal(0.0, cfg.noise));
            }
            write_embedding(out_dir / rec.embedding_path, emb);
            gen.samples.push_back(std::move(rec));
        }
    });

    SynthSummary summary;
    summary.manifest = out_dir / "manifest.csv";
    std::vector<SampleRecord> all;
    for (const auto& g : generated) {
        summary.class_patients[static_cast<std::size_t>(g.label)]++;
        summary.class_images[static_cast<std::size_t>(g.label)] += g.samples.size();
        all.insert(all.end(), g.samples.begin(), g.samples.end());
    }
    summary.images = all.size();
    write_manifest(summary.manifest, all);
    return summary;
}

} // namespace oralstack
