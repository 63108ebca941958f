#pragma once
// Domain types shared by the feature extractors: spectral cubes, manifest
// records, ROI spectra and the luminance plane used for texture.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oralstack/error.hpp"

namespace oralstack {

inline constexpr std::size_t kBands = 31;
inline constexpr std::size_t kClasses = 4;
inline constexpr double kFirstWavelength = 400.0;
inline constexpr double kBandStep = 10.0;
inline constexpr double kLastWavelength = 700.0;

enum class Label : std::uint8_t { healthy = 0, benign = 1, opmd = 2, oca = 3 };

std::string_view label_name(Label label);
// Throws DataError("unknown label ...") for anything but the four tokens.
Label parse_label(std::string_view token);

constexpr double band_wavelength(std::size_t band) {
    return kFirstWavelength + kBandStep * static_cast<double>(band);
}

// Receives non-fatal warnings (e.g. reflectance outside [0, 1]).
// Defaults to writing to stderr.
void set_warning_handler(std::function<void(std::string_view)> handler);
void warn(std::string_view message);

// H x W x 31 reflectance raster, band-major (band, row, col).
class SpectralCube {
public:
    SpectralCube(std::size_t height, std::size_t width);
    SpectralCube(std::size_t height, std::size_t width, std::vector<float> data);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t bands() const { return kBands; }
    std::size_t pixels() const { return height_ * width_; }

    float& at(std::size_t band, std::size_t row, std::size_t col) {
        return data_[(band * height_ + row) * width_ + col];
    }
    float at(std::size_t band, std::size_t row, std::size_t col) const {
        return data_[(band * height_ + row) * width_ + col];
    }

    std::span<const float> band(std::size_t k) const {
        return {data_.data() + k * pixels(), pixels()};
    }
    std::span<float> band(std::size_t k) { return {data_.data() + k * pixels(), pixels()}; }

    const std::vector<float>& data() const { return data_; }

    // Number of values outside the nominal [0, 1] reflectance range.
    std::size_t out_of_range_count() const;

    bool operator==(const SpectralCube&) const = default;

private:
    std::size_t height_;
    std::size_t width_;
    std::vector<float> data_;
};

enum class CubeErrorKind { io, bad_magic, bad_bands, bad_dims, truncated, size_mismatch, non_finite };

class CubeError : public DataError {
public:
    CubeError(CubeErrorKind kind, const std::string& what) : DataError(what), kind_(kind) {}
    CubeErrorKind kind() const { return kind_; }

private:
    CubeErrorKind kind_;
};

// HSC1: "HSC1", u32 LE height, width, bands(=31), then float32 LE band-major.
SpectralCube load_cube(const std::filesystem::path& path);
SpectralCube decode_cube(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_cube(const SpectralCube& cube);
void write_cube(const std::filesystem::path& path, const SpectralCube& cube);

inline constexpr std::size_t kDeepDim = 768;

// EMB1: "EMB1", u32 LE dim, then dim float32 LE.
std::vector<double> load_embedding(const std::filesystem::path& path);
void write_embedding(const std::filesystem::path& path, std::span<const float> values);

// Missing-value sentinels used at ingestion; fusion imputes them.
inline constexpr double kMissingAge = std::numeric_limits<double>::quiet_NaN();
inline constexpr int kMissingFlag = -1;

struct SampleRecord {
    std::string sample_id;
    std::string patient_id;
    Label label = Label::healthy;
    double age = kMissingAge;  // years
    int sex = kMissingFlag;    // {0,1}
    int smoking = kMissingFlag;
    int alcohol = kMissingFlag;
    int betel = kMissingFlag;
    std::filesystem::path cube_path;
    std::filesystem::path embedding_path;
};

// Demographic slots: age/100, sex, smoking, alcohol, betel. Missing entries
// keep the sentinels (NaN age, -1 flags).
std::array<double, 5> demographic_vector(const SampleRecord& record);

class Dataset {
public:
    explicit Dataset(std::vector<SampleRecord> samples);

    const std::vector<SampleRecord>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    const SampleRecord& operator[](std::size_t i) const { return samples_[i]; }

    // patient_id -> sample indices in manifest order.
    const std::map<std::string, std::vector<std::size_t>>& patients() const { return patients_; }

private:
    std::vector<SampleRecord> samples_;
    std::map<std::string, std::vector<std::size_t>> patients_;
};

inline constexpr std::array<std::string_view, 10> kManifestColumns = {
    "sample_id", "patient_id", "label", "age", "sex",
    "smoking", "alcohol", "betel", "cube_path", "embedding_path"};

// Rows exclude the header; relative paths are resolved against base_dir.
Dataset validate_manifest(const std::vector<std::vector<std::string>>& rows,
                          const std::filesystem::path& base_dir = {});
// Parses the manifest CSV (header required) and validates it.
Dataset read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<SampleRecord>& samples);

struct Spectrum {
    std::array<double, kBands> values{};
};

struct BandStatistics {
    Spectrum mean;
    Spectrum stddev;  // population, over pixels
};

Spectrum roi_mean_spectrum(const SpectralCube& cube);
BandStatistics roi_band_statistics(const SpectralCube& cube);

// Linear interpolation on the 10 nm grid; exact on grid wavelengths.
double reflectance_at(const Spectrum& spectrum, double wavelength_nm);

struct GrayImage {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> pixels;

    GrayImage() = default;
    GrayImage(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), pixels(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return pixels[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return pixels[r * cols + c]; }
};

// Triangular photopic-like weights: zero outside (450, 650) nm, peak at
// 550 nm, summing to 1.
const std::array<double, kBands>& luminance_weights();

// Weighted band sum per pixel before rescaling.
GrayImage luminance_raw(const SpectralCube& cube);
// luminance_raw min-max rescaled to [0, 1]; a constant plane maps to 0.5.
GrayImage luminance_plane(const SpectralCube& cube);

} // namespace oralstack
