#include "oralstack/core.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>

namespace oralstack {

namespace {

constexpr std::array<std::string_view, kClasses> kLabelNames = {"healthy", "benign", "opmd", "oca"};

std::function<void(std::string_view)>& warning_handler() {
    static std::function<void(std::string_view)> handler = [](std::string_view msg) {
        std::cerr << "warning: " << msg << '\n';
    };
    return handler;
}

std::uint32_t read_u32_le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

float read_f32_le(const std::uint8_t* p) { return std::bit_cast<float>(read_u32_le(p)); }

void append_f32_le(std::vector<std::uint8_t>& out, float v) {
    append_u32_le(out, std::bit_cast<std::uint32_t>(v));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CubeError(CubeErrorKind::io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_number(const std::string& cell, std::size_t row, std::string_view column) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw DataError("manifest row " + std::to_string(row) + ": bad " + std::string(column) +
                        " value '" + cell + "'");
    }
    return v;
}

int parse_flag(const std::string& cell, std::size_t row, std::string_view column) {
    if (cell.empty()) return kMissingFlag;
    if (cell == "0") return 0;
    if (cell == "1") return 1;
    throw DataError("manifest row " + std::to_string(row) + ": " + std::string(column) +
                    " must be 0, 1 or empty, got '" + cell + "'");
}

} // namespace

std::string_view label_name(Label label) { return kLabelNames.at(static_cast<std::size_t>(label)); }

Label parse_label(std::string_view token) {
    for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
        if (kLabelNames[i] == token) return static_cast<Label>(i);
    }
    throw DataError("unknown label '" + std::string(token) + "'");
}

void set_warning_handler(std::function<void(std::string_view)> handler) {
    warning_handler() = std::move(handler);
}

void warn(std::string_view message) {
    if (warning_handler()) warning_handler()(message);
}

// ---------------------------------------------------------------------------
// SpectralCube

SpectralCube::SpectralCube(std::size_t height, std::size_t width)
    : SpectralCube(height, width, std::vector<float>(height * width * kBands, 0.0f)) {}

SpectralCube::SpectralCube(std::size_t height, std::size_t width, std::vector<float> data)
    : height_(height), width_(width), data_(std::move(data)) {
    if (height_ < 3 || width_ < 3) {
        throw CubeError(CubeErrorKind::bad_dims, "cube must be at least 3x3, got " +
                                                     std::to_string(height_) + "x" + std::to_string(width_));
    }
    if (data_.size() != height_ * width_ * kBands) {
        throw CubeError(CubeErrorKind::size_mismatch, "cube data size does not match dimensions");
    }
    for (float v : data_) {
        if (!std::isfinite(v)) throw CubeError(CubeErrorKind::non_finite, "cube contains non-finite values");
    }
}

std::size_t SpectralCube::out_of_range_count() const {
    return static_cast<std::size_t>(
        std::count_if(data_.begin(), data_.end(), [](float v) { return v < 0.0f || v > 1.0f; }));
}

SpectralCube decode_cube(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "HSC1", 4) != 0) {
        throw CubeError(CubeErrorKind::bad_magic, "bad magic: not an HSC1 cube");
    }
    if (bytes.size() < 16) throw CubeError(CubeErrorKind::truncated, "truncated cube header");
    const std::uint32_t h = read_u32_le(bytes.data() + 4);
    const std::uint32_t w = read_u32_le(bytes.data() + 8);
    const std::uint32_t b = read_u32_le(bytes.data() + 12);
    if (b != kBands) throw CubeError(CubeErrorKind::bad_bands, "expected 31 bands, got " + std::to_string(b));
    if (h < 3 || w < 3) {
        throw CubeError(CubeErrorKind::bad_dims,
                        "cube must be at least 3x3, got " + std::to_string(h) + "x" + std::to_string(w));
    }
    const std::size_t count = std::size_t{h} * w * kBands;
    const std::size_t expected = 16 + count * 4;
    if (bytes.size() < expected) {
        throw CubeError(CubeErrorKind::truncated, "truncated cube: expected " + std::to_string(expected) +
                                                      " bytes, got " + std::to_string(bytes.size()));
    }
    if (bytes.size() > expected) {
        throw CubeError(CubeErrorKind::size_mismatch, "cube has " + std::to_string(bytes.size() - expected) +
                                                          " trailing bytes");
    }
    std::vector<float> data(count);
    for (std::size_t i = 0; i < count; ++i) data[i] = read_f32_le(bytes.data() + 16 + 4 * i);
    SpectralCube cube(h, w, std::move(data));
    if (auto n = cube.out_of_range_count(); n > 0) {
        warn(std::to_string(n) + " reflectance values outside [0, 1]");
    }
    return cube;
}

SpectralCube load_cube(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_cube(bytes);
    } catch (const CubeError& e) {
        throw CubeError(e.kind(), path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_cube(const SpectralCube& cube) {
    std::vector<std::uint8_t> out;
    out.reserve(16 + cube.data().size() * 4);
    out.insert(out.end(), {'H', 'S', 'C', '1'});
    append_u32_le(out, static_cast<std::uint32_t>(cube.height()));
    append_u32_le(out, static_cast<std::uint32_t>(cube.width()));
    append_u32_le(out, static_cast<std::uint32_t>(kBands));
    for (float v : cube.data()) append_f32_le(out, v);
    return out;
}

void write_cube(const std::filesystem::path& path, const SpectralCube& cube) {
    write_file_bytes(path, encode_cube(cube));
}

std::vector<double> load_embedding(const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes;
    try {
        bytes = read_file_bytes(path);
    } catch (const CubeError&) {
        throw DataError("cannot open " + path.string());
    }
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "EMB1", 4) != 0) {
        throw DataError(path.string() + ": bad magic: not an EMB1 embedding");
    }
    if (bytes.size() < 8) throw DataError(path.string() + ": truncated embedding header");
    const std::uint32_t dim = read_u32_le(bytes.data() + 4);
    if (dim == 0) throw DataError(path.string() + ": embedding dimension is zero");
    if (bytes.size() != 8 + std::size_t{dim} * 4) {
        throw DataError(path.string() + ": truncated embedding (declared dim " + std::to_string(dim) + ")");
    }
    std::vector<double> out(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        out[i] = read_f32_le(bytes.data() + 8 + 4 * i);
        if (!std::isfinite(out[i])) throw DataError(path.string() + ": non-finite embedding value");
    }
    return out;
}

void write_embedding(const std::filesystem::path& path, std::span<const float> values) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'E', 'M', 'B', '1'});
    append_u32_le(out, static_cast<std::uint32_t>(values.size()));
    for (float v : values) append_f32_le(out, v);
    write_file_bytes(path, out);
}

// ---------------------------------------------------------------------------
// Manifest

std::array<double, 5> demographic_vector(const SampleRecord& r) {
    auto flag = [](int v) { return v == kMissingFlag ? -1.0 : static_cast<double>(v); };
    return {std::isnan(r.age) ? kMissingAge : r.age / 100.0, flag(r.sex), flag(r.smoking), flag(r.alcohol),
            flag(r.betel)};
}

Dataset::Dataset(std::vector<SampleRecord> samples) : samples_(std::move(samples)) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& s = samples_[i];
        if (s.sample_id.empty()) throw DataError("sample " + std::to_string(i) + " has empty sample_id");
        if (s.patient_id.empty()) throw DataError("sample " + s.sample_id + " has empty patient_id");
        if (!seen.insert(s.sample_id).second) throw DataError("duplicate sample_id " + s.sample_id);
        patients_[s.patient_id].push_back(i);
    }
}

Dataset validate_manifest(const std::vector<std::vector<std::string>>& rows, const std::filesystem::path& base_dir) {
    std::vector<SampleRecord> samples;
    samples.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const std::size_t row_no = i + 1;
        if (row.size() != kManifestColumns.size()) {
            throw DataError("manifest row " + std::to_string(row_no) + ": expected 10 columns, got " +
                            std::to_string(row.size()));
        }
        SampleRecord r;
        r.sample_id = row[0];
        r.patient_id = row[1];
        try {
            r.label = parse_label(row[2]);
        } catch (const DataError& e) {
            throw DataError("manifest row " + std::to_string(row_no) + ": " + e.what());
        }
        if (!row[3].empty()) {
            r.age = parse_number(row[3], row_no, "age");
            if (!(r.age > 0.0 && r.age < 120.0)) {
                throw DataError("manifest row " + std::to_string(row_no) + ": age out of range (0, 120)");
            }
        }
        r.sex = parse_flag(row[4], row_no, "sex");
        r.smoking = parse_flag(row[5], row_no, "smoking");
        r.alcohol = parse_flag(row[6], row_no, "alcohol");
        r.betel = parse_flag(row[7], row_no, "betel");
        if (row[8].empty() || row[9].empty()) {
            throw DataError("manifest row " + std::to_string(row_no) + ": missing cube_path or embedding_path");
        }
        r.cube_path = row[8];
        r.embedding_path = row[9];
        if (!base_dir.empty()) {
            if (r.cube_path.is_relative()) r.cube_path = base_dir / r.cube_path;
            if (r.embedding_path.is_relative()) r.embedding_path = base_dir / r.embedding_path;
        }
        samples.push_back(std::move(r));
    }
    return Dataset(std::move(samples));
}

Dataset read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("manifest is empty: " + path.string());
    const auto header = split_csv_line(line);
    if (header.size() != kManifestColumns.size() ||
        !std::equal(header.begin(), header.end(), kManifestColumns.begin())) {
        throw DataError("manifest header must be: sample_id,patient_id,label,age,sex,smoking,alcohol,betel,"
                        "cube_path,embedding_path");
    }
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    return validate_manifest(rows, path.parent_path());
}

void write_manifest(const std::filesystem::path& path, const std::vector<SampleRecord>& samples) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write manifest " + path.string());
    for (std::size_t i = 0; i < kManifestColumns.size(); ++i) {
        out << (i ? "," : "") << kManifestColumns[i];
    }
    out << '\n';
    auto flag = [](int v) { return v == kMissingFlag ? std::string() : std::to_string(v); };
    for (const auto& s : samples) {
        std::string age;
        if (!std::isnan(s.age)) {
            std::ostringstream a;
            a << s.age;
            age = a.str();
        }
        out << s.sample_id << ',' << s.patient_id << ',' << label_name(s.label) << ',' << age << ','
            << flag(s.sex) << ',' << flag(s.smoking) << ',' << flag(s.alcohol) << ',' << flag(s.betel) << ','
            << s.cube_path.generic_string() << ',' << s.embedding_path.generic_string() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Spectra

BandStatistics roi_band_statistics(const SpectralCube& cube) {
    BandStatistics stats;
    const double n = static_cast<double>(cube.pixels());
    for (std::size_t k = 0; k < kBands; ++k) {
        const auto band = cube.band(k);
        double sum = 0.0;
        for (float v : band) sum += v;
        const double mean = sum / n;
        double ss = 0.0;
        for (float v : band) ss += (v - mean) * (v - mean);
        stats.mean.values[k] = mean;
        stats.stddev.values[k] = std::sqrt(ss / n);
    }
    return stats;
}

Spectrum roi_mean_spectrum(const SpectralCube& cube) { return roi_band_statistics(cube).mean; }

double reflectance_at(const Spectrum& spectrum, double wavelength_nm) {
    if (!(wavelength_nm >= kFirstWavelength && wavelength_nm <= kLastWavelength)) {
        throw std::out_of_range("wavelength " + std::to_string(wavelength_nm) + " nm outside [400, 700]");
    }
    const double pos = (wavelength_nm - kFirstWavelength) / kBandStep;
    const auto k = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(k);
    if (k >= kBands - 1 || frac == 0.0) return spectrum.values[std::min(k, kBands - 1)];
    return spectrum.values[k] + frac * (spectrum.values[k + 1] - spectrum.values[k]);
}

const std::array<double, kBands>& luminance_weights() {
    static const std::array<double, kBands> weights = [] {
        std::array<double, kBands> w{};
        double total = 0.0;
        for (std::size_t k = 0; k < kBands; ++k) {
            w[k] = std::max(0.0, 1.0 - std::abs(band_wavelength(k) - 550.0) / 100.0);
            total += w[k];
        }
        for (auto& v : w) v /= total;
        return w;
    }();
    return weights;
}

GrayImage luminance_raw(const SpectralCube& cube) {
    GrayImage img(cube.height(), cube.width());
    const auto& w = luminance_weights();
    for (std::size_t k = 0; k < kBands; ++k) {
        if (w[k] == 0.0) continue;
        const auto band = cube.band(k);
        for (std::size_t p = 0; p < band.size(); ++p) img.pixels[p] += w[k] * band[p];
    }
    return img;
}

GrayImage luminance_plane(const SpectralCube& cube) {
    GrayImage img = luminance_raw(cube);
    const auto [lo, hi] = std::minmax_element(img.pixels.begin(), img.pixels.end());
    const double min = *lo;
    const double range = *hi - *lo;
    if (!(range > 0.0)) {
        std::fill(img.pixels.begin(), img.pixels.end(), 0.5);
        return img;
    }
    for (auto& v : img.pixels) v = (v - min) / range;
    return img;
}

} // namespace oralstack
