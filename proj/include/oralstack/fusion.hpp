#pragma once
// Per-modality z-scoring and concatenation into the fused vector
// deep(768) | hae(46) | tex(58) | spec(31) | demo(5).

#include <array>
#include <bitset>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oralstack/matrix.hpp"

namespace oralstack {

enum class Modality : std::size_t { deep = 0, hae = 1, tex = 2, spec = 3, demo = 4 };

inline constexpr std::size_t kModalities = 5;
inline constexpr std::array<std::size_t, kModalities> kModalityDims = {768, 46, 58, 31, 5};
inline constexpr std::size_t kFusedDim = 908;
inline constexpr double kStdFloor = 1e-8;

std::string_view modality_name(Modality m);
Modality parse_modality(std::string_view name);

class ModalityMask {
public:
    ModalityMask() = default;
    static ModalityMask all() { return ModalityMask(0b11111); }
    static ModalityMask none() { return ModalityMask(0); }
    // Comma-separated modality names, e.g. "deep,demo".
    static ModalityMask parse(std::string_view list);

    bool has(Modality m) const { return bits_.test(static_cast<std::size_t>(m)); }
    ModalityMask& set(Modality m, bool on = true) {
        bits_.set(static_cast<std::size_t>(m), on);
        return *this;
    }
    unsigned long to_bits() const { return bits_.to_ulong(); }
    static ModalityMask from_bits(unsigned long b) { return ModalityMask(b); }
    std::string to_string() const;
    std::size_t fused_dim() const;

    bool operator==(const ModalityMask&) const = default;

private:
    explicit ModalityMask(unsigned long b) : bits_(b) {}
    std::bitset<kModalities> bits_;
};

// Raw, un-normalized modality vectors of one sample. An empty vector means
// the modality was not extracted. Demographics carry NaN / -1 sentinels.
struct SampleFeatures {
    std::array<std::vector<double>, kModalities> modalities;

    std::vector<double>& operator[](Modality m) { return modalities[static_cast<std::size_t>(m)]; }
    const std::vector<double>& operator[](Modality m) const { return modalities[static_cast<std::size_t>(m)]; }
};

struct ModalityStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};

// Training-set statistics; fitted once per outer split and reused.
struct ModalityNormalizer {
    std::array<std::optional<ModalityStats>, kModalities> stats;
    // age/100 median, then the mode of each binary field.
    std::array<double, 5> demo_impute{};

    const ModalityStats* get(Modality m) const {
        const auto& s = stats[static_cast<std::size_t>(m)];
        return s ? &*s : nullptr;
    }
};

// Throws DataError("modality dimension mismatch: <name>") if a present
// modality has the wrong length.
void check_modality_dims(const SampleFeatures& sample, ModalityMask required);

// Replaces demographic sentinels with the imputation values.
std::vector<double> impute_demographics(std::span<const double> demo, const std::array<double, 5>& impute);

ModalityNormalizer fit_normalizer(std::span<const SampleFeatures> train);

struct FusedVector {
    std::vector<double> values;
    ModalityMask mask;
};

FusedVector fuse(const SampleFeatures& sample, const ModalityNormalizer& normalizer, ModalityMask active);

// Fuses every sample into an N x mask.fused_dim() matrix.
Matrix fuse_all(std::span<const SampleFeatures> samples, const ModalityNormalizer& normalizer, ModalityMask active);

} // namespace oralstack
