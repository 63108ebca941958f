#pragma once
// Texture descriptors on the luminance plane.
//
// TextureVector layout (58):
//   0-23   six GLCM statistics for offsets (0,1), (1,0), (1,1), (1,-1)
//   24-33  rotation-invariant uniform LBP histogram (P=8, R=1)
//   34-57  Gabor bank: (mean |response|, std) per filter, orientation-major

#include <array>
#include <cstddef>

#include "oralstack/core.hpp"

namespace oralstack {

inline constexpr std::size_t kGlcmLevels = 8;
inline constexpr std::size_t kTexDim = 58;
inline constexpr std::size_t kLbpBins = 10;
inline constexpr std::size_t kGaborDim = 24;

using GlcmMatrix = std::array<std::array<double, kGlcmLevels>, kGlcmLevels>;
using TextureVector = std::array<double, kTexDim>;

struct Offset {
    int drow;
    int dcol;
};

inline constexpr std::array<Offset, 4> kGlcmOffsets = {{{0, 1}, {1, 0}, {1, 1}, {1, -1}}};

// Symmetric, normalized co-occurrence matrix on 8 gray levels. Throws
// std::invalid_argument when the offset yields no pixel pair.
GlcmMatrix glcm(const GrayImage& gray, Offset offset);

struct GlcmStats {
    double contrast = 0.0;
    double dissimilarity = 0.0;
    double homogeneity = 0.0;
    double energy = 0.0;
    double correlation = 0.0;
    double entropy = 0.0;
};

GlcmStats glcm_stats(const GlcmMatrix& p);

// Bins 0-8: uniform patterns by number of set bits; bin 9: non-uniform.
// A neighbour sets its bit when it is >= the centre.
std::array<double, kLbpBins> lbp_riu2_hist(const GrayImage& gray);

struct GaborSpec {
    double theta_deg;
    double wavelength;
};

// Orientations {0, 45, 90, 135} x wavelengths {4, 8, 16} px, orientation-major.
const std::array<GaborSpec, 12>& gabor_bank();

// Real, zero-phase, DC-free kernel with sigma = wavelength / 2 and
// half-size ceil(2 sigma). Indexed [dy + half][dx + half].
GrayImage gabor_kernel(const GaborSpec& spec);

// Correlation with half-sample symmetric (reflect) padding.
GrayImage filter_reflect(const GrayImage& gray, const GrayImage& kernel);

std::array<double, kGaborDim> gabor_features(const GrayImage& gray);

TextureVector texture_features(const GrayImage& gray);

} // namespace oralstack
