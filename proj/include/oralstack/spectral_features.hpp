#pragma once
// Haemoglobin-sensitive biomarkers (46 slots) and spectral-shape
// descriptors (31 slots) computed from ROI band statistics.
//
// Haemoglobin vector layout:
//   0-8    ROI-mean reflectance at 520, 530, ..., 600 nm
//   9-17   per-band pixel standard deviation at the same bands
//   18-21  ratios R545/R575, R560/R600, R540/R575, R550/R570
//   22-25  normalized difference index of the same four pairs
//   26-28  differences R560-R600, R545-R575, R540-R580
//   29-42  least-squares slopes over 5-band windows starting at bands 0, 2, ..., 26
//   43-45  quadratic curvature, halfwidth 2, centred at 540, 570, 600 nm
//
// Spectral-shape vector layout:
//   0 max, 1 min, 2 argmax and 3 argmin as (lambda - 400) / 300,
//   4 peak-to-valley, 5 mean, 6 population std, 7 trapezoid area over the
//   normalized wavelength axis, 8 total variation,
//   9-21   central first differences at bands 2, 4, ..., 26 (per nm)
//   22-30  second differences / 100 at bands 3, 6, ..., 27 (per nm^2)

#include <array>
#include <cstddef>

#include "oralstack/core.hpp"

namespace oralstack {

inline constexpr std::size_t kHbDim = 46;
inline constexpr std::size_t kSpecDim = 31;

using HbFeatureVector = std::array<double, kHbDim>;
using SpectralShapeVector = std::array<double, kSpecDim>;

inline constexpr double kDenominatorFloor = 1e-12;

// Least-squares slope of reflectance against wavelength (per nm) over
// bands [start_band, start_band + length).
double window_slope(const Spectrum& spectrum, std::size_t start_band, std::size_t length);

// Quadratic coefficient (per nm^2) of the least-squares parabola over
// bands [center - halfwidth, center + halfwidth].
double window_curvature(const Spectrum& spectrum, std::size_t center_band, std::size_t halfwidth);

// (a - b) / (a + b), or 0 when a + b < 1e-12.
double normalized_difference(double a, double b);
// a / max(b, 1e-12).
double floored_ratio(double a, double b);

HbFeatureVector hb_features(const BandStatistics& stats);
HbFeatureVector hb_features(const SpectralCube& cube);

SpectralShapeVector spectral_shape_features(const Spectrum& spectrum);
SpectralShapeVector spectral_shape_features(const SpectralCube& cube);

} // namespace oralstack
