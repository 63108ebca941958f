#pragma once

#include <array>
#include <span>
#include <vector>

#include "oralstack/matrix.hpp"

namespace oralstack {

// Monotone step function fitted by pool-adjacent-violators. Scores between
// breakpoints interpolate linearly; outside the fitted range the end values
// are held constant.
struct IsotonicMap {
    std::vector<double> breakpoints;  // strictly ascending scores
    std::vector<double> values;       // nondecreasing fitted values

    double operator()(double score) const;

    bool operator==(const IsotonicMap&) const = default;
};

// Squared-error isotonic fit for one class (targets in {0,1}). Points with
// equal scores are merged into one weighted point first.
IsotonicMap fit_isotonic(std::span<const double> scores, std::span<const double> targets);

// Weighted PAV on already-sorted values; returns the fitted sequence.
std::vector<double> pool_adjacent_violators(std::span<const double> values, std::span<const double> weights);

inline constexpr double kCalibrationFloor = 1e-6;

using ClassCalibrators = std::array<IsotonicMap, 4>;

// One-vs-rest isotonic map per class column.
ClassCalibrators fit_calibrators(const Matrix& probs, std::span<const int> labels);

// Applies each class map to its column, floors at 1e-6 and renormalizes rows.
Matrix calibrate(const Matrix& probs, const ClassCalibrators& maps);

} // namespace oralstack
