#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "oralstack/core.hpp"
#include "oralstack/matrix.hpp"

namespace oralstack {

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

using ConfusionMatrix = std::array<std::array<std::size_t, kClasses>, kClasses>;  // [true][predicted]

struct MetricsReport {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double pr_auc = 0.0;   // macro one-vs-rest average precision
    double roc_auc = 0.0;  // macro one-vs-rest ROC AUC
    ConfusionMatrix confusion{};
    std::array<ClassScores, kClasses> per_class{};
};

// Mann-Whitney AUC with average ranks for ties. Returns 0.5 when either
// side is empty.
double roc_auc_binary(std::span<const double> scores, std::span<const std::uint8_t> positive);

// Sum over distinct thresholds (descending) of recall step x precision.
double average_precision_binary(std::span<const double> scores, std::span<const std::uint8_t> positive);

// Predictions are row argmax (lowest index on ties). Classes absent from
// the true labels are left out of every macro average. Throws DataError for
// rows off the simplex (1e-6).
MetricsReport compute_metrics(std::span<const int> truth, const Matrix& posteriors);

} // namespace oralstack
