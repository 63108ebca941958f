#pragma once
// Patient-grouped evaluation workflows: holdout + K-fold development CV and
// the feature-group ablation presets.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oralstack/feature_store.hpp"
#include "oralstack/ihml.hpp"
#include "oralstack/metrics.hpp"

namespace oralstack {

// M1 deep; M2 +demo; M3 +hae; M4 +tex; M5 all.
enum class AblationPreset { M1, M2, M3, M4, M5 };

inline constexpr std::array<AblationPreset, 5> kAllPresets = {AblationPreset::M1, AblationPreset::M2,
                                                               AblationPreset::M3, AblationPreset::M4,
                                                               AblationPreset::M5};

std::string_view preset_name(AblationPreset p);
// Throws ConfigError("unknown preset ...").
AblationPreset parse_preset(std::string_view name);
ModalityMask preset_groups(AblationPreset p);

struct SplitSettings {
    double holdout_fraction = 0.15;
    std::size_t folds = 5;
};

struct SplitPlan {
    std::vector<std::string> holdout;       // patient ids
    std::vector<std::string> development;   // patient ids
    std::vector<int> development_fold;      // parallel to development
    std::size_t folds = 0;
};

SplitPlan make_split_plan(const FeatureStore& store, const SplitSettings& settings, std::uint64_t seed);

struct ModelScore {
    std::string model;  // learner name or "ihml"
    MetricsReport metrics;
};

struct EvaluationRun {
    std::string name;
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    std::size_t train_patients = 0;
    std::size_t test_patients = 0;
    std::size_t patient_overlap = 0;  // always 0; InvariantError otherwise
    std::vector<ModelScore> scores;   // four base analogues, then ihml
    IhmlTrainingReport training;
};

// Trains IHML on train_rows and scores the calibrated base analogues
// (unsmoothed) and IHML on test_rows.
EvaluationRun train_and_evaluate(const FeatureStore& store, std::span<const std::size_t> train_rows,
                                 std::span<const std::size_t> test_rows, const IhmlConfig& cfg, std::string name);

struct CvReport {
    SplitPlan plan;
    std::vector<EvaluationRun> folds;
    EvaluationRun holdout;
};

// Holdout split, then K-fold CV on the development patients and a final
// development -> holdout run.
CvReport run_cv(const FeatureStore& store, const IhmlConfig& cfg, const SplitSettings& settings, std::uint64_t seed);

struct AblationRow {
    AblationPreset preset = AblationPreset::M5;
    std::size_t fused_dim = 0;
    MetricsReport metrics;
};

AblationRow run_ablation(const FeatureStore& store, AblationPreset preset, const IhmlConfig& cfg,
                         const SplitSettings& settings, std::uint64_t seed);

// Row indices (ascending) of the samples whose patient is in `patients`.
std::vector<std::size_t> rows_of_patients(const FeatureStore& store, std::span<const std::string> patients);

} // namespace oralstack
