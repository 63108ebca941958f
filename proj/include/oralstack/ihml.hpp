#pragma once
// Incremental heuristic meta-learner: calibrated base learners, confidence
// meta-features, patient-wise posterior smoothing and a multinomial
// logistic meta-classifier.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oralstack/fusion.hpp"
#include "oralstack/learners.hpp"

namespace oralstack {

struct ConfidenceFeatures {
    double max_prob = 0.0;
    double margin = 0.0;   // top-1 minus top-2
    double entropy = 0.0;  // nats, 0 ln 0 := 0
};

// Throws DataError when p is not on the 4-simplex within 1e-6.
ConfidenceFeatures confidence_features(std::span<const double> p);

inline constexpr std::size_t kMetaDim = 28;
using MetaFeatureVector = std::array<double, kMetaDim>;

// Model-major blocks: [p(4), max, margin, entropy] for each of 4 models.
MetaFeatureVector assemble_meta_features(std::span<const std::span<const double>> rows);

// Row-wise meta features from the four per-model probability matrices.
Matrix meta_feature_matrix(std::span<const ProbabilityMatrix> per_model);

enum class SmoothingTarget { base, meta, both };

std::string_view smoothing_target_name(SmoothingTarget t);
SmoothingTarget parse_smoothing_target(std::string_view name);

struct SmoothingConfig {
    double alpha = 0.3;
    int iterations = 3;
    SmoothingTarget target = SmoothingTarget::meta;

    bool smooths_base() const { return target != SmoothingTarget::meta; }
    bool smooths_meta() const { return target != SmoothingTarget::base; }
    void validate() const;
};

// T synchronous updates p_i <- (1 - alpha) p_i + alpha * mean of p over the
// rows of i's patient, the mean being recomputed from the current values.
ProbabilityMatrix patient_smooth(const ProbabilityMatrix& p, std::span<const std::size_t> group_of_row,
                                 const SmoothingConfig& cfg);

struct IhmlConfig {
    std::array<BaseLearnerConfig, 4> learners;
    LogRegConfig meta;
    SmoothingConfig smoothing;
    std::size_t inner_folds = 3;
    ModalityMask groups = ModalityMask::all();
    std::uint64_t seed = 0;

    static IhmlConfig defaults(std::uint64_t seed = 0);
    void validate() const;
};

struct IhmlModel {
    ModalityMask groups;
    ModalityNormalizer normalizer;
    std::array<BaseModel, 4> base;
    std::array<ClassCalibrators, 4> calibrators;
    LogisticRegression meta;
    SmoothingConfig smoothing;
};

struct IhmlTrainingReport {
    std::array<double, 4> base_oof_accuracy{};  // calibrated, before smoothing
    double meta_train_accuracy = 0.0;
};

// Seeds: learner m uses derive_seed(cfg.seed, m + 1); the inner grouped
// folds are shared by all four learners.
IhmlModel train_ihml(std::span<const SampleFeatures> features, std::span<const int> labels,
                     std::span<const std::string> patient_ids, const IhmlConfig& cfg,
                     IhmlTrainingReport* report = nullptr);

struct IhmlPrediction {
    ProbabilityMatrix posteriors;
    std::vector<int> labels;
    Matrix meta_logits;
    std::array<ProbabilityMatrix, 4> base;  // calibrated, unsmoothed
};

// Smoothing at test time groups rows by the given patient ids only.
IhmlPrediction predict_ihml(const IhmlModel& model, std::span<const SampleFeatures> features,
                            std::span<const std::string> patient_ids);

// Row argmax with lowest-index tie-break.
std::vector<int> argmax_rows(const Matrix& m);

} // namespace oralstack
