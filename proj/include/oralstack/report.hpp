#pragma once
// JSON / CSV / text renderings of evaluation results. JSON metrics are
// fractions in [0, 1]; text and CSV tables print them x100.

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "oralstack/evaluation.hpp"
#include "oralstack/run_config.hpp"

namespace oralstack {

using nlohmann::ordered_json;

ordered_json metrics_to_json(const MetricsReport& m);
ordered_json evaluation_run_to_json(const EvaluationRun& run, const FeatureStore& store);
ordered_json split_plan_to_json(const SplitPlan& plan);

// Patient-id intersection sizes for the holdout boundary and every fold.
ordered_json leakage_audit(const CvReport& report, const FeatureStore& store);

ordered_json cv_report_to_json(const CvReport& report, const FeatureStore& store, const RunConfig& cfg);
ordered_json ablation_to_json(std::span<const AblationRow> rows, const RunConfig& cfg);
std::string ablation_to_csv(std::span<const AblationRow> rows);

// Scores of the bundle on a labelled store: base analogues then ihml.
std::vector<ModelScore> score_prediction(const IhmlPrediction& pred, std::span<const int> truth);
ordered_json evaluate_report_to_json(std::span<const ModelScore> scores, const RunConfig& cfg);

// sample_id, patient_id, four posteriors, predicted label.
std::string predictions_to_csv(const FeatureStore& store, const IhmlPrediction& pred);

// Model | Macro F1 | Accuracy | PR-AUC | AUC-ROC, x100 with two decimals.
std::string render_table(std::span<const ModelScore> scores);

} // namespace oralstack
