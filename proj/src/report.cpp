#include "oralstack/report.hpp"

#include <cstdio>
#include <set>
#include <sstream>

namespace oralstack {

namespace {

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
    return buf;
}

std::string exact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::set<std::string> patients_of(const FeatureStore& store, std::span<const std::size_t> rows) {
    std::set<std::string> out;
    for (auto r : rows) out.insert(store.records[r].patient_id);
    return out;
}

std::size_t intersection_size(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::size_t n = 0;
    for (const auto& p : a) n += b.count(p);
    return n;
}

} // namespace

ordered_json metrics_to_json(const MetricsReport& m) {
    ordered_json per_class = ordered_json::object();
    for (std::size_t c = 0; c < kClasses; ++c) {
        const auto& s = m.per_class[c];
        per_class[std::string(label_name(static_cast<Label>(c)))] =
            ordered_json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
    }
    ordered_json confusion = ordered_json::array();
    for (const auto& row : m.confusion) confusion.push_back(row);
    return ordered_json{{"macro_f1", m.macro_f1},   {"accuracy", m.accuracy},
                        {"pr_auc", m.pr_auc},       {"roc_auc", m.roc_auc},
                        {"confusion", confusion},   {"per_class", per_class}};
}

ordered_json evaluation_run_to_json(const EvaluationRun& run, const FeatureStore& store) {
    ordered_json models = ordered_json::array();
    for (const auto& s : run.scores) models.push_back(ordered_json{{"model", s.model}, {"metrics", metrics_to_json(s.metrics)}});
    ordered_json oof = ordered_json::object();
    for (std::size_t m = 0; m < kLearnerKinds.size(); ++m) {
        oof[std::string(learner_name(kLearnerKinds[m]))] = run.training.base_oof_accuracy[m];
    }
    const auto train = patients_of(store, run.train_rows);
    const auto test = patients_of(store, run.test_rows);
    return ordered_json{{"name", run.name},
                        {"train_samples", run.train_rows.size()},
                        {"test_samples", run.test_rows.size()},
                        {"train_patients", train.size()},
                        {"test_patients", test.size()},
                        {"patient_overlap", intersection_size(train, test)},
                        {"training", ordered_json{{"base_oof_accuracy", oof},
                                                  {"meta_train_accuracy", run.training.meta_train_accuracy}}},
                        {"models", models}};
}

ordered_json split_plan_to_json(const SplitPlan& plan) {
    ordered_json folds = ordered_json::array();
    for (std::size_t f = 0; f < plan.folds; ++f) {
        ordered_json ids = ordered_json::array();
        for (std::size_t i = 0; i < plan.development.size(); ++i) {
            if (plan.development_fold[i] == static_cast<int>(f)) ids.push_back(plan.development[i]);
        }
        folds.push_back(std::move(ids));
    }
    return ordered_json{{"holdout_patients", plan.holdout}, {"development_folds", folds}};
}

ordered_json leakage_audit(const CvReport& report, const FeatureStore& store) {
    const std::set<std::string> holdout(report.plan.holdout.begin(), report.plan.holdout.end());
    const std::set<std::string> development(report.plan.development.begin(), report.plan.development.end());
    ordered_json folds = ordered_json::array();
    std::size_t total = intersection_size(holdout, development);
    for (const auto& run : report.folds) {
        const std::size_t n = intersection_size(patients_of(store, run.train_rows), patients_of(store, run.test_rows));
        total += n;
        folds.push_back(ordered_json{{"fold", run.name}, {"train_test_patient_overlap", n}});
    }
    const std::size_t h = intersection_size(patients_of(store, report.holdout.train_rows),
                                            patients_of(store, report.holdout.test_rows));
    total += h;
    return ordered_json{{"holdout_development_overlap", intersection_size(holdout, development)},
                        {"holdout_run_overlap", h},
                        {"folds", folds},
                        {"total_overlap", total}};
}

ordered_json cv_report_to_json(const CvReport& report, const FeatureStore& store, const RunConfig& cfg) {
    ordered_json folds = ordered_json::array();
    for (const auto& run : report.folds) folds.push_back(evaluation_run_to_json(run, store));
    return ordered_json{{"command", "cv"},
                        {"seed", cfg.seed},
                        {"config", run_config_to_json(cfg)},
                        {"split", split_plan_to_json(report.plan)},
                        {"leakage_audit", leakage_audit(report, store)},
                        {"folds", folds},
                        {"holdout", evaluation_run_to_json(report.holdout, store)}};
}

ordered_json ablation_to_json(std::span<const AblationRow> rows, const RunConfig& cfg) {
    ordered_json out = ordered_json::array();
    for (const auto& r : rows) {
        out.push_back(ordered_json{{"preset", std::string(preset_name(r.preset))},
                                   {"groups", preset_groups(r.preset).to_string()},
                                   {"fused_dim", r.fused_dim},
                                   {"metrics", metrics_to_json(r.metrics)}});
    }
    return ordered_json{{"command", "ablate"}, {"seed", cfg.seed}, {"config", run_config_to_json(cfg)}, {"rows", out}};
}

std::string ablation_to_csv(std::span<const AblationRow> rows) {
    std::ostringstream out;
    out << "preset,groups,fused_dim,macro_f1,accuracy,pr_auc,auc_roc\n";
    for (const auto& r : rows) {
        out << preset_name(r.preset) << ",\"" << preset_groups(r.preset).to_string() << "\"," << r.fused_dim << ','
            << pct(r.metrics.macro_f1) << ',' << pct(r.metrics.accuracy) << ',' << pct(r.metrics.pr_auc) << ','
            << pct(r.metrics.roc_auc) << '\n';
    }
    return out.str();
}

std::vector<ModelScore> score_prediction(const IhmlPrediction& pred, std::span<const int> truth) {
    std::vector<ModelScore> scores;
    for (std::size_t m = 0; m < kLearnerKinds.size(); ++m) {
        scores.push_back({std::string(learner_name(kLearnerKinds[m])), compute_metrics(truth, pred.base[m])});
    }
    scores.push_back({"ihml", compute_metrics(truth, pred.posteriors)});
    return scores;
}

ordered_json evaluate_report_to_json(std::span<const ModelScore> scores, const RunConfig& cfg) {
    ordered_json models = ordered_json::array();
    for (const auto& s : scores) models.push_back(ordered_json{{"model", s.model}, {"metrics", metrics_to_json(s.metrics)}});
    return ordered_json{{"command", "evaluate"}, {"seed", cfg.seed}, {"config", run_config_to_json(cfg)}, {"models", models}};
}

std::string predictions_to_csv(const FeatureStore& store, const IhmlPrediction& pred) {
    std::ostringstream out;
    out << "sample_id,patient_id,p_healthy,p_benign,p_opmd,p_oca,label\n";
    for (std::size_t i = 0; i < store.size(); ++i) {
        out << store.records[i].sample_id << ',' << store.records[i].patient_id;
        for (std::size_t c = 0; c < kClasses; ++c) out << ',' << exact(pred.posteriors(i, c));
        out << ',' << label_name(static_cast<Label>(pred.labels[i])) << '\n';
    }
    return out.str();
}

std::string render_table(std::span<const ModelScore> scores) {
    std::ostringstream out;
    char line[128];
    std::snprintf(line, sizeof line, "%-12s %9s %9s %9s %9s\n", "Model", "Macro F1", "Accuracy", "PR-AUC", "AUC-ROC");
    out << line;
    for (const auto& s : scores) {
        std::snprintf(line, sizeof line, "%-12s %9s %9s %9s %9s\n", s.model.c_str(), pct(s.metrics.macro_f1).c_str(),
                      pct(s.metrics.accuracy).c_str(), pct(s.metrics.pr_auc).c_str(), pct(s.metrics.roc_auc).c_str());
        out << line;
    }
    return out.str();
}

} // namespace oralstack
