#include "oralstack/evaluation.hpp"

#include <algorithm>
#include <set>

#include "oralstack/error.hpp"
#include "oralstack/split.hpp"

namespace oralstack {

namespace {

constexpr std::array<std::string_view, 5> kPresetNames = {"M1", "M2", "M3", "M4", "M5"};

std::vector<std::size_t> patients_of_rows(const PatientGroups& groups, std::span<const std::size_t> rows) {
    std::set<std::size_t> out;
    for (std::size_t r : rows) out.insert(groups.group_of_row[r]);
    return {out.begin(), out.end()};
}

template <typename T>
std::vector<T> pick(const std::vector<T>& v, std::span<const std::size_t> rows) {
    std::vector<T> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(v[r]);
    return out;
}

} // namespace

std::string_view preset_name(AblationPreset p) { return kPresetNames[static_cast<std::size_t>(p)]; }

AblationPreset parse_preset(std::string_view name) {
    for (std::size_t i = 0; i < kPresetNames.size(); ++i) {
        if (kPresetNames[i] == name) return static_cast<AblationPreset>(i);
    }
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

ModalityMask preset_groups(AblationPreset p) {
    ModalityMask m;
    m.set(Modality::deep);
    if (p >= AblationPreset::M2) m.set(Modality::demo);
    if (p >= AblationPreset::M3) m.set(Modality::hae);
    if (p >= AblationPreset::M4) m.set(Modality::tex);
    if (p >= AblationPreset::M5) m.set(Modality::spec);
    return m;
}

SplitPlan make_split_plan(const FeatureStore& store, const SplitSettings& settings, std::uint64_t seed) {
    const auto ids = store.patient_ids();
    const PatientGroups groups = PatientGroups::from_ids(ids);
    const auto labels = patient_majority_labels(groups, store.labels());
    const HoldoutSplit split = grouped_stratified_holdout(labels, settings.holdout_fraction, seed);
    assert_disjoint(split.holdout, split.development, "holdout split");

    std::vector<int> dev_labels;
    for (std::size_t p : split.development) dev_labels.push_back(labels[p]);
    const auto folds = grouped_stratified_kfold(dev_labels, settings.folds, seed);

    SplitPlan plan;
    plan.folds = settings.folds;
    for (std::size_t p : split.holdout) plan.holdout.push_back(groups.names[p]);
    for (std::size_t p : split.development) plan.development.push_back(groups.names[p]);
    plan.development_fold = folds;
    return plan;
}

std::vector<std::size_t> rows_of_patients(const FeatureStore& store, std::span<const std::string> patients) {
    const std::set<std::string> wanted(patients.begin(), patients.end());
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < store.size(); ++i) {
        if (wanted.count(store.records[i].patient_id)) rows.push_back(i);
    }
    return rows;
}

EvaluationRun train_and_evaluate(const FeatureStore& store, std::span<const std::size_t> train_rows,
                                 std::span<const std::size_t> test_rows, const IhmlConfig& cfg, std::string name) {
    const auto ids = store.patient_ids();
    const PatientGroups groups = PatientGroups::from_ids(ids);
    EvaluationRun run;
    run.name = std::move(name);
    run.train_rows.assign(train_rows.begin(), train_rows.end());
    run.test_rows.assign(test_rows.begin(), test_rows.end());
    const auto train_p = patients_of_rows(groups, train_rows);
    const auto test_p = patients_of_rows(groups, test_rows);
    run.train_patients = train_p.size();
    run.test_patients = test_p.size();
    run.patient_overlap = overlap_count(train_p, test_p);
    assert_disjoint(train_p, test_p, run.name);
    if (test_rows.empty()) throw DataError(run.name + ": evaluation split has no samples");

    const auto features = store.features();
    const auto labels = store.labels();
    const auto train_features = pick(features, train_rows);
    const auto train_labels = pick(labels, train_rows);
    const auto train_ids = pick(ids, train_rows);
    const auto test_features = pick(features, test_rows);
    const auto test_labels = pick(labels, test_rows);
    const auto test_ids = pick(ids, test_rows);

    const IhmlModel model = train_ihml(train_features, train_labels, train_ids, cfg, &run.training);
    const IhmlPrediction pred = predict_ihml(model, test_features, test_ids);
    for (std::size_t m = 0; m < 4; ++m) {
        run.scores.push_back({std::string(learner_name(kLearnerKinds[m])), compute_metrics(test_labels, pred.base[m])});
    }
    run.scores.push_back({"ihml", compute_metrics(test_labels, pred.posteriors)});
    return run;
}

CvReport run_cv(const FeatureStore& store, const IhmlConfig& cfg, const SplitSettings& settings, std::uint64_t seed) {
    CvReport report;
    report.plan = make_split_plan(store, settings, seed);
    const SplitPlan& plan = report.plan;
    for (std::size_t f = 0; f < plan.folds; ++f) {
        std::vector<std::string> train_p;
        std::vector<std::string> val_p;
        for (std::size_t i = 0; i < plan.development.size(); ++i) {
            (plan.development_fold[i] == static_cast<int>(f) ? val_p : train_p).push_back(plan.development[i]);
        }
        report.folds.push_back(train_and_evaluate(store, rows_of_patients(store, train_p),
                                                  rows_of_patients(store, val_p), cfg, "fold " + std::to_string(f)));
    }
    report.holdout = train_and_evaluate(store, rows_of_patients(store, plan.development),
                                        rows_of_patients(store, plan.holdout), cfg, "holdout");
    return report;
}

AblationRow run_ablation(const FeatureStore& store, AblationPreset preset, const IhmlConfig& cfg,
                         const SplitSettings& settings, std::uint64_t seed) {
    const ModalityMask groups = preset_groups(preset);
    for (std::size_t m = 0; m < kModalities; ++m) {
        const auto mod = static_cast<Modality>(m);
        if (groups.has(mod) && !store.present.has(mod)) {
            throw DataError("preset " + std::string(preset_name(preset)) + " needs modality " +
                            std::string(modality_name(mod)) + ", which the feature store lacks");
        }
    }
    const SplitPlan plan = make_split_plan(store, settings, seed);
    IhmlConfig run_cfg = cfg;
    run_cfg.groups = groups;
    const EvaluationRun run = train_and_evaluate(store, rows_of_patients(store, plan.development),
                                                 rows_of_patients(store, plan.holdout), run_cfg,
                                                 "ablation " + std::string(preset_name(preset)));
    return {preset, groups.fused_dim(), run.scores.back().metrics};
}

} // namespace oralstack
