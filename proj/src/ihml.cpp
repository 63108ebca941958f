#include "oralstack/ihml.hpp"

#include <algorithm>
#include <cmath>

#include "oralstack/error.hpp"
#include "oralstack/random.hpp"
#include "oralstack/split.hpp"

namespace oralstack {

namespace {

constexpr std::array<std::string_view, 3> kTargetNames = {"base", "meta", "both"};

double accuracy_of(const Matrix& p, std::span<const int> labels) {
    const auto pred = argmax_rows(p);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == labels[i];
    return static_cast<double>(hit) / static_cast<double>(pred.size());
}

} // namespace

ConfidenceFeatures confidence_features(std::span<const double> p) {
    if (p.size() != kClasses) throw DataError("confidence features need a 4-class probability row");
    double total = 0.0;
    for (double v : p) {
        if (!(v >= -1e-6 && v <= 1.0 + 1e-6)) throw DataError("probability row has an entry outside [0, 1]");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-6) throw DataError("probability row does not sum to 1");

    std::array<double, kClasses> sorted{};
    std::copy(p.begin(), p.end(), sorted.begin());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    ConfidenceFeatures c;
    c.max_prob = sorted[0];
    c.margin = sorted[0] - sorted[1];
    for (double v : p) {
        if (v > 0.0) c.entropy -= v * std::log(v);
    }
    return c;
}

MetaFeatureVector assemble_meta_features(std::span<const std::span<const double>> rows) {
    if (rows.size() != 4) {
        throw DataError("meta features need exactly 4 model rows, got " + std::to_string(rows.size()));
    }
    MetaFeatureVector h{};
    std::size_t i = 0;
    for (const auto& row : rows) {
        const ConfidenceFeatures c = confidence_features(row);
        for (double v : row) h[i++] = v;
        h[i++] = c.max_prob;
        h[i++] = c.margin;
        h[i++] = c.entropy;
    }
    return h;
}

Matrix meta_feature_matrix(std::span<const ProbabilityMatrix> per_model) {
    if (per_model.size() != 4) throw DataError("meta features need exactly 4 probability matrices");
    const std::size_t n = per_model[0].rows();
    Matrix h(n, kMetaDim);
    for (std::size_t i = 0; i < n; ++i) {
        const std::array<std::span<const double>, 4> rows = {per_model[0].row(i), per_model[1].row(i),
                                                             per_model[2].row(i), per_model[3].row(i)};
        const MetaFeatureVector v = assemble_meta_features(rows);
        std::copy(v.begin(), v.end(), h.row(i).begin());
    }
    return h;
}

std::string_view smoothing_target_name(SmoothingTarget t) { return kTargetNames[static_cast<std::size_t>(t)]; }

SmoothingTarget parse_smoothing_target(std::string_view name) {
    for (std::size_t i = 0; i < kTargetNames.size(); ++i) {
        if (kTargetNames[i] == name) return static_cast<SmoothingTarget>(i);
    }
    throw ConfigError("unknown smoothing target '" + std::string(name) + "'");
}

void SmoothingConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("smoothing alpha must lie in [0, 1]");
    if (iterations < 0) throw ConfigError("smoothing iterations must be >= 0");
}

ProbabilityMatrix patient_smooth(const ProbabilityMatrix& p, std::span<const std::size_t> group_of_row,
                                 const SmoothingConfig& cfg) {
    cfg.validate();
    if (group_of_row.size() != p.rows()) throw DataError("smoothing: every sample needs a patient group");
    std::size_t n_groups = 0;
    for (std::size_t g : group_of_row) n_groups = std::max(n_groups, g + 1);

    ProbabilityMatrix cur = p;
    if (cfg.alpha == 0.0) return cur;
    Matrix mean(n_groups, p.cols());
    std::vector<double> count(n_groups, 0.0);
    for (std::size_t g : group_of_row) count[g] += 1.0;

    for (int t = 0; t < cfg.iterations; ++t) {
        std::fill(mean.data().begin(), mean.data().end(), 0.0);
        for (std::size_t i = 0; i < cur.rows(); ++i) {
            auto m = mean.row(group_of_row[i]);
            const auto r = cur.row(i);
            for (std::size_t c = 0; c < r.size(); ++c) m[c] += r[c];
        }
        for (std::size_t g = 0; g < n_groups; ++g) {
            if (count[g] == 0.0) continue;
            for (auto& v : mean.row(g)) v /= count[g];
        }
        for (std::size_t i = 0; i < cur.rows(); ++i) {
            const auto m = mean.row(group_of_row[i]);
            auto r = cur.row(i);
            for (std::size_t c = 0; c < r.size(); ++c) r[c] = (1.0 - cfg.alpha) * r[c] + cfg.alpha * m[c];
        }
    }
    return cur;
}

IhmlConfig IhmlConfig::defaults(std::uint64_t seed) {
    IhmlConfig cfg;
    for (std::size_t m = 0; m < 4; ++m) cfg.learners[m] = BaseLearnerConfig::defaults(kLearnerKinds[m], 0);
    cfg.meta.l2 = 1e-3;
    cfg.seed = seed;
    return cfg;
}

void IhmlConfig::validate() const {
    for (std::size_t m = 0; m < 4; ++m) {
        if (learners[m].kind != kLearnerKinds[m]) {
            throw ConfigError("learner slot " + std::to_string(m) + " must be " +
                              std::string(learner_name(kLearnerKinds[m])));
        }
        learners[m].validate();
    }
    smoothing.validate();
    if (inner_folds < 2) throw ConfigError("inner stacking folds must be >= 2");
    if (!(meta.l2 >= 0.0) || meta.max_iter < 1) throw ConfigError("invalid meta-classifier settings");
    if (groups.fused_dim() == 0) throw ConfigError("at least one feature group must be active");
}

IhmlModel train_ihml(std::span<const SampleFeatures> features, std::span<const int> labels,
                     std::span<const std::string> patient_ids, const IhmlConfig& cfg, IhmlTrainingReport* report) {
    cfg.validate();
    if (features.size() != labels.size() || features.size() != patient_ids.size()) {
        throw DataError("train_ihml: features, labels and patient ids differ in length");
    }
    require_two_classes(labels, "ihml");
    const PatientGroups groups = PatientGroups::from_ids(patient_ids);

    IhmlModel model;
    model.groups = cfg.groups;
    model.smoothing = cfg.smoothing;
    model.normalizer = fit_normalizer(features);
    const Matrix x = fuse_all(features, model.normalizer, cfg.groups);

    std::array<BaseLearnerConfig, 4> learner_cfgs = cfg.learners;
    for (std::size_t m = 0; m < 4; ++m) learner_cfgs[m].seed = derive_seed(cfg.seed, m + 1);
    const std::uint64_t split_seed = derive_seed(cfg.seed, 0x57ac);

    std::array<ProbabilityMatrix, 4> meta_inputs;
    for (std::size_t m = 0; m < 4; ++m) {
        const OofResult oof =
            oof_probabilities(x, labels, groups.group_of_row, learner_cfgs[m], cfg.inner_folds, split_seed);
        model.calibrators[m] = fit_calibrators(oof.probs, labels);
        meta_inputs[m] = calibrate(oof.probs, model.calibrators[m]);
        if (report) report->base_oof_accuracy[m] = accuracy_of(meta_inputs[m], labels);
        if (cfg.smoothing.smooths_base()) {
            meta_inputs[m] = patient_smooth(meta_inputs[m], groups.group_of_row, cfg.smoothing);
        }
    }

    const Matrix h = meta_feature_matrix(meta_inputs);
    model.meta = LogisticRegression::fit(h, labels, cfg.meta);
    if (report) report->meta_train_accuracy = accuracy_of(model.meta.predict_proba(h), labels);

    for (std::size_t m = 0; m < 4; ++m) model.base[m] = train_base_learner(x, labels, learner_cfgs[m]);
    return model;
}

IhmlPrediction predict_ihml(const IhmlModel& model, std::span<const SampleFeatures> features,
                            std::span<const std::string> patient_ids) {
    if (features.size() != patient_ids.size()) throw DataError("predict_ihml: features and patient ids differ");
    const PatientGroups groups = PatientGroups::from_ids(patient_ids);
    const Matrix x = fuse_all(features, model.normalizer, model.groups);

    IhmlPrediction out;
    std::array<ProbabilityMatrix, 4> meta_inputs;
    for (std::size_t m = 0; m < 4; ++m) {
        out.base[m] = calibrate(predict_proba(model.base[m], x), model.calibrators[m]);
        meta_inputs[m] = model.smoothing.smooths_base()
                             ? patient_smooth(out.base[m], groups.group_of_row, model.smoothing)
                             : out.base[m];
    }
    const Matrix h = meta_feature_matrix(meta_inputs);
    out.meta_logits = model.meta.logits(h);
    out.posteriors = out.meta_logits;
    softmax_rows(out.posteriors);
    if (model.smoothing.smooths_meta()) {
        out.posteriors = patient_smooth(out.posteriors, groups.group_of_row, model.smoothing);
    }
    out.labels = argmax_rows(out.posteriors);
    return out;
}

std::vector<int> argmax_rows(const Matrix& m) {
    std::vector<int> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto r = m.row(i);
        out[i] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
    }
    return out;
}

} // namespace oralstack
