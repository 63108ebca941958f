#include "oralstack/learners.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oralstack/error.hpp"
#include "oralstack/random.hpp"
#include "oralstack/split.hpp"

namespace oralstack {

namespace {
constexpr std::array<std::string_view, 4> kLearnerNames = {"logreg", "extra_trees", "gbdt_level", "gbdt_leaf"};
}

std::string_view learner_name(LearnerKind kind) { return kLearnerNames[static_cast<std::size_t>(kind)]; }

LearnerKind parse_learner(std::string_view name) {
    for (std::size_t i = 0; i < kLearnerNames.size(); ++i) {
        if (kLearnerNames[i] == name) return static_cast<LearnerKind>(i);
    }
    throw ConfigError("unknown learner '" + std::string(name) + "'");
}

BaseLearnerConfig BaseLearnerConfig::defaults(LearnerKind kind, std::uint64_t seed) {
    BaseLearnerConfig cfg;
    cfg.kind = kind;
    cfg.seed = seed;
    if (kind == LearnerKind::gbdt_leaf) {
        cfg.gbdt.policy = GrowPolicy::leaf_wise;
        cfg.gbdt.min_leaf = 5;
    }
    return cfg;
}

void BaseLearnerConfig::validate() const {
    auto fail = [&](const std::string& msg) {
        throw ConfigError(std::string(learner_name(kind)) + ": " + msg);
    };
    switch (kind) {
    case LearnerKind::logreg:
        if (!(logreg.l2 >= 0.0)) fail("l2 must be >= 0");
        if (logreg.max_iter < 1) fail("max_iter must be >= 1");
        break;
    case LearnerKind::extra_trees:
        if (extra_trees.n_trees < 1) fail("n_trees must be >= 1");
        if (extra_trees.min_leaf < 1) fail("min_leaf must be >= 1");
        if (extra_trees.max_features < 0) fail("max_features must be >= 0");
        break;
    case LearnerKind::gbdt_level:
    case LearnerKind::gbdt_leaf:
        if (gbdt.rounds < 0) fail("rounds must be >= 0");
        if (!(gbdt.learning_rate >= 0.0 && gbdt.learning_rate <= 1.0)) fail("learning_rate must lie in [0, 1]");
        if (gbdt.max_depth < 1) fail("depth must be >= 1");
        if (gbdt.max_leaves < 2) fail("max_leaves must be >= 2");
        if (!(gbdt.l2 >= 0.0)) fail("l2 must be >= 0");
        if (gbdt.min_leaf < 1) fail("min_leaf must be >= 1");
        if ((kind == LearnerKind::gbdt_leaf) != (gbdt.policy == GrowPolicy::leaf_wise)) {
            fail("grow policy does not match learner kind");
        }
        break;
    }
}

BaseModel train_base_learner(const Matrix& x, std::span<const int> labels, const BaseLearnerConfig& cfg) {
    cfg.validate();
    switch (cfg.kind) {
    case LearnerKind::logreg:
        return LogisticRegression::fit(x, labels, cfg.logreg);
    case LearnerKind::extra_trees:
        return ExtraTrees::fit(x, labels, cfg.extra_trees, cfg.seed);
    case LearnerKind::gbdt_level:
    case LearnerKind::gbdt_leaf:
        return Gbdt::fit(x, labels, cfg.gbdt);
    }
    throw InvariantError("unhandled learner kind");
}

ProbabilityMatrix predict_proba(const BaseModel& model, const Matrix& x) {
    return std::visit([&](const auto& m) { return m.predict_proba(x); }, model);
}

OofResult oof_probabilities(const Matrix& x, std::span<const int> labels, std::span<const std::size_t> group_of_row,
                            const BaseLearnerConfig& cfg, std::size_t k, std::uint64_t split_seed) {
    if (x.rows() != labels.size() || x.rows() != group_of_row.size()) {
        throw DataError("oof: features, labels and groups differ in length");
    }
    std::size_t n_groups = 0;
    for (std::size_t g : group_of_row) n_groups = std::max(n_groups, g + 1);
    if (n_groups < k) {
        throw DataError("oof: " + std::to_string(n_groups) + " patients is fewer than " + std::to_string(k) + " folds");
    }

    PatientGroups groups;
    groups.rows.resize(n_groups);
    groups.names.resize(n_groups);
    groups.group_of_row.assign(group_of_row.begin(), group_of_row.end());
    for (std::size_t i = 0; i < group_of_row.size(); ++i) groups.rows[group_of_row[i]].push_back(i);
    const auto patient_labels = patient_majority_labels(groups, labels);
    const auto patient_fold = grouped_stratified_kfold(patient_labels, k, split_seed);

    OofResult out;
    out.probs = Matrix(x.rows(), kClasses);
    out.fold_of_row.resize(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out.fold_of_row[i] = patient_fold[group_of_row[i]];
    out.train_rows.resize(k);

    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> train;
        std::vector<std::size_t> test;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            (out.fold_of_row[i] == static_cast<int>(f) ? test : train).push_back(i);
        }
        std::vector<int> train_labels;
        train_labels.reserve(train.size());
        for (std::size_t i : train) train_labels.push_back(labels[i]);

        BaseLearnerConfig fold_cfg = cfg;
        fold_cfg.seed = derive_seed(cfg.seed, f);
        const BaseModel model = train_base_learner(x.select_rows(train), train_labels, fold_cfg);
        const Matrix p = predict_proba(model, x.select_rows(test));
        for (std::size_t t = 0; t < test.size(); ++t) {
            std::copy(p.row(t).begin(), p.row(t).end(), out.probs.row(test[t]).begin());
        }
        out.train_rows[f] = std::move(train);
    }
    return out;
}

bool is_probability_matrix(const Matrix& p, double tol) {
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double total = 0.0;
        for (double v : p.row(i)) {
            if (!(v >= -tol && v <= 1.0 + tol)) return false;
            total += v;
        }
        if (std::abs(total - 1.0) > tol) return false;
    }
    return true;
}

} // namespace oralstack
