#pragma once
// The four base learners behind one interface, plus out-of-fold
// probability generation for leak-free stacking.

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "oralstack/isotonic.hpp"
#include "oralstack/logreg.hpp"
#include "oralstack/matrix.hpp"
#include "oralstack/trees.hpp"

namespace oralstack {

// N x 4 rows on the probability simplex.
using ProbabilityMatrix = Matrix;

enum class LearnerKind { logreg, extra_trees, gbdt_level, gbdt_leaf };

inline constexpr std::array<LearnerKind, 4> kLearnerKinds = {LearnerKind::logreg, LearnerKind::extra_trees,
                                                              LearnerKind::gbdt_level, LearnerKind::gbdt_leaf};

std::string_view learner_name(LearnerKind kind);
LearnerKind parse_learner(std::string_view name);

struct BaseLearnerConfig {
    LearnerKind kind = LearnerKind::logreg;
    std::uint64_t seed = 0;
    LogRegConfig logreg;
    ExtraTreesConfig extra_trees;
    GbdtConfig gbdt;

    // Documented defaults for each kind (gbdt_leaf: min_leaf 5).
    static BaseLearnerConfig defaults(LearnerKind kind, std::uint64_t seed);
    // Throws ConfigError for out-of-range hyperparameters.
    void validate() const;
};

using BaseModel = std::variant<LogisticRegression, ExtraTrees, Gbdt>;

BaseModel train_base_learner(const Matrix& x, std::span<const int> labels, const BaseLearnerConfig& cfg);
ProbabilityMatrix predict_proba(const BaseModel& model, const Matrix& x);

struct OofResult {
    ProbabilityMatrix probs;
    std::vector<int> fold_of_row;
    // Training rows of each fold's model, for leakage audits.
    std::vector<std::vector<std::size_t>> train_rows;
};

// K-fold patient-grouped stratified split of the rows (group_of_row gives
// each row's patient); every row is predicted by the model that did not see
// its patient. The folds come from split_seed; fold model f trains with
// seed derive_seed(cfg.seed, f).
OofResult oof_probabilities(const Matrix& x, std::span<const int> labels, std::span<const std::size_t> group_of_row,
                            const BaseLearnerConfig& cfg, std::size_t k, std::uint64_t split_seed);

// Row-sum and range check with the given tolerance.
bool is_probability_matrix(const Matrix& p, double tol = 1e-9);

} // namespace oralstack
