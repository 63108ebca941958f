#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "oralstack/core.hpp"
#include "oralstack/matrix.hpp"

namespace oralstack {

using ClassDistribution = std::array<double, kClasses>;

struct ClassTreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    ClassDistribution dist{};  // class frequencies at the node

    bool operator==(const ClassTreeNode&) const = default;
};

struct ClassTree {
    std::vector<ClassTreeNode> nodes;
    const ClassDistribution& leaf_for(std::span<const double> row) const;
    bool operator==(const ClassTree&) const = default;
};

struct ExtraTreesConfig {
    int n_trees = 300;
    int min_leaf = 2;      // smallest admissible child
    int max_features = 0;  // 0 selects ceil(sqrt(d))
};

// Extremely randomized trees: one uniform threshold per sampled feature,
// best candidate by Gini decrease. Tree t draws from derive_seed(seed, t).
class ExtraTrees {
public:
    static ExtraTrees fit(const Matrix& x, std::span<const int> labels, const ExtraTreesConfig& cfg,
                          std::uint64_t seed);
    Matrix predict_proba(const Matrix& x) const;

    std::vector<ClassTree> trees;
    bool operator==(const ExtraTrees&) const = default;
};

struct RegTreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool operator==(const RegTreeNode&) const = default;
};

struct RegTree {
    std::vector<RegTreeNode> nodes;
    double predict(std::span<const double> row) const;
    bool operator==(const RegTree&) const = default;
};

enum class GrowPolicy { level_wise, leaf_wise };

struct GbdtConfig {
    GrowPolicy policy = GrowPolicy::level_wise;
    int rounds = 200;
    double learning_rate = 0.1;
    int max_depth = 3;    // level-wise
    int max_leaves = 31;  // leaf-wise
    double l2 = 1.0;      // leaf regularization
    int min_leaf = 1;
};

// Multiclass softmax boosting: per round one Newton regression tree per
// class on the cross-entropy gradient, exact split search over sorted
// feature values. Ties go to the lowest feature index, then the lowest
// threshold.
class Gbdt {
public:
    static Gbdt fit(const Matrix& x, std::span<const int> labels, const GbdtConfig& cfg);
    Matrix raw_scores(const Matrix& x) const;
    Matrix predict_proba(const Matrix& x) const;

    ClassDistribution init{};                      // log class priors
    std::vector<std::array<RegTree, kClasses>> rounds;
    bool operator==(const Gbdt&) const = default;
};

} // namespace oralstack
