#include "oralstack/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oralstack/error.hpp"
#include "oralstack/logreg.hpp"
#include "oralstack/parallel.hpp"
#include "oralstack/random.hpp"

namespace oralstack {

namespace {

void check_training_input(const Matrix& x, std::span<const int> labels, const char* learner) {
    if (x.rows() == 0) throw DataError(std::string(learner) + ": empty training set");
    if (x.rows() != labels.size()) throw DataError(std::string(learner) + ": feature rows and labels differ");
    for (int y : labels) {
        if (y < 0 || y >= static_cast<int>(kClasses)) throw DataError(std::string(learner) + ": label out of range");
    }
}

double gini(const ClassDistribution& counts, double n) {
    if (n <= 0.0) return 0.0;
    double s = 0.0;
    for (double c : counts) s += (c / n) * (c / n);
    return 1.0 - s;
}

// ---------------------------------------------------------------------------
// Extra trees

ClassTree grow_extra_tree(const Matrix& x, std::span<const int> labels, const ExtraTreesConfig& cfg,
                          std::size_t max_features, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t d = x.cols();
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);

    ClassTree tree;
    struct Pending {
        int node;
        std::vector<std::size_t> rows;
    };
    std::vector<Pending> stack;
    std::vector<std::size_t> all(x.rows());
    std::iota(all.begin(), all.end(), 0);
    tree.nodes.emplace_back();
    stack.push_back({0, std::move(all)});

    const auto min_leaf = static_cast<std::size_t>(std::max(cfg.min_leaf, 1));
    while (!stack.empty()) {
        Pending job = std::move(stack.back());
        stack.pop_back();
        ClassDistribution counts{};
        for (std::size_t r : job.rows) counts[static_cast<std::size_t>(labels[r])] += 1.0;
        const double n = static_cast<double>(job.rows.size());
        ClassDistribution dist{};
        for (std::size_t c = 0; c < kClasses; ++c) dist[c] = counts[c] / n;
        tree.nodes[static_cast<std::size_t>(job.node)].dist = dist;

        const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
        if (pure || job.rows.size() < 2 * min_leaf) continue;

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_score = std::numeric_limits<double>::infinity();
        std::size_t tried = 0;
        for (std::size_t drawn = 0; drawn < d && tried < max_features; ++drawn) {
            std::swap(features[drawn], features[drawn + rng.below(d - drawn)]);
            const std::size_t f = features[drawn];
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (std::size_t r : job.rows) {
                lo = std::min(lo, x(r, f));
                hi = std::max(hi, x(r, f));
            }
            if (!(hi > lo)) continue;
            ++tried;
            const double threshold = rng.uniform(lo, hi);
            ClassDistribution left{};
            double nl = 0.0;
            for (std::size_t r : job.rows) {
                if (x(r, f) <= threshold) {
                    left[static_cast<std::size_t>(labels[r])] += 1.0;
                    nl += 1.0;
                }
            }
            const double nr = n - nl;
            if (nl < static_cast<double>(min_leaf) || nr < static_cast<double>(min_leaf)) continue;
            ClassDistribution right{};
            for (std::size_t c = 0; c < kClasses; ++c) right[c] = counts[c] - left[c];
            const double score = nl * gini(left, nl) + nr * gini(right, nr);
            if (score < best_score) {
                best_score = score;
                best_feature = static_cast<int>(f);
                best_threshold = threshold;
            }
        }
        if (best_feature < 0) continue;

        std::vector<std::size_t> left_rows;
        std::vector<std::size_t> right_rows;
        for (std::size_t r : job.rows) {
            (x(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? left_rows : right_rows).push_back(r);
        }
        const int left_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        auto& node = tree.nodes[static_cast<std::size_t>(job.node)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = left_id;
        node.right = left_id + 1;
        stack.push_back({left_id + 1, std::move(right_rows)});
        stack.push_back({left_id, std::move(left_rows)});
    }
    return tree;
}

// ---------------------------------------------------------------------------
// Exact-split regression trees over presorted feature orders.
//
// Every node owns the same [begin, end) segment in each feature's order
// array; splitting stably partitions that segment for every feature, so
// children stay sorted without re-sorting.

struct SortedColumns {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> values;        // column-major, d x n
    std::vector<std::uint32_t> order;  // per feature, rows sorted by value (ties by row)
    std::vector<double> sorted;        // values in `order` sequence

    explicit SortedColumns(const Matrix& x) : n(x.rows()), d(x.cols()), values(n * d), order(n * d), sorted(n * d) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t f = 0; f < d; ++f) values[f * n + i] = x(i, f);
        }
        for (std::size_t f = 0; f < d; ++f) {
            auto* o = &order[f * n];
            std::iota(o, o + n, 0u);
            const double* v = &values[f * n];
            std::stable_sort(o, o + n, [v](std::uint32_t a, std::uint32_t b) { return v[a] < v[b]; });
            for (std::size_t i = 0; i < n; ++i) sorted[f * n + i] = v[o[i]];
        }
    }
};

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

class RegTreeBuilder {
public:
    RegTreeBuilder(const SortedColumns& cols, const GbdtConfig& cfg)
        : cols_(cols), cfg_(cfg), perm_(cols.order), sorted_(cols.n * cols.d), gh_(cols.n), goes_left_(cols.n),
          scratch_(cols.n), scratch_values_(cols.n) {}

    RegTree build(std::span<const double> grad, std::span<const double> hess) {
        grad_ = grad;
        hess_ = hess;
        std::copy(cols_.order.begin(), cols_.order.end(), perm_.begin());
        std::copy(cols_.sorted.begin(), cols_.sorted.end(), sorted_.begin());
        for (std::size_t i = 0; i < cols_.n; ++i) gh_[i] = {grad[i], hess[i]};
        tree_ = RegTree{};
        segments_.clear();

        double g = 0.0;
        double h = 0.0;
        for (std::size_t i = 0; i < cols_.n; ++i) {
            g += grad[i];
            h += hess[i];
        }
        add_node(0, cols_.n, g, h);

        if (cfg_.policy == GrowPolicy::level_wise) {
            std::vector<int> level = {0};
            for (int depth = 0; depth < cfg_.max_depth && !level.empty(); ++depth) {
                std::vector<int> next;
                for (int id : level) {
                    const SplitCandidate best = find_split(id);
                    if (best.feature < 0) continue;
                    const auto [l, r] = apply_split(id, best);
                    next.push_back(l);
                    next.push_back(r);
                }
                level = std::move(next);
            }
        } else {
            std::vector<std::pair<int, SplitCandidate>> open = {{0, find_split(0)}};
            int leaves = 1;
            while (leaves < cfg_.max_leaves) {
                std::size_t pick = open.size();
                for (std::size_t i = 0; i < open.size(); ++i) {
                    if (open[i].second.feature < 0) continue;
                    if (pick == open.size() || open[i].second.gain > open[pick].second.gain) pick = i;
                }
                if (pick == open.size()) break;
                const auto [id, best] = open[pick];
                open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
                const auto [l, r] = apply_split(id, best);
                open.push_back({l, find_split(l)});
                open.push_back({r, find_split(r)});
                ++leaves;
            }
        }

        for (std::size_t i = 0; i < tree_.nodes.size(); ++i) {
            auto& node = tree_.nodes[i];
            if (node.feature >= 0) continue;
            const auto& seg = segments_[i];
            node.value = -cfg_.learning_rate * seg.g / (seg.h + cfg_.l2);
        }
        return std::move(tree_);
    }

private:
    struct Segment {
        std::size_t begin;
        std::size_t end;
        double g;
        double h;
    };

    int add_node(std::size_t begin, std::size_t end, double g, double h) {
        tree_.nodes.emplace_back();
        segments_.push_back({begin, end, g, h});
        return static_cast<int>(tree_.nodes.size() - 1);
    }

    double score(double g, double h) const { return g * g / (h + cfg_.l2); }

    SplitCandidate find_split(int id) const {
        const Segment seg = segments_[static_cast<std::size_t>(id)];
        const std::size_t count = seg.end - seg.begin;
        const auto min_leaf = static_cast<std::size_t>(std::max(cfg_.min_leaf, 1));
        SplitCandidate best;
        if (count < 2 * min_leaf) return best;
        const double parent = score(seg.g, seg.h);
        const double lambda = cfg_.l2;
        const std::size_t n = cols_.n;
        for (std::size_t f = 0; f < cols_.d; ++f) {
            const std::uint32_t* o = &perm_[f * n];
            const double* v = &sorted_[f * n];
            double gl = 0.0;
            double hl = 0.0;
            for (std::size_t i = seg.begin; i + 1 < seg.end; ++i) {
                const GradHess& gh = gh_[o[i]];
                gl += gh.g;
                hl += gh.h;
                const std::size_t nl = i + 1 - seg.begin;
                if (nl < min_leaf) continue;
                if (count - nl < min_leaf) break;
                const double a = v[i];
                const double b = v[i + 1];
                if (!(b > a)) continue;
                const double gr = seg.g - gl;
                const double dl = hl + lambda;
                const double dr = seg.h - hl + lambda;
                const double gain = (gl * gl * dr + gr * gr * dl) / (dl * dr) - parent;
                if (gain > best.gain + 1e-12) {
                    double mid = 0.5 * (a + b);
                    if (!(mid < b)) mid = a;
                    best = {gain, static_cast<int>(f), mid};
                }
            }
        }
        return best;
    }

    std::pair<int, int> apply_split(int id, const SplitCandidate& split) {
        const Segment seg = segments_[static_cast<std::size_t>(id)];
        const std::size_t n = cols_.n;
        const double* v = &cols_.values[static_cast<std::size_t>(split.feature) * n];
        double gl = 0.0;
        double hl = 0.0;
        std::size_t nl = 0;
        const std::uint32_t* key = &perm_[static_cast<std::size_t>(split.feature) * n];
        for (std::size_t i = seg.begin; i < seg.end; ++i) {
            const std::uint32_t row = key[i];
            const bool left = v[row] <= split.threshold;
            goes_left_[row] = left;
            if (left) {
                gl += grad_[row];
                hl += hess_[row];
                ++nl;
            }
        }
        for (std::size_t f = 0; f < cols_.d; ++f) {
            std::uint32_t* o = &perm_[f * n];
            double* v = &sorted_[f * n];
            std::size_t li = seg.begin;
            std::size_t ri = 0;
            for (std::size_t i = seg.begin; i < seg.end; ++i) {
                // Branch-free stable partition; li <= i, so o[i] is read before any overwrite.
                const std::uint32_t row = o[i];
                const double value = v[i];
                const std::size_t left = static_cast<std::size_t>(goes_left_[row]);
                o[li] = row;
                v[li] = value;
                scratch_[ri] = row;
                scratch_values_[ri] = value;
                li += left;
                ri += 1 - left;
            }
            std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(ri), o + li);
            std::copy(scratch_values_.begin(), scratch_values_.begin() + static_cast<std::ptrdiff_t>(ri), v + li);
        }
        const int l = add_node(seg.begin, seg.begin + nl, gl, hl);
        const int r = add_node(seg.begin + nl, seg.end, seg.g - gl, seg.h - hl);
        auto& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        return {l, r};
    }

    const SortedColumns& cols_;
    const GbdtConfig& cfg_;
    struct GradHess {
        double g;
        double h;
    };

    std::vector<std::uint32_t> perm_;
    std::vector<double> sorted_;  // feature values aligned with perm_
    std::vector<GradHess> gh_;
    std::vector<char> goes_left_;
    std::vector<std::uint32_t> scratch_;
    std::vector<double> scratch_values_;
    std::span<const double> grad_;
    std::span<const double> hess_;
    RegTree tree_;
    std::vector<Segment> segments_;
};

} // namespace

const ClassDistribution& ClassTree::leaf_for(std::span<const double> row) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].dist;
}

ExtraTrees ExtraTrees::fit(const Matrix& x, std::span<const int> labels, const ExtraTreesConfig& cfg,
                           std::uint64_t seed) {
    check_training_input(x, labels, "extra_trees");
    if (cfg.n_trees < 1) throw ConfigError("extra_trees: n_trees must be >= 1");
    const std::size_t max_features =
        cfg.max_features > 0 ? static_cast<std::size_t>(cfg.max_features)
                             : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));
    ExtraTrees model;
    model.trees.resize(static_cast<std::size_t>(cfg.n_trees));
    parallel_for(model.trees.size(), [&](std::size_t t) {
        model.trees[t] = grow_extra_tree(x, labels, cfg, max_features, derive_seed(seed, t));
    });
    return model;
}

Matrix ExtraTrees::predict_proba(const Matrix& x) const {
    Matrix out(x.rows(), kClasses);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto row = x.row(i);
        auto o = out.row(i);
        for (const auto& tree : trees) {
            const auto& dist = tree.leaf_for(row);
            for (std::size_t c = 0; c < kClasses; ++c) o[c] += dist[c];
        }
        double total = 0.0;
        for (double v : o) total += v;
        for (auto& v : o) v /= total;
    }
    return out;
}

double RegTree::predict(std::span<const double> row) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].value;
}

Gbdt Gbdt::fit(const Matrix& x, std::span<const int> labels, const GbdtConfig& cfg) {
    check_training_input(x, labels, "gbdt");
    require_two_classes(labels, "gbdt");
    if (cfg.rounds < 0) throw ConfigError("gbdt: rounds must be >= 0");

    const std::size_t n = x.rows();
    Gbdt model;
    ClassDistribution counts{};
    for (int y : labels) counts[static_cast<std::size_t>(y)] += 1.0;
    for (std::size_t c = 0; c < kClasses; ++c) {
        model.init[c] = std::log(std::max(counts[c] / static_cast<double>(n), 1e-12));
    }

    Matrix scores(n, kClasses);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < kClasses; ++c) scores(i, c) = model.init[c];
    }
    if (cfg.rounds == 0) return model;

    const SortedColumns cols(x);
    std::vector<RegTreeBuilder> builders;
    builders.reserve(kClasses);
    for (std::size_t c = 0; c < kClasses; ++c) builders.emplace_back(cols, cfg);
    std::array<std::vector<double>, kClasses> grad;
    std::array<std::vector<double>, kClasses> hess;
    for (std::size_t c = 0; c < kClasses; ++c) {
        grad[c].resize(n);
        hess[c].resize(n);
    }

    model.rounds.reserve(static_cast<std::size_t>(cfg.rounds));
    for (int round = 0; round < cfg.rounds; ++round) {
        Matrix p = scores;
        softmax_rows(p);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < kClasses; ++c) {
                const double target = labels[i] == static_cast<int>(c) ? 1.0 : 0.0;
                grad[c][i] = p(i, c) - target;
                hess[c][i] = p(i, c) * (1.0 - p(i, c));
            }
        }
        std::array<RegTree, kClasses> trees;
        parallel_for(kClasses, [&](std::size_t c) { trees[c] = builders[c].build(grad[c], hess[c]); });
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = x.row(i);
            for (std::size_t c = 0; c < kClasses; ++c) scores(i, c) += trees[c].predict(row);
        }
        model.rounds.push_back(std::move(trees));
    }
    return model;
}

Matrix Gbdt::raw_scores(const Matrix& x) const {
    Matrix out(x.rows(), kClasses);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto row = x.row(i);
        for (std::size_t c = 0; c < kClasses; ++c) {
            double s = init[c];
            for (const auto& trees : rounds) s += trees[c].predict(row);
            out(i, c) = s;
        }
    }
    return out;
}

Matrix Gbdt::predict_proba(const Matrix& x) const {
    Matrix p = raw_scores(x);
    softmax_rows(p);
    return p;
}

} // namespace oralstack
