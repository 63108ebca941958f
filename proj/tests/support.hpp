#pragma once
// Shared helpers and independent reference implementations for the tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <unistd.h>

#include "oralstack/matrix.hpp"
#include "oralstack/random.hpp"

namespace testing {

// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() /
               ("oralstack_" + name + "_" + std::to_string(static_cast<long>(::getpid())));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::vector<double> random_simplex(oralstack::Rng& rng, std::size_t k = 4) {
    std::vector<double> p(k);
    double sum = 0.0;
    for (auto& v : p) {
        v = -std::log(1.0 - rng.uniform());
        sum += v;
    }
    for (auto& v : p) v /= sum;
    return p;
}

// ---------------------------------------------------------------------------
// Brute-force metric definitions.

struct OracleMetrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double roc_auc = 0.0;
    double pr_auc = 0.0;
};

inline int oracle_argmax(const oralstack::Matrix& p, std::size_t i) {
    int best = 0;
    for (std::size_t c = 1; c < p.cols(); ++c) {
        if (p(i, c) > p(i, static_cast<std::size_t>(best))) best = static_cast<int>(c);
    }
    return best;
}

// Probability that a random positive outscores a random negative, ties 1/2.
inline double oracle_roc(const std::vector<double>& s, const std::vector<bool>& pos) {
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!pos[i]) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (pos[j]) continue;
            pairs += 1.0;
            if (s[i] > s[j]) wins += 1.0;
            if (s[i] == s[j]) wins += 0.5;
        }
    }
    return pairs > 0.0 ? wins / pairs : 0.5;
}

// Step-wise area: recompute precision and recall at every distinct threshold.
inline double oracle_ap(const std::vector<double>& s, const std::vector<bool>& pos) {
    std::vector<double> thresholds = s;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    const double total_pos = static_cast<double>(std::count(pos.begin(), pos.end(), true));
    if (total_pos == 0.0) return 0.0;
    double ap = 0.0;
    double prev_recall = 0.0;
    for (double t : thresholds) {
        double tp = 0.0;
        double predicted = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] >= t) {
                predicted += 1.0;
                tp += pos[i] ? 1.0 : 0.0;
            }
        }
        const double recall = tp / total_pos;
        ap += (recall - prev_recall) * (tp / predicted);
        prev_recall = recall;
    }
    return ap;
}

inline OracleMetrics oracle_metrics(const std::vector<int>& truth, const oralstack::Matrix& p) {
    OracleMetrics m;
    const std::size_t n = truth.size();
    for (std::size_t i = 0; i < n; ++i) m.accuracy += oracle_argmax(p, i) == truth[i] ? 1.0 : 0.0;
    m.accuracy /= static_cast<double>(n);
    double present = 0.0;
    for (int c = 0; c < static_cast<int>(p.cols()); ++c) {
        if (std::find(truth.begin(), truth.end(), c) == truth.end()) continue;
        present += 1.0;
        double tp = 0.0;
        double fp = 0.0;
        double fn = 0.0;
        std::vector<double> s(n);
        std::vector<bool> pos(n);
        for (std::size_t i = 0; i < n; ++i) {
            const int pred = oracle_argmax(p, i);
            tp += pred == c && truth[i] == c;
            fp += pred == c && truth[i] != c;
            fn += pred != c && truth[i] == c;
            s[i] = p(i, static_cast<std::size_t>(c));
            pos[i] = truth[i] == c;
        }
        m.macro_f1 += tp > 0.0 ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
        m.roc_auc += oracle_roc(s, pos);
        m.pr_auc += oracle_ap(s, pos);
    }
    m.macro_f1 /= present;
    m.roc_auc /= present;
    m.pr_auc /= present;
    return m;
}

// ---------------------------------------------------------------------------
// Monotone least squares by exhaustive search: try every way of cutting the
// distinct sorted scores into contiguous blocks, keep block means that are
// nondecreasing, return the fitted value of every input point for the
// lowest squared error.

inline std::vector<double> oracle_isotonic(const std::vector<double>& scores, const std::vector<double>& targets) {
    const std::size_t n = scores.size();
    std::vector<double> distinct = scores;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const std::size_t m = distinct.size();
    std::vector<double> sum(m, 0.0);
    std::vector<double> count(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto g = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), scores[i]) - distinct.begin());
        sum[g] += targets[i];
        count[g] += 1.0;
    }
    double best_sse = std::numeric_limits<double>::infinity();
    std::vector<double> best_group_value(m);
    for (std::uint32_t cuts = 0; cuts < (1u << (m - 1)); ++cuts) {
        std::vector<double> value(m);
        double prev = -std::numeric_limits<double>::infinity();
        bool monotone = true;
        std::size_t start = 0;
        for (std::size_t g = 0; g < m && monotone; ++g) {
            const bool cut_after = g + 1 == m || (cuts >> g & 1u);
            if (!cut_after) continue;
            double s = 0.0;
            double w = 0.0;
            for (std::size_t h = start; h <= g; ++h) {
                s += sum[h];
                w += count[h];
            }
            const double mean = s / w;
            if (mean < prev) monotone = false;
            prev = mean;
            for (std::size_t h = start; h <= g; ++h) value[h] = mean;
            start = g + 1;
        }
        if (!monotone) continue;
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto g = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), scores[i]) - distinct.begin());
            sse += (targets[i] - value[g]) * (targets[i] - value[g]);
        }
        if (sse < best_sse - 1e-15) {
            best_sse = sse;
            best_group_value = value;
        }
    }
    std::vector<double> fitted(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto g = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), scores[i]) - distinct.begin());
        fitted[i] = best_group_value[g];
    }
    return fitted;
}

} // namespace testing
