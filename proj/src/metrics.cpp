#include "oralstack/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "oralstack/error.hpp"
#include "oralstack/learners.hpp"

namespace oralstack {

double roc_auc_binary(std::span<const double> scores, std::span<const std::uint8_t> positive) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum = 0.0;
    double n_pos = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
        for (std::size_t t = i; t < j; ++t) {
            if (positive[order[t]]) {
                rank_sum += avg_rank;
                n_pos += 1.0;
            }
        }
        i = j;
    }
    const double n_neg = static_cast<double>(n) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) return 0.5;
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double average_precision_binary(std::span<const double> scores, std::span<const std::uint8_t> positive) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const double total_pos = static_cast<double>(std::count_if(positive.begin(), positive.end(), [](std::uint8_t v) { return v != 0; }));
    if (total_pos == 0.0) return 0.0;

    double tp = 0.0;
    double fp = 0.0;
    double prev_recall = 0.0;
    double ap = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            (positive[order[j]] ? tp : fp) += 1.0;
            ++j;
        }
        const double recall = tp / total_pos;
        ap += (recall - prev_recall) * (tp / (tp + fp));
        prev_recall = recall;
        i = j;
    }
    return ap;
}

MetricsReport compute_metrics(std::span<const int> truth, const Matrix& posteriors) {
    if (truth.size() != posteriors.rows()) throw DataError("metrics: label and posterior counts differ");
    if (truth.empty()) throw DataError("metrics: no samples");
    if (posteriors.cols() != kClasses) throw DataError("metrics: posteriors must have 4 columns");
    if (!is_probability_matrix(posteriors, 1e-6)) throw DataError("metrics: posterior rows are not on the simplex");

    MetricsReport r;
    const std::size_t n = truth.size();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = posteriors.row(i);
        const auto pred = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        const auto t = static_cast<std::size_t>(truth[i]);
        if (t >= kClasses) throw DataError("metrics: label out of range");
        r.confusion[t][pred]++;
        correct += t == pred;
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(n);

    std::vector<double> scores(n);
    std::vector<std::uint8_t> pos(n);
    std::size_t present = 0;
    for (std::size_t c = 0; c < kClasses; ++c) {
        std::size_t tp = r.confusion[c][c];
        std::size_t support = 0;
        std::size_t predicted = 0;
        for (std::size_t k = 0; k < kClasses; ++k) {
            support += r.confusion[c][k];
            predicted += r.confusion[k][c];
        }
        ClassScores& cs = r.per_class[c];
        cs.support = support;
        cs.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
        cs.recall = support ? static_cast<double>(tp) / static_cast<double>(support) : 0.0;
        cs.f1 = (cs.precision + cs.recall) > 0.0 ? 2.0 * cs.precision * cs.recall / (cs.precision + cs.recall) : 0.0;
        if (support == 0) continue;

        ++present;
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = posteriors(i, c);
            pos[i] = truth[i] == static_cast<int>(c);
        }
        r.macro_f1 += cs.f1;
        r.roc_auc += roc_auc_binary(scores, pos);
        r.pr_auc += average_precision_binary(scores, pos);
    }
    r.macro_f1 /= static_cast<double>(present);
    r.roc_auc /= static_cast<double>(present);
    r.pr_auc /= static_cast<double>(present);
    return r;
}

} // namespace oralstack
