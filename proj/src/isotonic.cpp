#include "oralstack/isotonic.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace oralstack {

double IsotonicMap::operator()(double score) const {
    if (breakpoints.empty()) return score;
    if (score <= breakpoints.front()) return values.front();
    if (score >= breakpoints.back()) return values.back();
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), score);
    const std::size_t hi = static_cast<std::size_t>(it - breakpoints.begin());
    const std::size_t lo = hi - 1;
    const double t = (score - breakpoints[lo]) / (breakpoints[hi] - breakpoints[lo]);
    return values[lo] + t * (values[hi] - values[lo]);
}

std::vector<double> pool_adjacent_violators(std::span<const double> values, std::span<const double> weights) {
    struct Block {
        double sum;     // weighted sum
        double weight;
        std::size_t count;
    };
    std::vector<Block> blocks;
    blocks.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        blocks.push_back({values[i] * weights[i], weights[i], 1});
        while (blocks.size() > 1) {
            const Block& b = blocks.back();
            const Block& a = blocks[blocks.size() - 2];
            if (a.sum / a.weight <= b.sum / b.weight) break;
            Block merged{a.sum + b.sum, a.weight + b.weight, a.count + b.count};
            blocks.pop_back();
            blocks.back() = merged;
        }
    }
    std::vector<double> fitted;
    fitted.reserve(values.size());
    for (const Block& b : blocks) fitted.insert(fitted.end(), b.count, b.sum / b.weight);
    return fitted;
}

IsotonicMap fit_isotonic(std::span<const double> scores, std::span<const double> targets) {
    if (scores.size() != targets.size()) throw std::invalid_argument("isotonic: scores and targets differ in length");
    if (scores.empty()) throw std::invalid_argument("isotonic: no points");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    IsotonicMap map;
    std::vector<double> means;
    std::vector<double> weights;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) sum += targets[order[j++]];
        const double w = static_cast<double>(j - i);
        map.breakpoints.push_back(scores[order[i]]);
        means.push_back(sum / w);
        weights.push_back(w);
        i = j;
    }
    map.values = pool_adjacent_violators(means, weights);
    return map;
}

ClassCalibrators fit_calibrators(const Matrix& probs, std::span<const int> labels) {
    ClassCalibrators maps;
    std::vector<double> scores(probs.rows());
    std::vector<double> targets(probs.rows());
    for (std::size_t c = 0; c < 4; ++c) {
        for (std::size_t i = 0; i < probs.rows(); ++i) {
            scores[i] = probs(i, c);
            targets[i] = labels[i] == static_cast<int>(c) ? 1.0 : 0.0;
        }
        maps[c] = fit_isotonic(scores, targets);
    }
    return maps;
}

Matrix calibrate(const Matrix& probs, const ClassCalibrators& maps) {
    Matrix out(probs.rows(), probs.cols());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        double total = 0.0;
        for (std::size_t c = 0; c < probs.cols(); ++c) {
            out(i, c) = std::max(maps[c](probs(i, c)), kCalibrationFloor);
            total += out(i, c);
        }
        for (std::size_t c = 0; c < probs.cols(); ++c) out(i, c) /= total;
    }
    return out;
}

} // namespace oralstack
