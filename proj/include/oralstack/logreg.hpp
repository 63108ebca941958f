#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "oralstack/matrix.hpp"

namespace oralstack {

struct LogRegConfig {
    double l2 = 1e-2;          // penalty (l2 / 2) * ||W||^2 on weights, not biases
    int max_iter = 300;
    double grad_tol = 1e-6;    // stop when ||gradient||_2 falls below
    int history = 10;          // L-BFGS memory
};

// Multinomial logistic regression over 4 classes.
class LogisticRegression {
public:
    LogisticRegression() = default;
    LogisticRegression(Matrix weights, std::vector<double> bias);

    // Mean cross-entropy plus L2, minimized from a zero start by L-BFGS with
    // an Armijo backtracking line search. If loss_trace is given it receives
    // the objective after every accepted step (starting with the initial
    // value); a step that increases the objective throws InvariantError.
    static LogisticRegression fit(const Matrix& x, std::span<const int> labels, const LogRegConfig& cfg,
                                  std::vector<double>* loss_trace = nullptr);

    Matrix logits(const Matrix& x) const;
    Matrix predict_proba(const Matrix& x) const;

    const Matrix& weights() const { return weights_; }  // classes x features
    const std::vector<double>& bias() const { return bias_; }

    bool operator==(const LogisticRegression&) const = default;

private:
    Matrix weights_;
    std::vector<double> bias_;
};

// Row-wise softmax with max subtraction.
void softmax_rows(Matrix& m);

// Throws DataError unless labels contain at least two distinct classes.
void require_two_classes(std::span<const int> labels, const char* learner);

} // namespace oralstack
