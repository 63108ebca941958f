#include "oralstack/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

#include "oralstack/core.hpp"
#include "oralstack/error.hpp"

namespace oralstack {

namespace {

constexpr std::size_t K = kClasses;

struct Objective {
    const Matrix& x;
    std::span<const int> y;
    double l2;

    std::size_t dim() const { return K * x.cols() + K; }

    // Parameters: K*d weights (row-major by class), then K biases.
    double eval(const std::vector<double>& theta, std::vector<double>* grad) const {
        const std::size_t n = x.rows();
        const std::size_t d = x.cols();
        if (grad) std::fill(grad->begin(), grad->end(), 0.0);
        double loss = 0.0;
        std::array<double, K> z{};
        for (std::size_t i = 0; i < n; ++i) {
            const auto xi = x.row(i);
            for (std::size_t c = 0; c < K; ++c) {
                const double* w = &theta[c * d];
                double acc = theta[K * d + c];
                for (std::size_t j = 0; j < d; ++j) acc += w[j] * xi[j];
                z[c] = acc;
            }
            const double zmax = *std::max_element(z.begin(), z.end());
            double denom = 0.0;
            for (double v : z) denom += std::exp(v - zmax);
            const double lse = zmax + std::log(denom);
            loss += lse - z[static_cast<std::size_t>(y[i])];
            if (grad) {
                for (std::size_t c = 0; c < K; ++c) {
                    const double r = std::exp(z[c] - lse) - (y[i] == static_cast<int>(c) ? 1.0 : 0.0);
                    double* g = &(*grad)[c * d];
                    for (std::size_t j = 0; j < d; ++j) g[j] += r * xi[j];
                    (*grad)[K * d + c] += r;
                }
            }
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        loss *= inv_n;
        double penalty = 0.0;
        for (std::size_t j = 0; j < K * d; ++j) penalty += theta[j] * theta[j];
        loss += 0.5 * l2 * penalty;
        if (grad) {
            for (std::size_t j = 0; j < K * d; ++j) (*grad)[j] = (*grad)[j] * inv_n + l2 * theta[j];
            for (std::size_t c = 0; c < K; ++c) (*grad)[K * d + c] *= inv_n;
        }
        return loss;
    }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

void require_two_classes(std::span<const int> labels, const char* learner) {
    std::set<int> classes(labels.begin(), labels.end());
    if (classes.size() < 2) {
        throw DataError(std::string(learner) + ": training labels contain a single class");
    }
}

void softmax_rows(Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        const double zmax = *std::max_element(r.begin(), r.end());
        double total = 0.0;
        for (auto& v : r) {
            v = std::exp(v - zmax);
            total += v;
        }
        for (auto& v : r) v /= total;
    }
}

LogisticRegression::LogisticRegression(Matrix weights, std::vector<double> bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {}

LogisticRegression LogisticRegression::fit(const Matrix& x, std::span<const int> labels, const LogRegConfig& cfg,
                                           std::vector<double>* loss_trace) {
    if (x.rows() != labels.size()) throw DataError("logreg: feature rows and labels differ in length");
    require_two_classes(labels, "logreg");

    const Objective obj{x, labels, cfg.l2};
    const std::size_t p = obj.dim();
    std::vector<double> theta(p, 0.0);
    std::vector<double> grad(p);
    double loss = obj.eval(theta, &grad);
    if (loss_trace) loss_trace->assign(1, loss);

    std::deque<std::pair<std::vector<double>, std::vector<double>>> history;  // (s, y)
    std::vector<double> dir(p);
    std::vector<double> trial(p);
    std::vector<double> trial_grad(p);

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        if (std::sqrt(dot(grad, grad)) < cfg.grad_tol) break;

        // Two-loop recursion.
        dir = grad;
        std::vector<double> alpha(history.size());
        for (std::size_t h = history.size(); h-- > 0;) {
            const auto& [s, yv] = history[h];
            alpha[h] = dot(s, dir) / dot(yv, s);
            for (std::size_t j = 0; j < p; ++j) dir[j] -= alpha[h] * yv[j];
        }
        if (!history.empty()) {
            const auto& [s, yv] = history.back();
            const double gamma = dot(s, yv) / dot(yv, yv);
            for (auto& v : dir) v *= gamma;
        } else {
            const double gnorm = std::sqrt(dot(grad, grad));
            for (auto& v : dir) v /= std::max(1.0, gnorm);
        }
        for (std::size_t h = 0; h < history.size(); ++h) {
            const auto& [s, yv] = history[h];
            const double beta = dot(yv, dir) / dot(yv, s);
            for (std::size_t j = 0; j < p; ++j) dir[j] += s[j] * (alpha[h] - beta);
        }
        for (auto& v : dir) v = -v;

        double slope = dot(grad, dir);
        if (!(slope < 0.0)) {
            history.clear();
            for (std::size_t j = 0; j < p; ++j) dir[j] = -grad[j];
            slope = -dot(grad, grad);
        }

        double step = 1.0;
        double trial_loss = 0.0;
        bool accepted = false;
        while (step > 1e-14) {
            for (std::size_t j = 0; j < p; ++j) trial[j] = theta[j] + step * dir[j];
            trial_loss = obj.eval(trial, &trial_grad);
            if (trial_loss <= loss + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        if (trial_loss > loss) throw InvariantError("logreg objective increased during optimization");

        std::vector<double> s(p);
        std::vector<double> yv(p);
        for (std::size_t j = 0; j < p; ++j) {
            s[j] = trial[j] - theta[j];
            yv[j] = trial_grad[j] - grad[j];
        }
        theta.swap(trial);
        grad.swap(trial_grad);
        loss = trial_loss;
        if (loss_trace) loss_trace->push_back(loss);
        if (dot(s, yv) > 1e-12) {
            history.emplace_back(std::move(s), std::move(yv));
            if (history.size() > static_cast<std::size_t>(cfg.history)) history.pop_front();
        }
    }

    const std::size_t d = x.cols();
    Matrix w(K, d);
    std::copy(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(K * d), w.data().begin());
    std::vector<double> b(theta.begin() + static_cast<std::ptrdiff_t>(K * d), theta.end());
    return LogisticRegression(std::move(w), std::move(b));
}

Matrix LogisticRegression::logits(const Matrix& x) const {
    if (x.cols() != weights_.cols()) throw DataError("logreg: feature dimension mismatch");
    Matrix z(x.rows(), K);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto xi = x.row(i);
        for (std::size_t c = 0; c < K; ++c) {
            const auto w = weights_.row(c);
            double acc = bias_[c];
            for (std::size_t j = 0; j < xi.size(); ++j) acc += w[j] * xi[j];
            z(i, c) = acc;
        }
    }
    return z;
}

Matrix LogisticRegression::predict_proba(const Matrix& x) const {
    Matrix z = logits(x);
    softmax_rows(z);
    return z;
}

} // namespace oralstack
