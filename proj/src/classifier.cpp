#include "sgc/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <limits>

#include "sgc/error.hpp"

namespace sgc {

std::string to_string(Optimizer opt) {
    switch (opt) {
        case Optimizer::GradientDescent: return "gd";
        case Optimizer::AdaptiveMoment: return "adam";
        case Optimizer::QuasiNewton: return "lbfgs";
    }
    throw ValueError("unknown optimizer");
}

Optimizer optimizer_from_string(const std::string& name) {
    if (name == "gd" || name == "gradient_descent") return Optimizer::GradientDescent;
    if (name == "adam") return Optimizer::AdaptiveMoment;
    if (name == "lbfgs") return Optimizer::QuasiNewton;
    throw ValueError("unknown optimizer: " + name);
}

void TrainOptions::validate() const {
    if (max_epochs < 1) throw ValueError("max_epochs must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ValueError("learning_rate must be > 0");
    if (weight_decay < 0.0 || !std::isfinite(weight_decay))
        throw ValueError("weight_decay must be >= 0");
    if (!(convergence_tol >= 0.0)) throw ValueError("convergence_tol must be >= 0");
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.size());
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : logits) hi = std::max(hi, v);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - hi);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

namespace {

void require_mask(std::span<const std::size_t> mask, std::size_t n_rows, const char* who) {
    if (mask.empty()) throw EmptyMaskError(std::string(who) + ": empty mask");
    for (std::size_t i : mask)
        if (i >= n_rows)
            throw IndexError(std::string(who) + ": mask index " + std::to_string(i) +
                             " out of range");
}

}  // namespace

LossGrad loss_and_gradient(const DenseMatrix& theta, const DenseMatrix& xbar,
                           const DenseMatrix& y_onehot, std::span<const std::size_t> mask,
                           double weight_decay) {
    const std::size_t d = xbar.n_cols;
    const std::size_t c = theta.n_cols;
    if (theta.n_rows != d)
        throw ShapeError("loss_and_gradient: theta rows " + std::to_string(theta.n_rows) +
                         " != feature dim " + std::to_string(d));
    if (y_onehot.n_rows != xbar.n_rows || y_onehot.n_cols != c)
        throw ShapeError("loss_and_gradient: label matrix shape mismatch");
    require_mask(mask, xbar.n_rows, "loss_and_gradient");

    LossGrad out;
    out.grad = DenseMatrix(d, c);
    std::vector<double> logits(c), probs(c);
    double ce_sum = 0.0;
    const double inv_m = 1.0 / static_cast<double>(mask.size());

    for (std::size_t row : mask) {
        const double* x = xbar.values.data() + row * d;
        // logits = x * theta
        for (std::size_t j = 0; j < c; ++j) logits[j] = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
            const double xa = x[a];
            if (xa == 0.0) continue;
            const double* trow = theta.values.data() + a * c;
            for (std::size_t j = 0; j < c; ++j) logits[j] += xa * trow[j];
        }
        double hi = -std::numeric_limits<double>::infinity();
        for (double v : logits) hi = std::max(hi, v);
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            probs[j] = std::exp(logits[j] - hi);
            sum += probs[j];
        }
        const double lse = hi + std::log(sum);
        const double* y = y_onehot.values.data() + row * c;
        for (std::size_t j = 0; j < c; ++j) {
            probs[j] /= sum;
            if (y[j] != 0.0) ce_sum += y[j] * (lse - logits[j]);
        }
        // grad += x^T (p - y), scaled later
        for (std::size_t a = 0; a < d; ++a) {
            const double xa = x[a];
            if (xa == 0.0) continue;
            double* grow = out.grad.values.data() + a * c;
            for (std::size_t j = 0; j < c; ++j) grow[j] += xa * (probs[j] - y[j]);
        }
    }

    double penalty = 0.0;
    for (double t : theta.values) penalty += t * t;
    out.loss = ce_sum * inv_m + 0.5 * weight_decay * penalty;
    for (std::size_t i = 0; i < out.grad.values.size(); ++i)
        out.grad.values[i] = out.grad.values[i] * inv_m + weight_decay * theta.values[i];
    return out;
}

namespace {

struct Objective {
    const DenseMatrix& xbar;
    const DenseMatrix& y;
    std::span<const std::size_t> mask;
    double weight_decay;

    LossGrad eval(const DenseMatrix& theta) const {
        LossGrad lg = loss_and_gradient(theta, xbar, y, mask, weight_decay);
        if (!std::isfinite(lg.loss))
            throw DivergenceError("training loss became non-finite (learning rate too high?)");
        return lg;
    }
};

bool converged(double prev, double cur, double tol) {
    return std::abs(prev - cur) <= tol * std::max(1.0, std::abs(prev));
}

double dot_all(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Strong-Wolfe line search (bracket + zoom with bisection), c1 = 1e-4,
// c2 = 0.9. Returns the accepted step and fills f/g at the new point.
struct LineSearchResult {
    bool ok = false;
    double alpha = 0.0;
    double f = 0.0;
    DenseMatrix grad;
};

LineSearchResult wolfe_line_search(const Objective& obj, const DenseMatrix& theta0,
                                   double f0, const std::vector<double>& g0,
                                   const std::vector<double>& direction,
                                   double alpha_init) {
    constexpr double c1 = 1e-4;
    constexpr double c2 = 0.9;
    const double dphi0 = dot_all(g0, direction);
    if (dphi0 >= 0.0) return {};

    auto phi = [&](double alpha, LossGrad& out) {
        DenseMatrix theta = theta0;
        for (std::size_t i = 0; i < theta.values.size(); ++i)
            theta.values[i] += alpha * direction[i];
        out = obj.eval(theta);
        return out.loss;
    };

    auto finish = [&](double alpha, LossGrad&& lg) {
        LineSearchResult r;
        r.ok = true;
        r.alpha = alpha;
        r.f = lg.loss;
        r.grad = std::move(lg.grad);
        return r;
    };

    auto zoom = [&](double lo, double f_lo, double hi) -> LineSearchResult {
        LineSearchResult fallback;  // best sufficient-decrease point seen
        for (int iter = 0; iter < 50; ++iter) {
            const double alpha = 0.5 * (lo + hi);
            LossGrad lg;
            const double f = phi(alpha, lg);
            if (f > f0 + c1 * alpha * dphi0 || f >= f_lo) {
                hi = alpha;
            } else {
                const double dphi = dot_all(lg.grad.values, direction);
                if (std::abs(dphi) <= -c2 * dphi0) return finish(alpha, std::move(lg));
                if (!fallback.ok || f < fallback.f) fallback = finish(alpha, std::move(lg));
                if (dphi * (hi - lo) >= 0.0) hi = lo;
                lo = alpha;
                f_lo = f;
            }
            if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
        }
        return fallback;
    };

    double alpha_prev = 0.0;
    double f_prev = f0;
    double alpha = alpha_init;
    for (int iter = 0; iter < 60; ++iter) {
        LossGrad lg;
        const double f = phi(alpha, lg);
        if (f > f0 + c1 * alpha * dphi0 || (iter > 0 && f >= f_prev))
            return zoom(alpha_prev, f_prev, alpha);
        const double dphi = dot_all(lg.grad.values, direction);
        if (std::abs(dphi) <= -c2 * dphi0) return finish(alpha, std::move(lg));
        if (dphi >= 0.0) return zoom(alpha, f, alpha_prev);
        alpha_prev = alpha;
        f_prev = f;
        alpha *= 2.0;
        if (alpha > 1e12) break;
    }
    return {};
}

ModelParams train_lbfgs(const Objective& obj, DenseMatrix theta, const TrainOptions& opts) {
    constexpr std::size_t history = 10;
    LossGrad cur = obj.eval(theta);
    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;

    std::size_t epochs = 0;
    for (; epochs < opts.max_epochs; ++epochs) {
        // two-loop recursion
        std::vector<double> direction = cur.grad.values;
        std::vector<double> alpha_coef(s_hist.size());
        for (std::size_t i = s_hist.size(); i-- > 0;) {
            alpha_coef[i] = rho_hist[i] * dot_all(s_hist[i], direction);
            for (std::size_t j = 0; j < direction.size(); ++j)
                direction[j] -= alpha_coef[i] * y_hist[i][j];
        }
        if (!s_hist.empty()) {
            const double yy = dot_all(y_hist.back(), y_hist.back());
            const double sy = dot_all(s_hist.back(), y_hist.back());
            if (yy > 0.0 && sy > 0.0) {
                const double scale = sy / yy;
                for (double& v : direction) v *= scale;
            }
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * dot_all(y_hist[i], direction);
            for (std::size_t j = 0; j < direction.size(); ++j)
                direction[j] += (alpha_coef[i] - beta) * s_hist[i][j];
        }
        for (double& v : direction) v = -v;

        double g_norm = 0.0;
        for (double v : cur.grad.values) g_norm = std::max(g_norm, std::abs(v));
        if (g_norm == 0.0) break;

        const double alpha_init =
            s_hist.empty() ? std::min(1.0, 1.0 / std::max(g_norm, 1e-12)) : 1.0;
        LineSearchResult ls =
            wolfe_line_search(obj, theta, cur.loss, cur.grad.values, direction, alpha_init);
        if (!ls.ok) {
            // try a steepest-descent fallback before giving up
            std::vector<double> steepest(cur.grad.values.size());
            for (std::size_t j = 0; j < steepest.size(); ++j) steepest[j] = -cur.grad.values[j];
            ls = wolfe_line_search(obj, theta, cur.loss, cur.grad.values, steepest,
                                   std::min(1.0, 1.0 / std::max(g_norm, 1e-12)));
            if (!ls.ok) break;  // no further progress possible: converged
            direction = std::move(steepest);
        }

        std::vector<double> s(theta.values.size()), y(theta.values.size());
        for (std::size_t j = 0; j < theta.values.size(); ++j) {
            s[j] = ls.alpha * direction[j];
            theta.values[j] += s[j];
            y[j] = ls.grad.values[j] - cur.grad.values[j];
        }
        const double sy = dot_all(s, y);
        if (sy > 1e-300) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        const double prev_loss = cur.loss;
        cur.loss = ls.f;
        cur.grad = std::move(ls.grad);
        if (converged(prev_loss, cur.loss, opts.convergence_tol)) {
            ++epochs;
            break;
        }
    }

    ModelParams params;
    params.theta = std::move(theta);
    params.weight_decay = opts.weight_decay;
    params.epochs_run = epochs;
    params.final_loss = cur.loss;
    return params;
}

ModelParams train_first_order(const Objective& obj, DenseMatrix theta,
                              const TrainOptions& opts) {
    const bool adam = opts.optimizer == Optimizer::AdaptiveMoment;
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;

    std::vector<double> m, v;
    if (adam) {
        m.assign(theta.values.size(), 0.0);
        v.assign(theta.values.size(), 0.0);
    }

    double prev_loss = std::numeric_limits<double>::infinity();
    std::size_t epochs = 0;
    for (std::size_t t = 0; t < opts.max_epochs; ++t) {
        const LossGrad lg = obj.eval(theta);
        if (t > 0 && converged(prev_loss, lg.loss, opts.convergence_tol)) break;
        prev_loss = lg.loss;

        if (adam) {
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t + 1));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t + 1));
            for (std::size_t i = 0; i < theta.values.size(); ++i) {
                const double g = lg.grad.values[i];
                m[i] = beta1 * m[i] + (1.0 - beta1) * g;
                v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
                theta.values[i] -=
                    opts.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
            }
        } else {
            for (std::size_t i = 0; i < theta.values.size(); ++i)
                theta.values[i] -= opts.learning_rate * lg.grad.values[i];
        }
        ++epochs;
    }

    ModelParams params;
    params.weight_decay = opts.weight_decay;
    params.epochs_run = epochs;
    params.final_loss = obj.eval(theta).loss;
    params.theta = std::move(theta);
    return params;
}

}  // namespace

ModelParams train(const DenseMatrix& xbar, const DenseMatrix& y_onehot,
                  std::span<const std::size_t> train_mask, const TrainOptions& opts) {
    opts.validate();
    if (y_onehot.n_rows != xbar.n_rows)
        throw ShapeError("train: features and labels disagree on row count");
    if (y_onehot.n_cols == 0) throw ShapeError("train: no classes");
    require_mask(train_mask, xbar.n_rows, "train");

    const Objective obj{xbar, y_onehot, train_mask, opts.weight_decay};
    DenseMatrix theta(xbar.n_cols, y_onehot.n_cols);  // zero start

    if (opts.optimizer == Optimizer::QuasiNewton)
        return train_lbfgs(obj, std::move(theta), opts);
    return train_first_order(obj, std::move(theta), opts);
}

std::vector<int> predict(const DenseMatrix& theta, const DenseMatrix& xbar) {
    if (theta.n_rows != xbar.n_cols)
        throw ShapeError("predict: theta rows " + std::to_string(theta.n_rows) +
                         " != feature dim " + std::to_string(xbar.n_cols));
    const std::size_t c = theta.n_cols;
    std::vector<int> labels(xbar.n_rows, 0);
    std::vector<double> logits(c);
    for (std::size_t row = 0; row < xbar.n_rows; ++row) {
        const double* x = xbar.values.data() + row * xbar.n_cols;
        std::fill(logits.begin(), logits.end(), 0.0);
        for (std::size_t a = 0; a < xbar.n_cols; ++a) {
            const double xa = x[a];
            if (xa == 0.0) continue;
            const double* trow = theta.values.data() + a * c;
            for (std::size_t j = 0; j < c; ++j) logits[j] += xa * trow[j];
        }
        std::size_t arg = 0;
        for (std::size_t j = 1; j < c; ++j)
            if (logits[j] > logits[arg]) arg = j;  // strict: ties keep the lowest index
        labels[row] = static_cast<int>(arg);
    }
    return labels;
}

double accuracy(std::span<const int> pred, std::span<const int> truth,
                std::span<const std::size_t> mask) {
    if (pred.size() != truth.size()) throw ShapeError("accuracy: length mismatch");
    require_mask(mask, pred.size(), "accuracy");
    std::size_t correct = 0;
    for (std::size_t i : mask)
        if (pred[i] == truth[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(mask.size());
}

double micro_f1(std::span<const int> pred, std::span<const int> truth,
                std::span<const std::size_t> mask) {
    if (pred.size() != truth.size()) throw ShapeError("micro_f1: length mismatch");
    require_mask(mask, pred.size(), "micro_f1");
    // pooled counts over classes
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (std::size_t i : mask) {
        if (pred[i] == truth[i]) {
            tp += 1.0;
        } else {
            fp += 1.0;  // predicted class gains a false positive
            fn += 1.0;  // true class gains a false negative
        }
    }
    const double denom = 2.0 * tp + fp + fn;
    return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

DenseMatrix one_hot(std::span<const int> labels, std::size_t n_classes) {
    DenseMatrix y(labels.size(), n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int label = labels[i];
        if (label < 0) continue;  // unlabeled
        if (static_cast<std::size_t>(label) >= n_classes)
            throw IndexError("one_hot: label " + std::to_string(label) + " out of range");
        y(i, static_cast<std::size_t>(label)) = 1.0;
    }
    return y;
}

namespace {

void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

std::uint32_t get_u32le(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

constexpr std::uint32_t kModelVersion = 1;

}  // namespace

void save_model(const ModelParams& params, const std::filesystem::path& path) {
    std::string blob;
    blob.reserve(20 + params.theta.values.size() * 8);
    blob += "SGCM";
    put_u32le(blob, kModelVersion);
    put_u64le(blob, params.theta.n_rows);
    put_u64le(blob, params.theta.n_cols);
    for (double v : params.theta.values) put_u64le(blob, std::bit_cast<std::uint64_t>(v));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw MissingFileError("cannot write " + path.string());
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw MissingFileError("short write to " + path.string());
}

ModelParams load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFileError("cannot open " + path.string());
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (blob.size() < 24 || blob.compare(0, 4, "SGCM") != 0)
        throw ParseError(path.string() + ": not a model file (bad magic)");
    const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
    const std::uint32_t version = get_u32le(p + 4);
    if (version != kModelVersion)
        throw ParseError(path.string() + ": unsupported model version " +
                         std::to_string(version));
    const std::uint64_t d = get_u64le(p + 8);
    const std::uint64_t c = get_u64le(p + 16);
    const std::uint64_t need = 24 + d * c * 8;
    if (blob.size() != need)
        throw ParseError(path.string() + ": truncated model payload");

    ModelParams params;
    params.theta = DenseMatrix(static_cast<std::size_t>(d), static_cast<std::size_t>(c));
    for (std::size_t i = 0; i < params.theta.values.size(); ++i)
        params.theta.values[i] = std::bit_cast<double>(get_u64le(p + 24 + i * 8));
    return params;
}

}  // namespace sgc
