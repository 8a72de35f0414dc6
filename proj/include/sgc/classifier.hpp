#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sgc/dense.hpp"

namespace sgc {

enum class Optimizer { GradientDescent, AdaptiveMoment, QuasiNewton };

std::string to_string(Optimizer opt);
Optimizer optimizer_from_string(const std::string& name);

struct TrainOptions {
    std::size_t max_epochs = 100;
    double learning_rate = 0.2;
    double weight_decay = 0.0;
    Optimizer optimizer = Optimizer::AdaptiveMoment;
    // Stop once |loss_prev - loss| <= convergence_tol * max(1, |loss_prev|).
    double convergence_tol = 1e-9;

    void validate() const;
};

struct ModelParams {
    DenseMatrix theta;  // d x C
    double weight_decay = 0.0;
    std::size_t epochs_run = 0;
    double final_loss = 0.0;
};

// Numerically stable softmax (max subtraction); output sums to 1.
std::vector<double> softmax(std::span<const double> logits);

struct LossGrad {
    double loss = 0.0;
    DenseMatrix grad;  // d x C
};

// Mean cross-entropy over the masked rows plus (weight_decay / 2) ||theta||_F^2;
// gradient is (1/|mask|) Xbar_mask^T (P - Y)_mask + weight_decay * theta.
LossGrad loss_and_gradient(const DenseMatrix& theta, const DenseMatrix& xbar,
                           const DenseMatrix& y_onehot, std::span<const std::size_t> mask,
                           double weight_decay);

// Full-batch training from theta = 0. The problem is convex, so the zero
// start makes the whole run deterministic without a seed.
// AdaptiveMoment: beta1 0.9, beta2 0.999, epsilon 1e-8, bias correction on.
// QuasiNewton: L-BFGS, history 10, strong Wolfe line search (c1 1e-4, c2 0.9).
// Throws DivergenceError if the loss leaves the finite range.
ModelParams train(const DenseMatrix& xbar, const DenseMatrix& y_onehot,
                  std::span<const std::size_t> train_mask, const TrainOptions& opts);

// Row-wise argmax of xbar * theta; ties break toward the lowest class index.
std::vector<int> predict(const DenseMatrix& theta, const DenseMatrix& xbar);

double accuracy(std::span<const int> pred, std::span<const int> truth,
                std::span<const std::size_t> mask);

// Micro-averaged F1 over classes (equals accuracy for single-label tasks).
double micro_f1(std::span<const int> pred, std::span<const int> truth,
                std::span<const std::size_t> mask);

DenseMatrix one_hot(std::span<const int> labels, std::size_t n_classes);

// Binary model file: magic "SGCM", u32 version, u64 d, u64 C (little endian),
// then d*C row-major doubles.
void save_model(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace sgc
