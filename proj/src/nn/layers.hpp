#pragma once

#include "nn/tensor.hpp"

namespace nmp::nn {

inline constexpr double kBatchNormEps = 1e-3;

enum class BatchNormMode { Inference, Training };

// Per-channel affine normalisation. In Training mode the batch statistics
// (over batch, frames and bins) are used and returned through `batchMean` /
// `batchVar` (biased).
template <class T>
struct BatchNormParams {
    const Tensor<T>& gamma;
    const Tensor<T>& beta;
    const Tensor<T>& mean;
    const Tensor<T>& var;
    double eps = kBatchNormEps;
};

template <class T>
Tensor<T> batchNormInfer(const Tensor<T>& x, const BatchNormParams<T>& p);

template <class T>
Tensor<T> batchNormTrain(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, double eps,
                         std::vector<double>& batchMean, std::vector<double>& batchVar);

// Gradients for either mode; `mean`/`var` are whichever statistics the
// forward pass normalised with. `training` adds the statistics' dependence on x.
template <class T>
void batchNormBackward(const Tensor<T>& x, const Tensor<T>& gamma, const std::vector<double>& mean,
                       const std::vector<double>& var, double eps, bool training, const Tensor<T>& gy, Tensor<T>& gx,
                       Tensor<T>& gGamma, Tensor<T>& gBeta);

template <class T>
Tensor<T> relu(const Tensor<T>& x);

// Saturation-safe logistic; results stay inside (0, 1) for finite input.
template <class T>
Tensor<T> sigmoid(const Tensor<T>& x);

template <class T>
T sigmoidScalar(T v);

template <class T>
Tensor<T> concatChannels(const Tensor<T>& a, const Tensor<T>& b);

} // namespace nmp::nn
