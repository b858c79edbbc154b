#include "nn/layers.hpp"

#include <cmath>
#include <algorithm>
#include <limits>

#include "common/errors.hpp"

namespace nmp::nn {
namespace {

template <class T>
void checkChannelParams(const Tensor<T>& x, const Tensor<T>& p, const char* name)
{
    if (x.rank() != 4)
        throw ContractError("batch norm: input must be rank 4, got " + shapeString(x.dims()));
    if (p.size() != x.channels())
        throw ContractError(std::string("batch norm: ") + name + " has " + std::to_string(p.size())
                            + " entries for " + std::to_string(x.channels()) + " channels");
}

} // namespace

template <class T>
Tensor<T> batchNormInfer(const Tensor<T>& x, const BatchNormParams<T>& p)
{
    checkChannelParams(x, p.gamma, "gamma");
    checkChannelParams(x, p.beta, "beta");
    checkChannelParams(x, p.mean, "mean");
    checkChannelParams(x, p.var, "var");
    Tensor<T> y(x.dims());
    const std::size_t plane = x.frames() * x.bins();
    for (std::size_t c = 0; c < x.channels(); ++c) {
        if (p.var[c] < 0)
            throw ContractError("batch norm: negative variance in channel " + std::to_string(c));
        const T scale = T(double(p.gamma[c]) / std::sqrt(double(p.var[c]) + p.eps));
        const T shift = T(double(p.beta[c]) - double(p.mean[c]) * double(scale));
        for (std::size_t n = 0; n < x.batch(); ++n) {
            const T* src = x.data() + x.offset(n, c, 0, 0);
            T* dst = y.data() + y.offset(n, c, 0, 0);
            for (std::size_t i = 0; i < plane; ++i)
                dst[i] = src[i] * scale + shift;
        }
    }
    return y;
}

template <class T>
Tensor<T> batchNormTrain(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, double eps,
                         std::vector<double>& batchMean, std::vector<double>& batchVar)
{
    checkChannelParams(x, gamma, "gamma");
    checkChannelParams(x, beta, "beta");
    const std::size_t plane = x.frames() * x.bins();
    const double count = double(plane * x.batch());
    batchMean.assign(x.channels(), 0.0);
    batchVar.assign(x.channels(), 0.0);
    Tensor<T> y(x.dims());
    for (std::size_t c = 0; c < x.channels(); ++c) {
        double sum = 0.0;
        for (std::size_t n = 0; n < x.batch(); ++n) {
            const T* src = x.data() + x.offset(n, c, 0, 0);
            for (std::size_t i = 0; i < plane; ++i)
                sum += src[i];
        }
        const double mean = sum / count;
        double sq = 0.0;
        for (std::size_t n = 0; n < x.batch(); ++n) {
            const T* src = x.data() + x.offset(n, c, 0, 0);
            for (std::size_t i = 0; i < plane; ++i) {
                const double d = src[i] - mean;
                sq += d * d;
            }
        }
        const double var = sq / count;
        batchMean[c] = mean;
        batchVar[c] = var;
        const double scale = double(gamma[c]) / std::sqrt(var + eps);
        const double shift = double(beta[c]) - mean * scale;
        for (std::size_t n = 0; n < x.batch(); ++n) {
            const T* src = x.data() + x.offset(n, c, 0, 0);
            T* dst = y.data() + y.offset(n, c, 0, 0);
            for (std::size_t i = 0; i < plane; ++i)
                dst[i] = T(src[i] * scale + shift);
        }
    }
    return y;
}

template <class T>
void batchNormBackward(const Tensor<T>& x, const Tensor<T>& gamma, const std::vector<double>& mean,
                       const std::vector<double>& var, double eps, bool training, const Tensor<T>& gy, Tensor<T>& gx,
                       Tensor<T>& gGamma, Tensor<T>& gBeta)
{
    const std::size_t channels = x.channels();
    const std::size_t plane = x.frames() * x.bins();
    const double count = double(plane * x.batch());
    gx = Tensor<T>(x.dims());
    gGamma = Tensor<T>({channels});
    gBeta = Tensor<T>({channels});
    for (std::size_t c = 0; c < channels; ++c) {
        const double invStd = 1.0 / std::sqrt(var[c] + eps);
        double sumG = 0.0;
        double sumGX = 0.0;
        for (std::size_t n = 0; n < x.batch(); ++n) {
            const T* src = x.data() + x.offset(n, c, 0, 0);
            const T* g = gy.data() + gy.offset(n, c, 0, 0);
            for (std::size_t i = 0; i < plane; ++i) {
                sumG += g[i];
                sumGX += g[i] * ((src[i] - mean[c]) * invStd);
            }
        }
        gGamma[c] = T(sumGX);
        gBeta[c] = T(sumG);
        const double scale = double(gamma[c]) * invStd;
        const double meanG = sumG / count;
        const double meanGX = sumGX / count;
        for (std::size_t n = 0; n < x.batch(); ++n) {
            const T* src = x.data() + x.offset(n, c, 0, 0);
            const T* g = gy.data() + gy.offset(n, c, 0, 0);
            T* dst = gx.data() + gx.offset(n, c, 0, 0);
            if (training) {
                for (std::size_t i = 0; i < plane; ++i) {
                    const double xhat = (src[i] - mean[c]) * invStd;
                    dst[i] = T(scale * (g[i] - meanG - xhat * meanGX));
                }
            } else {
                for (std::size_t i = 0; i < plane; ++i)
                    dst[i] = T(scale * g[i]);
            }
        }
    }
}

template <class T>
Tensor<T> relu(const Tensor<T>& x)
{
    Tensor<T> y(x.dims());
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = x[i] > T(0) ? x[i] : T(0);
    return y;
}

template <class T>
T sigmoidScalar(T v)
{
    // Clamp so that 1 - s never rounds to exactly 0 or 1 in T.
    const T limit = std::is_same_v<T, float> ? T(15) : T(35);
    const T z = std::clamp(v, -limit, limit);
    return T(1) / (T(1) + std::exp(-z));
}

template <class T>
Tensor<T> sigmoid(const Tensor<T>& x)
{
    Tensor<T> y(x.dims());
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = sigmoidScalar(x[i]);
    return y;
}

template <class T>
Tensor<T> concatChannels(const Tensor<T>& a, const Tensor<T>& b)
{
    if (a.rank() != 4 || b.rank() != 4 || a.batch() != b.batch() || a.frames() != b.frames() || a.bins() != b.bins())
        throw ContractError("concat: incompatible shapes " + shapeString(a.dims()) + " and " + shapeString(b.dims()));
    Tensor<T> y({a.batch(), a.channels() + b.channels(), a.frames(), a.bins()});
    const std::size_t plane = a.frames() * a.bins();
    for (std::size_t n = 0; n < a.batch(); ++n) {
        std::copy_n(a.data() + a.offset(n, 0, 0, 0), a.channels() * plane, y.data() + y.offset(n, 0, 0, 0));
        std::copy_n(b.data() + b.offset(n, 0, 0, 0), b.channels() * plane, y.data() + y.offset(n, a.channels(), 0, 0));
    }
    return y;
}

#define NMP_INSTANTIATE_LAYERS(T)                                                                                    \
    template Tensor<T> batchNormInfer<T>(const Tensor<T>&, const BatchNormParams<T>&);                             \
    template Tensor<T> batchNormTrain<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, double,             \
                                         std::vector<double>&, std::vector<double>&);                              \
    template void batchNormBackward<T>(const Tensor<T>&, const Tensor<T>&, const std::vector<double>&,             \
                                       const std::vector<double>&, double, bool, const Tensor<T>&, Tensor<T>&,     \
                                       Tensor<T>&, Tensor<T>&);                                                    \
    template Tensor<T> relu<T>(const Tensor<T>&);                                                                  \
    template Tensor<T> sigmoid<T>(const Tensor<T>&);                                                               \
    template T sigmoidScalar<T>(T);                                                                                \
    template Tensor<T> concatChannels<T>(const Tensor<T>&, const Tensor<T>&);

NMP_INSTANTIATE_LAYERS(float)
NMP_INSTANTIATE_LAYERS(double)

} // namespace nmp::nn
