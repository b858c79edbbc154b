#pragma once

#include <cstddef>

#include "nn/tensor.hpp"

namespace nmp::nn {

// Time stride is always 1. With freq_stride 1 the output keeps the input
// extent ("same" zero padding); with freq_stride 3 output bin j is centred on
// input bin 3j+1, giving ceil(bins/3) outputs.
struct ConvSpec {
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    std::size_t kernel_time = 1;
    std::size_t kernel_freq = 1;
    std::size_t freq_stride = 1;

    std::size_t outputBins(std::size_t inputBins) const
    {
        return (inputBins + freq_stride - 1) / freq_stride;
    }
    Shape weightShape() const { return {out_channels, in_channels, kernel_time, kernel_freq}; }
    std::size_t parameterCount() const { return out_channels * (in_channels * kernel_time * kernel_freq + 1); }
    void validate() const;
};

// Weights are (out, in, time, freq); bias is (out).
template <class T>
void conv2dForward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, const ConvSpec& spec, Tensor<T>& y);

// Accumulates nothing: gw and gb are overwritten. gx may be null when the
// input does not need a gradient; otherwise it is overwritten too.
template <class T>
void conv2dBackward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& gy, const ConvSpec& spec, Tensor<T>* gx,
                    Tensor<T>& gw, Tensor<T>& gb);

template <class T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, const ConvSpec& spec)
{
    Tensor<T> y;
    conv2dForward(x, w, b, spec, y);
    return y;
}

extern template void conv2dForward<float>(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                                          const ConvSpec&, Tensor<float>&);
extern template void conv2dForward<double>(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&,
                                           const ConvSpec&, Tensor<double>&);
extern template void conv2dBackward<float>(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                                           const ConvSpec&, Tensor<float>*, Tensor<float>&, Tensor<float>&);
extern template void conv2dBackward<double>(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&,
                                            const ConvSpec&, Tensor<double>*, Tensor<double>&, Tensor<double>&);

} // namespace nmp::nn
