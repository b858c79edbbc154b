#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nmp::train {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. One moment slot per parameter tensor; slots are
// created on the first step and must keep their sizes afterwards.
template <class T>
class Adam {
public:
    explicit Adam(const AdamConfig& cfg = {}) : mConfig(cfg) {}

    void step(const std::vector<std::span<T>>& params, const std::vector<std::span<const T>>& grads);

    std::size_t steps() const { return mStep; }
    const AdamConfig& config() const { return mConfig; }

private:
    AdamConfig mConfig;
    std::size_t mStep = 0;
    std::vector<std::vector<double>> mM;
    std::vector<std::vector<double>> mV;
};

extern template class Adam<float>;
extern template class Adam<double>;

} // namespace nmp::train
