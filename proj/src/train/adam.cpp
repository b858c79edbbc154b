#include "train/adam.hpp"

#include <cmath>

#include "common/errors.hpp"

namespace nmp::train {

template <class T>
void Adam<T>::step(const std::vector<std::span<T>>& params, const std::vector<std::span<const T>>& grads)
{
    if (params.size() != grads.size())
        throw ContractError("adam: parameter and gradient counts differ");
    if (mM.empty()) {
        for (const auto& p : params) {
            mM.emplace_back(p.size(), 0.0);
            mV.emplace_back(p.size(), 0.0);
        }
    }
    if (mM.size() != params.size())
        throw ContractError("adam: parameter count changed between steps");

    ++mStep;
    const double b1 = mConfig.beta1;
    const double b2 = mConfig.beta2;
    const double c1 = 1.0 - std::pow(b1, double(mStep));
    const double c2 = 1.0 - std::pow(b2, double(mStep));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i];
        auto g = grads[i];
        if (p.size() != mM[i].size() || g.size() != p.size())
            throw ContractError("adam: tensor size changed between steps");
        auto& m = mM[i];
        auto& v = mV[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double gj = double(g[j]);
            m[j] = b1 * m[j] + (1.0 - b1) * gj;
            v[j] = b2 * v[j] + (1.0 - b2) * gj * gj;
            const double mHat = m[j] / c1;
            const double vHat = v[j] / c2;
            p[j] = T(double(p[j]) - mConfig.learning_rate * mHat / (std::sqrt(vHat) + mConfig.eps));
        }
    }
}

template class Adam<float>;
template class Adam<double>;

} // namespace nmp::train
