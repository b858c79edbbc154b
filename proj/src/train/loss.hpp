#pragma once

#include <span>
#include <vector>

namespace nmp::train {

inline constexpr double kProbabilityClamp = 1e-7;

// Mean over elements of -[w_pos t log p + w_neg (1 - t) log(1 - p)], with p
// clamped to [1e-7, 1 - 1e-7]. If `grad` is non-null it receives dL/dp
// (evaluated at the clamped p) for every element.
template <class T>
double weightedBce(std::span<const T> pred, std::span<const T> target, double wPos, double wNeg,
                   std::vector<T>* grad = nullptr);

template <class T>
double bce(std::span<const T> pred, std::span<const T> target, std::vector<T>* grad = nullptr)
{
    return weightedBce(pred, target, 1.0, 1.0, grad);
}

struct LossWeights {
    double onset_pos = 0.95;
    double onset_neg = 0.05;
    bool contour = true; // false drops the Y_p term
};

struct LossTerms {
    double onset = 0.0;
    double note = 0.0;
    double contour = 0.0;
    double total = 0.0;
};

template <class T>
struct LossGradients {
    std::vector<T> onsets;
    std::vector<T> notes;
    std::vector<T> contours;
};

// bce(Y_p) + bce(Y_n) + weighted_bce(Y_o). Throws ContractError on size mismatch.
template <class T>
LossTerms totalLoss(std::span<const T> onsets, std::span<const T> notes, std::span<const T> contours,
                    std::span<const T> onsetTarget, std::span<const T> noteTarget, std::span<const T> contourTarget,
                    const LossWeights& w, LossGradients<T>* grads = nullptr);

} // namespace nmp::train
