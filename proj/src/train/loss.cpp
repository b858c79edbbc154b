#include "train/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/errors.hpp"

namespace nmp::train {

template <class T>
double weightedBce(std::span<const T> pred, std::span<const T> target, double wPos, double wNeg, std::vector<T>* grad)
{
    if (pred.size() != target.size())
        throw ContractError("loss: prediction has " + std::to_string(pred.size()) + " elements, target "
                            + std::to_string(target.size()));
    if (pred.empty())
        return 0.0;
    const double n = double(pred.size());
    if (grad)
        grad->resize(pred.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = std::clamp(double(pred[i]), kProbabilityClamp, 1.0 - kProbabilityClamp);
        const double t = double(target[i]);
        sum -= wPos * t * std::log(p) + wNeg * (1.0 - t) * std::log1p(-p);
        if (grad)
            (*grad)[i] = T((-wPos * t / p + wNeg * (1.0 - t) / (1.0 - p)) / n);
    }
    return sum / n;
}

template <class T>
LossTerms totalLoss(std::span<const T> onsets, std::span<const T> notes, std::span<const T> contours,
                    std::span<const T> onsetTarget, std::span<const T> noteTarget, std::span<const T> contourTarget,
                    const LossWeights& w, LossGradients<T>* grads)
{
    LossTerms terms;
    terms.onset = weightedBce(onsets, onsetTarget, w.onset_pos, w.onset_neg, grads ? &grads->onsets : nullptr);
    terms.note = bce(notes, noteTarget, grads ? &grads->notes : nullptr);
    if (w.contour) {
        terms.contour = bce(contours, contourTarget, grads ? &grads->contours : nullptr);
    } else if (grads) {
        grads->contours.assign(contours.size(), T(0));
    }
    terms.total = terms.onset + terms.note + terms.contour;
    return terms;
}

template double weightedBce<float>(std::span<const float>, std::span<const float>, double, double,
                                   std::vector<float>*);
template double weightedBce<double>(std::span<const double>, std::span<const double>, double, double,
                                    std::vector<double>*);
template LossTerms totalLoss<float>(std::span<const float>, std::span<const float>, std::span<const float>,
                                    std::span<const float>, std::span<const float>, std::span<const float>,
                                    const LossWeights&, LossGradients<float>*);
template LossTerms totalLoss<double>(std::span<const double>, std::span<const double>, std::span<const double>,
                                     std::span<const double>, std::span<const double>, std::span<const double>,
                                     const LossWeights&, LossGradients<double>*);

} // namespace nmp::train
