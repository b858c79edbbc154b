#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "model/nmp_model.hpp"
#include "train/adam.hpp"
#include "train/augment.hpp"
#include "train/labels.hpp"
#include "train/loss.hpp"
#include "train/synth.hpp"

namespace nmp::train {

struct TrainConfig {
    std::size_t steps = 1000;
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    double onset_pos_weight = 0.95;
    double onset_neg_weight = 0.05;
    bool augmentation = true;
    AugmentConfig augment;
    std::uint64_t seed = 0;
    std::size_t n_clips = 64;
    double mono_fraction = 0.5;
    int max_voices = 4;
    // Training examples are random crops of this many frames.
    std::size_t crop_frames = 64;
    std::size_t validation_clips = 16;
    model::ModelConfig model;

    void validate() const;
    LossWeights lossWeights() const;
};

// Network input and targets for a batch, stacked along the batch axis.
template <class T>
struct Batch {
    nn::Tensor<T> input;    // (N, C, frames, 264)
    nn::Tensor<T> onsets;   // (N, 1, frames, 88)
    nn::Tensor<T> notes;    // (N, 1, frames, 88)
    nn::Tensor<T> contours; // (N, 1, frames, 264)
};

// Loss of one forward pass; fills `grads` (one tensor per model parameter,
// zero for non-trainable ones) when non-null.
template <class T>
LossTerms forwardBackward(model::NmpModel<T>& model, const Batch<T>& batch, const LossWeights& w,
                          std::vector<nn::Tensor<T>>* grads, nn::BatchNormMode mode = nn::BatchNormMode::Training);

// Precomputed network input and targets for one clip.
struct Example {
    nn::Tensor<float> input; // (1, C, frames, 264)
    Targets targets;
};

Example makeExample(const SynthClip& clip, bool harmonicStacking);

struct LossRecord {
    std::size_t step = 0;
    LossTerms terms;
};

class ToyTrainer {
public:
    explicit ToyTrainer(const TrainConfig& cfg);

    // Random crops drawn from the training examples.
    Batch<float> sampleBatch(Rng& rng) const;
    // One Adam update on `batch`; returns the loss before the update.
    LossTerms step(const Batch<float>& batch);
    // Loss on `batch` with batch statistics, leaving the model untouched.
    LossTerms evaluate(const Batch<float>& batch) const;

    model::NmpModel<float>& model() { return mModel; }
    const TrainConfig& config() const { return mConfig; }
    std::size_t exampleCount() const { return mExamples.size(); }

private:
    TrainConfig mConfig;
    model::NmpModel<float> mModel;
    Adam<float> mAdam;
    std::vector<Example> mExamples;
};

struct TrainResult {
    explicit TrainResult(model::NmpModel<float> m) : model(std::move(m)) {}

    model::NmpModel<float> model;
    std::vector<LossRecord> log;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    double note_threshold = 0.5;
    double validation_fno = 0.0;
    double elapsed_s = 0.0;
};

// Full desk-scale run: synthesise clips, train, then tune the note threshold
// on separately seeded validation clips.
TrainResult trainToy(const TrainConfig& cfg, const std::function<void(const LossRecord&)>& progress = {});

// Clips used for threshold tuning and held-out evaluation.
std::vector<SynthClip> validationClips(std::uint64_t seed, std::size_t n);

std::string formatLossLog(const std::vector<LossRecord>& log);
nlohmann::json trainSidecar(const TrainConfig& cfg, const TrainResult& result);

extern template LossTerms forwardBackward<float>(model::NmpModel<float>&, const Batch<float>&, const LossWeights&,
                                                 std::vector<nn::Tensor<float>>*, nn::BatchNormMode);
extern template LossTerms forwardBackward<double>(model::NmpModel<double>&, const Batch<double>&,
                                                  const LossWeights&, std::vector<nn::Tensor<double>>*,
                                                  nn::BatchNormMode);

} // namespace nmp::train
