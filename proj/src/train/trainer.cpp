#include "train/trainer.hpp"

#include <chrono>
#include <cstdio>

#include "common/errors.hpp"
#include "model/predict.hpp"
#include "spectral/cqt.hpp"
#include "tracking/tune.hpp"

namespace nmp::train {

void TrainConfig::validate() const
{
    if (batch_size == 0 || crop_frames == 0 || n_clips == 0)
        throw ContractError("train: batch size, crop length and clip count must be positive");
    if (!(learning_rate > 0.0))
        throw ContractError("train: learning rate must be positive");
    if (std::abs(onset_pos_weight + onset_neg_weight - 1.0) > 1e-9)
        throw ContractError("train: onset class weights must sum to 1");
    if (!(mono_fraction >= 0.0 && mono_fraction <= 1.0) || max_voices < 1)
        throw ContractError("train: invalid clip mix");
    model.validate();
}

LossWeights TrainConfig::lossWeights() const
{
    return {onset_pos_weight, onset_neg_weight, model.supervise_contour};
}

template <class T>
LossTerms forwardBackward(model::NmpModel<T>& model, const Batch<T>& batch, const LossWeights& w,
                          std::vector<nn::Tensor<T>>* grads, nn::BatchNormMode mode)
{
    nn::Graph<T> g(grads != nullptr);
    const auto input = g.input(batch.input);
    const auto out = model.forward(g, input, mode);
    const auto& yo = g.value(out.onsets);
    const auto& yn = g.value(out.notes);
    const auto& yp = g.value(out.contours);
    if (!yo.sameShape(batch.onsets) || !yn.sameShape(batch.notes) || !yp.sameShape(batch.contours))
        throw ContractError("train: target shapes do not match the model outputs");

    LossGradients<T> lg;
    const LossTerms terms = totalLoss<T>(yo.values(), yn.values(), yp.values(), batch.onsets.values(),
                                         batch.notes.values(), batch.contours.values(), w, grads ? &lg : nullptr);
    if (!grads)
        return terms;

    const nn::Tensor<T> go(yo.dims(), std::move(lg.onsets));
    const nn::Tensor<T> gn(yn.dims(), std::move(lg.notes));
    const nn::Tensor<T> gp(yp.dims(), std::move(lg.contours));
    const typename nn::Graph<T>::Seed seeds[] = {{out.onsets, &go}, {out.notes, &gn}, {out.contours, &gp}};
    g.backward(seeds);

    const auto& params = model.parameters();
    grads->clear();
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].trainable)
            grads->push_back(g.grad(out.parameterNodes[i]));
        else
            grads->emplace_back(params[i].value.dims());
    }
    return terms;
}

template LossTerms forwardBackward<float>(model::NmpModel<float>&, const Batch<float>&, const LossWeights&,
                                          std::vector<nn::Tensor<float>>*, nn::BatchNormMode);
template LossTerms forwardBackward<double>(model::NmpModel<double>&, const Batch<double>&, const LossWeights&,
                                           std::vector<nn::Tensor<double>>*, nn::BatchNormMode);

Example makeExample(const SynthClip& clip, bool harmonicStacking)
{
    const spectral::CqtMatrix c = spectral::cqt(clip.audio);
    Example ex;
    ex.input = model::stackWindow(c, 0, c.frames, harmonicStacking);
    ex.targets = rasterizeLabels(clip.notes, pitchesFromNotes(clip.notes, c.frames, c.frame_period), c.frames,
                                 c.frame_period);
    return ex;
}

namespace {

enum Stream : std::uint64_t {
    kClipStream = 0,
    kInitStream = 1,
    kAugmentStream = 2,
    kBatchStream = 3,
    kMonitorStream = 4,
    kValidationStream = 5,
};

void copyRows(const float* src, std::size_t start, std::size_t count, std::size_t width, float* dst)
{
    std::copy_n(src + start * width, count * width, dst);
}

} // namespace

ToyTrainer::ToyTrainer(const TrainConfig& cfg)
    : mConfig(cfg)
    , mModel(cfg.model)
    , mAdam(AdamConfig{cfg.learning_rate})
{
    cfg.validate();
    mModel.initialize(substreamSeed(cfg.seed, kInitStream));

    SynthConfig mono;
    mono.monophonic = true;
    SynthConfig poly;
    poly.max_voices = cfg.max_voices;
    const auto nMono = std::size_t(std::lround(double(cfg.n_clips) * cfg.mono_fraction));
    const std::uint64_t clipSeed = substreamSeed(cfg.seed, kClipStream);
    const std::uint64_t augmentSeed = substreamSeed(cfg.seed, kAugmentStream);
    for (std::size_t i = 0; i < cfg.n_clips; ++i) {
        Rng rng(substreamSeed(clipSeed, i));
        SynthClip clip = synthClip(rng, i < nMono ? mono : poly);
        mExamples.push_back(makeExample(clip, cfg.model.use_harmonic_stacking));
        if (cfg.augmentation) {
            Rng augmentRng(substreamSeed(augmentSeed, i));
            clip.audio = augment(clip.audio, augmentRng, cfg.augment);
            mExamples.push_back(makeExample(clip, cfg.model.use_harmonic_stacking));
        }
    }
}

Batch<float> ToyTrainer::sampleBatch(Rng& rng) const
{
    std::size_t crop = mConfig.crop_frames;
    for (const auto& ex : mExamples)
        crop = std::min(crop, ex.targets.frames);
    const std::size_t n = mConfig.batch_size;
    const std::size_t channels = mConfig.model.inputChannels();
    Batch<float> b;
    b.input = nn::Tensor<float>({n, channels, crop, model::kContourBins});
    b.onsets = nn::Tensor<float>({n, 1, crop, model::kNoteBins});
    b.notes = nn::Tensor<float>({n, 1, crop, model::kNoteBins});
    b.contours = nn::Tensor<float>({n, 1, crop, model::kContourBins});

    std::uniform_int_distribution<std::size_t> pick(0, mExamples.size() - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const Example& ex = mExamples[pick(rng)];
        const std::size_t frames = ex.targets.frames;
        std::uniform_int_distribution<std::size_t> startDist(0, frames - crop);
        const std::size_t start = startDist(rng);
        for (std::size_t c = 0; c < channels; ++c)
            copyRows(ex.input.row(0, c, 0), start, crop, model::kContourBins, b.input.row(i, c, 0));
        copyRows(ex.targets.onsets.data(), start, crop, model::kNoteBins, b.onsets.row(i, 0, 0));
        copyRows(ex.targets.notes.data(), start, crop, model::kNoteBins, b.notes.row(i, 0, 0));
        copyRows(ex.targets.contours.data(), start, crop, model::kContourBins, b.contours.row(i, 0, 0));
    }
    return b;
}

LossTerms ToyTrainer::step(const Batch<float>& batch)
{
    std::vector<nn::Tensor<float>> grads;
    const LossTerms terms = forwardBackward(mModel, batch, mConfig.lossWeights(), &grads);
    std::vector<std::span<float>> params;
    std::vector<std::span<const float>> gradSpans;
    auto& ps = mModel.parameters();
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (!ps[i].trainable)
            continue;
        params.push_back(ps[i].value.values());
        gradSpans.push_back(grads[i].values());
    }
    mAdam.step(params, gradSpans);
    return terms;
}

LossTerms ToyTrainer::evaluate(const Batch<float>& batch) const
{
    model::NmpModel<float> copy = mModel;
    return forwardBackward<float>(copy, batch, mConfig.lossWeights(), nullptr);
}

std::vector<SynthClip> validationClips(std::uint64_t seed, std::size_t n)
{
    SynthConfig mono;
    mono.monophonic = true;
    SynthConfig poly;
    poly.max_voices = 3;
    std::vector<SynthClip> clips;
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(substreamSeed(seed, i));
        clips.push_back(synthClip(rng, i % 2 == 0 ? mono : poly));
    }
    return clips;
}

TrainResult trainToy(const TrainConfig& cfg, const std::function<void(const LossRecord&)>& progress)
{
    const auto started = std::chrono::steady_clock::now();
    ToyTrainer trainer(cfg);
    Rng batchRng(substreamSeed(cfg.seed, kBatchStream));
    Rng monitorRng(substreamSeed(cfg.seed, kMonitorStream));
    const Batch<float> monitor = trainer.sampleBatch(monitorRng);

    TrainResult result(trainer.model());
    result.initial_loss = trainer.evaluate(monitor).total;
    for (std::size_t s = 1; s <= cfg.steps; ++s) {
        const LossRecord record{s, trainer.step(trainer.sampleBatch(batchRng))};
        result.log.push_back(record);
        if (progress)
            progress(record);
    }
    result.final_loss = trainer.evaluate(monitor).total;
    result.model = trainer.model();

    if (cfg.validation_clips > 0) {
        std::vector<tracking::TuneCase> cases;
        for (const SynthClip& clip : validationClips(substreamSeed(cfg.seed, kValidationStream), cfg.validation_clips))
            cases.push_back({"", model::predict(clip.audio, result.model), clip.notes});
        const auto tuned = tracking::tuneNoteThreshold(cases);
        result.note_threshold = tuned.threshold;
        result.validation_fno = tuned.mean_fno;
    }
    result.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

std::string formatLossLog(const std::vector<LossRecord>& log)
{
    std::string out = "step,total,onset,note,contour\n";
    char line[160];
    for (const auto& r : log) {
        const int n = std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.9g,%.9g\n", r.step, r.terms.total,
                                    r.terms.onset, r.terms.note, r.terms.contour);
        out.append(line, std::size_t(n));
    }
    return out;
}

nlohmann::json trainSidecar(const TrainConfig& cfg, const TrainResult& result)
{
    return {
        {"step", result.log.size()},
        {"lr", cfg.learning_rate},
        {"seed", cfg.seed},
        {"config",
         {
             {"batch_size", cfg.batch_size},
             {"crop_frames", cfg.crop_frames},
             {"n_clips", cfg.n_clips},
             {"mono_fraction", cfg.mono_fraction},
             {"max_voices", cfg.max_voices},
             {"augmentation", cfg.augmentation},
             {"onset_pos_weight", cfg.onset_pos_weight},
             {"onset_neg_weight", cfg.onset_neg_weight},
             {"harmonic_stacking", cfg.model.use_harmonic_stacking},
             {"supervise_contour", cfg.model.supervise_contour},
         }},
        {"elapsed_s", result.elapsed_s},
        {"initial_loss", result.initial_loss},
        {"final_loss", result.final_loss},
        {"note_threshold", result.note_threshold},
        {"validation_fno", result.validation_fno},
    };
}

} // namespace nmp::train
