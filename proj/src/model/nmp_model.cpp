#include "model/nmp_model.hpp"

#include <cmath>
#include <random>

#include "common/errors.hpp"

namespace nmp::model {

void ModelConfig::validate() const
{
    if (window_frames == 0)
        throw ContractError("model: window_frames must be positive");
    if (window_overlap_frames >= window_frames)
        throw ContractError("model: window overlap must be smaller than the window");
}

template <class T>
NmpModel<T>::NmpModel(const ModelConfig& cfg)
    : mConfig(cfg)
{
    cfg.validate();
    const std::size_t in = cfg.inputChannels();
    mContourConv1 = {in, 8, 3, 39, 1};
    mContourConv2 = {8, 1, 5, 5, 1};
    mNoteConv1 = {1, 32, 7, 7, 3};
    mNoteConv2 = {32, 1, 7, 3, 1};
    mOnsetConv1 = {in, 32, 5, 5, 3};
    mOnsetConv2 = {33, 1, 3, 3, 1};

    declareBatchNorm("input_bn", in);
    declareConv("contour.conv1", mContourConv1);
    declareBatchNorm("contour.bn", 8);
    declareConv("contour.conv2", mContourConv2);
    if (cfg.supervise_contour)
        declareBatchNorm("note.bn", 1);
    declareConv("note.conv1", mNoteConv1);
    declareConv("note.conv2", mNoteConv2);
    declareConv("onset.conv1", mOnsetConv1);
    declareBatchNorm("onset.bn", 32);
    declareConv("onset.conv2", mOnsetConv2);
}

template <class T>
void NmpModel<T>::declare(const std::string& name, nn::Shape shape, bool trainable)
{
    mParams.push_back({name, nn::Tensor<T>(std::move(shape)), trainable});
}

template <class T>
void NmpModel<T>::declareConv(const std::string& prefix, const nn::ConvSpec& spec)
{
    declare(prefix + ".weight", spec.weightShape(), true);
    declare(prefix + ".bias", {spec.out_channels}, true);
}

template <class T>
void NmpModel<T>::declareBatchNorm(const std::string& prefix, std::size_t channels)
{
    declare(prefix + ".gamma", {channels}, true);
    declare(prefix + ".beta", {channels}, true);
    declare(prefix + ".mean", {channels}, false);
    declare(prefix + ".var", {channels}, false);
    mParams[mParams.size() - 4].value.fill(T(1));
    mParams.back().value.fill(T(1));
}

template <class T>
std::size_t NmpModel<T>::index(const std::string& name) const
{
    for (std::size_t i = 0; i < mParams.size(); ++i)
        if (mParams[i].name == name)
            return i;
    throw ContractError("model: no parameter named '" + name + "'");
}

template <class T>
Parameter<T>& NmpModel<T>::parameter(const std::string& name)
{
    return mParams[index(name)];
}

template <class T>
std::size_t NmpModel<T>::trainableParameterCount() const
{
    std::size_t n = 0;
    for (const auto& p : mParams)
        if (p.trainable)
            n += p.value.size();
    return n;
}

template <class T>
void NmpModel<T>::zeroAll()
{
    for (auto& p : mParams)
        p.value.fill(T(0));
}

template <class T>
void NmpModel<T>::initialize(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    for (auto& p : mParams) {
        const auto& name = p.name;
        const auto suffix = name.substr(name.rfind('.') + 1);
        if (suffix == "weight") {
            const auto& d = p.value.dims();
            const double receptive = double(d[2] * d[3]);
            const double limit = std::sqrt(6.0 / (double(d[1]) * receptive + double(d[0]) * receptive));
            std::uniform_real_distribution<double> dist(-limit, limit);
            for (auto& v : p.value.values())
                v = T(dist(rng));
        } else if (suffix == "gamma" || suffix == "var") {
            p.value.fill(T(1));
        } else {
            p.value.fill(T(0));
        }
    }
}

template <class T>
typename NmpModel<T>::Outputs NmpModel<T>::forward(Graph& g, NodeId input, nn::BatchNormMode mode,
                                                   const ForwardOptions& opts)
{
    const auto& x = g.value(input);
    if (x.rank() != 4 || x.channels() != mConfig.inputChannels() || x.bins() != kContourBins)
        throw ContractError("model: input shape " + nn::shapeString(x.dims()) + ", expected (N, "
                            + std::to_string(mConfig.inputChannels()) + ", T, 264)");

    Outputs out;
    out.parameterNodes.resize(mParams.size());
    for (std::size_t i = 0; i < mParams.size(); ++i)
        out.parameterNodes[i] = g.parameter(mParams[i].value);
    auto node = [&](const std::string& name) { return out.parameterNodes[index(name)]; };
    auto conv = [&](NodeId in, const std::string& prefix, const nn::ConvSpec& spec) {
        return g.conv2d(in, node(prefix + ".weight"), node(prefix + ".bias"), spec);
    };
    auto bn = [&](NodeId in, const std::string& prefix) {
        nn::BatchNormState<T> state{&parameter(prefix + ".mean").value, &parameter(prefix + ".var").value};
        return g.batchNorm(in, node(prefix + ".gamma"), node(prefix + ".beta"), state, mode);
    };

    const NodeId normed = bn(input, "input_bn");

    NodeId contour = g.relu(bn(conv(normed, "contour.conv1", mContourConv1), "contour.bn"));
    out.contours = g.sigmoid(conv(contour, "contour.conv2", mContourConv2));

    NodeId noteIn = out.contours;
    if (mConfig.supervise_contour)
        noteIn = g.relu(bn(noteIn, "note.bn"));
    NodeId note = g.relu(conv(noteIn, "note.conv1", mNoteConv1));
    out.notes = g.sigmoid(conv(note, "note.conv2", mNoteConv2));

    NodeId onset = g.relu(bn(conv(normed, "onset.conv1", mOnsetConv1), "onset.bn"));
    if (opts.zero_onset_features)
        onset = g.input(nn::Tensor<T>(g.value(onset).dims()));
    out.onsets = g.sigmoid(conv(g.concatChannels(onset, out.notes), "onset.conv2", mOnsetConv2));
    return out;
}

template <class T>
NmpModel<T> NmpModel<T>::fromArchive(const nn::WeightArchive& archive, const ModelConfig& cfg)
{
    NmpModel<T> model(cfg);
    for (auto& p : model.mParams) {
        const auto* e = archive.find(p.name);
        if (!e)
            throw FormatError("weights", "missing entry '" + p.name + "'");
        nn::Shape shape(e->shape.begin(), e->shape.end());
        if (shape != p.value.dims())
            throw FormatError("weights", "entry '" + p.name + "' has shape " + nn::shapeString(shape) + ", expected "
                                             + nn::shapeString(p.value.dims()));
        for (std::size_t i = 0; i < e->values.size(); ++i) {
            if (!std::isfinite(e->values[i]))
                throw FormatError("weights", "entry '" + p.name + "' contains a non-finite value");
            p.value[i] = T(e->values[i]);
        }
    }
    for (const auto& e : archive.entries()) {
        bool known = false;
        for (const auto& p : model.mParams)
            known = known || p.name == e.name;
        if (!known)
            throw FormatError("weights", "unexpected entry '" + e.name + "' for this architecture");
    }
    return model;
}

template <class T>
nn::WeightArchive NmpModel<T>::toArchive() const
{
    nn::WeightArchive archive;
    for (const auto& p : mParams) {
        std::vector<std::uint32_t> shape(p.value.dims().begin(), p.value.dims().end());
        archive.add(p.name, std::move(shape), std::vector<float>(p.value.values().begin(), p.value.values().end()));
    }
    return archive;
}

template <class T>
template <class U>
NmpModel<U> NmpModel<T>::cast() const
{
    NmpModel<U> out(mConfig);
    for (std::size_t i = 0; i < mParams.size(); ++i)
        out.mParams[i].value = mParams[i].value.template cast<U>();
    return out;
}

ModelConfig inferConfig(const nn::WeightArchive& archive, ModelConfig base)
{
    const auto* gamma = archive.find("input_bn.gamma");
    if (!gamma)
        throw FormatError("weights", "missing entry 'input_bn.gamma'");
    if (gamma->elementCount() != 8 && gamma->elementCount() != 1)
        throw FormatError("weights", "entry 'input_bn.gamma' must have 8 or 1 channels");
    base.use_harmonic_stacking = gamma->elementCount() == 8;
    base.supervise_contour = archive.find("note.bn.gamma") != nullptr;
    return base;
}

template class NmpModel<float>;
template class NmpModel<double>;
template NmpModel<double> NmpModel<float>::cast<double>() const;
template NmpModel<float> NmpModel<double>::cast<float>() const;

} // namespace nmp::model
