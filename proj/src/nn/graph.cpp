#include "nn/graph.hpp"

#include <cmath>

#include "common/errors.hpp"

namespace nmp::nn {

template <class T>
typename Graph<T>::NodeId Graph<T>::push(Tensor<T> value, bool needsGrad, std::function<void(Graph&)> backward)
{
    Node node;
    node.value = std::move(value);
    node.needsGrad = needsGrad && mRecord;
    if (mRecord)
        node.backward = std::move(backward);
    mNodes.push_back(std::move(node));
    return mNodes.size() - 1;
}

template <class T>
typename Graph<T>::NodeId Graph<T>::input(Tensor<T> value)
{
    return push(std::move(value), false, nullptr);
}

template <class T>
typename Graph<T>::NodeId Graph<T>::parameter(const Tensor<T>& value)
{
    return push(value, true, nullptr);
}

template <class T>
Tensor<T>& Graph<T>::gradSlot(NodeId id)
{
    Node& n = mNodes[id];
    if (n.grad.empty() && !n.value.empty())
        n.grad = Tensor<T>(n.value.dims());
    return n.grad;
}

template <class T>
void Graph<T>::accumulate(NodeId id, const Tensor<T>& g)
{
    if (!mNodes[id].needsGrad)
        return;
    Tensor<T>& slot = gradSlot(id);
    for (std::size_t i = 0; i < slot.size(); ++i)
        slot[i] += g[i];
}

template <class T>
typename Graph<T>::NodeId Graph<T>::conv2d(NodeId x, NodeId w, NodeId b, const ConvSpec& spec)
{
    mHasOps = true;
    Tensor<T> y;
    conv2dForward(value(x), value(w), value(b), spec, y);
    const bool needs = mNodes[x].needsGrad || mNodes[w].needsGrad || mNodes[b].needsGrad;
    const NodeId self = mNodes.size();
    return push(std::move(y), needs, [=](Graph& g) {
        Tensor<T> gw, gb, gx;
        const bool wantX = g.mNodes[x].needsGrad;
        conv2dBackward(g.value(x), g.value(w), g.mNodes[self].grad, spec, wantX ? &gx : nullptr, gw, gb);
        g.accumulate(w, gw);
        g.accumulate(b, gb);
        if (wantX)
            g.accumulate(x, gx);
    });
}

template <class T>
typename Graph<T>::NodeId Graph<T>::batchNorm(NodeId x, NodeId gamma, NodeId beta, BatchNormState<T> state,
                                              BatchNormMode mode)
{
    mHasOps = true;
    const Tensor<T>& xv = value(x);
    std::vector<double> mean, var;
    Tensor<T> y;
    if (mode == BatchNormMode::Training) {
        y = batchNormTrain(xv, value(gamma), value(beta), state.eps, mean, var);
        for (std::size_t c = 0; c < mean.size(); ++c) {
            (*state.mean)[c] = T(state.momentum * double((*state.mean)[c]) + (1.0 - state.momentum) * mean[c]);
            (*state.var)[c] = T(state.momentum * double((*state.var)[c]) + (1.0 - state.momentum) * var[c]);
        }
    } else {
        y = batchNormInfer(xv, BatchNormParams<T>{value(gamma), value(beta), *state.mean, *state.var, state.eps});
        mean.assign(state.mean->values().begin(), state.mean->values().end());
        var.assign(state.var->values().begin(), state.var->values().end());
    }
    const bool needs = mNodes[x].needsGrad || mNodes[gamma].needsGrad || mNodes[beta].needsGrad;
    const NodeId self = mNodes.size();
    const bool training = mode == BatchNormMode::Training;
    const double eps = state.eps;
    return push(std::move(y), needs, [=, mean = std::move(mean), var = std::move(var)](Graph& g) {
        Tensor<T> gx, gg, gbeta;
        batchNormBackward(g.value(x), g.value(gamma), mean, var, eps, training, g.mNodes[self].grad, gx, gg, gbeta);
        g.accumulate(gamma, gg);
        g.accumulate(beta, gbeta);
        g.accumulate(x, gx);
    });
}

template <class T>
typename Graph<T>::NodeId Graph<T>::relu(NodeId x)
{
    mHasOps = true;
    const NodeId self = mNodes.size();
    return push(nn::relu(value(x)), mNodes[x].needsGrad, [=](Graph& g) {
        const Tensor<T>& in = g.value(x);
        Tensor<T> gx(in.dims());
        const Tensor<T>& gy = g.mNodes[self].grad;
        for (std::size_t i = 0; i < in.size(); ++i)
            gx[i] = in[i] > T(0) ? gy[i] : T(0);
        g.accumulate(x, gx);
    });
}

template <class T>
typename Graph<T>::NodeId Graph<T>::sigmoid(NodeId x)
{
    mHasOps = true;
    const NodeId self = mNodes.size();
    return push(nn::sigmoid(value(x)), mNodes[x].needsGrad, [=](Graph& g) {
        const Tensor<T>& s = g.value(self);
        Tensor<T> gx(s.dims());
        const Tensor<T>& gy = g.mNodes[self].grad;
        for (std::size_t i = 0; i < s.size(); ++i)
            gx[i] = gy[i] * s[i] * (T(1) - s[i]);
        g.accumulate(x, gx);
    });
}

template <class T>
typename Graph<T>::NodeId Graph<T>::concatChannels(NodeId a, NodeId b)
{
    mHasOps = true;
    const NodeId self = mNodes.size();
    const bool needs = mNodes[a].needsGrad || mNodes[b].needsGrad;
    return push(nn::concatChannels(value(a), value(b)), needs, [=](Graph& g) {
        const Tensor<T>& gy = g.mNodes[self].grad;
        const Tensor<T>& av = g.value(a);
        const Tensor<T>& bv = g.value(b);
        Tensor<T> ga(av.dims()), gb(bv.dims());
        const std::size_t plane = av.frames() * av.bins();
        for (std::size_t n = 0; n < av.batch(); ++n) {
            std::copy_n(gy.data() + gy.offset(n, 0, 0, 0), av.channels() * plane, ga.data() + ga.offset(n, 0, 0, 0));
            std::copy_n(gy.data() + gy.offset(n, av.channels(), 0, 0), bv.channels() * plane,
                        gb.data() + gb.offset(n, 0, 0, 0));
        }
        g.accumulate(a, ga);
        g.accumulate(b, gb);
    });
}

template <class T>
void Graph<T>::backward(std::span<const Seed> seeds)
{
    if (!mRecord)
        throw StateError("backward: graph was built without recording");
    if (!mHasOps)
        throw StateError("backward: no forward pass has been recorded");
    for (Node& n : mNodes)
        n.grad = Tensor<T>();
    for (const Seed& s : seeds) {
        if (s.node >= mNodes.size())
            throw ContractError("backward: seed refers to unknown node");
        if (!s.gradient->sameShape(mNodes[s.node].value))
            throw ContractError("backward: seed gradient shape " + shapeString(s.gradient->dims())
                                + " does not match node shape " + shapeString(mNodes[s.node].value.dims()));
        accumulate(s.node, *s.gradient);
    }
    for (std::size_t i = mNodes.size(); i-- > 0;) {
        Node& n = mNodes[i];
        if (n.backward && !n.grad.empty())
            n.backward(*this);
    }
    for (Node& n : mNodes)
        if (n.grad.empty())
            n.grad = Tensor<T>(n.value.dims());
    mBackwardDone = true;
}

template <class T>
const Tensor<T>& Graph<T>::grad(NodeId id) const
{
    if (!mBackwardDone)
        throw StateError("grad: backward has not been run");
    return mNodes[id].grad;
}

template class Graph<float>;
template class Graph<double>;

} // namespace nmp::nn
