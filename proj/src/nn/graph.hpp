#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "nn/conv.hpp"
#include "nn/layers.hpp"
#include "nn/tensor.hpp"

namespace nmp::nn {

// Running statistics owned by the model; updated in Training mode.
template <class T>
struct BatchNormState {
    Tensor<T>* mean = nullptr;
    Tensor<T>* var = nullptr;
    double momentum = 0.99;
    double eps = kBatchNormEps;
};

// Tape of tensor operations with reverse-mode gradients. Nodes are appended in
// evaluation order, so the tape is already topologically sorted.
template <class T>
class Graph {
public:
    using NodeId = std::size_t;

    struct Seed {
        NodeId node;
        const Tensor<T>* gradient;
    };

    explicit Graph(bool record = true) : mRecord(record) {}

    bool recording() const { return mRecord; }

    NodeId input(Tensor<T> value);
    NodeId parameter(const Tensor<T>& value);

    NodeId conv2d(NodeId x, NodeId w, NodeId b, const ConvSpec& spec);
    NodeId batchNorm(NodeId x, NodeId gamma, NodeId beta, BatchNormState<T> state, BatchNormMode mode);
    NodeId relu(NodeId x);
    NodeId sigmoid(NodeId x);
    NodeId concatChannels(NodeId a, NodeId b);

    const Tensor<T>& value(NodeId id) const { return mNodes[id].value; }
    Tensor<T>& mutableValue(NodeId id) { return mNodes[id].value; }

    // Propagates the seeds back through the tape. Gradients of nodes no seed
    // reaches are zero-filled tensors of the node's shape.
    void backward(std::span<const Seed> seeds);
    const Tensor<T>& grad(NodeId id) const;

    std::size_t size() const { return mNodes.size(); }

private:
    struct Node {
        Tensor<T> value;
        Tensor<T> grad;
        bool needsGrad = false;
        std::function<void(Graph&)> backward;
    };

    NodeId push(Tensor<T> value, bool needsGrad, std::function<void(Graph&)> backward);
    Tensor<T>& gradSlot(NodeId id);
    void accumulate(NodeId id, const Tensor<T>& g);

    bool mRecord;
    bool mHasOps = false;
    bool mBackwardDone = false;
    std::vector<Node> mNodes;
};

extern template class Graph<float>;
extern template class Graph<double>;

} // namespace nmp::nn
