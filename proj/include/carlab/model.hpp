#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "carlab/matrix.hpp"
#include "carlab/rng.hpp"

namespace carlab {

// Layer widths of the network: input -> hidden... -> feature -> classes.
// Hidden layers are affine + ReLU; the feature layer is affine only, so the
// embedding is free to occupy the whole sphere after normalization; the
// classifier is a single affine map from features to logits.
struct NetShape {
    std::size_t d_in = 0;
    std::vector<std::size_t> hidden;
    std::size_t d_feat = 0;
    std::size_t n_classes = 0;

    bool operator==(const NetShape&) const = default;
};

struct DenseLayer {
    Matrix weight;  // out x in
    Vec bias;       // out

    bool operator==(const DenseLayer&) const = default;
};

// Extractor parameters (hidden layers plus the feature layer) and the
// classifier head.
struct ModelParams {
    NetShape shape;
    std::vector<DenseLayer> extractor;  // hidden.size() + 1 layers, last one linear
    DenseLayer classifier;

    std::size_t parameter_count() const;

    bool operator==(const ModelParams&) const = default;
};

// Everything one mini-batch needs for the backward pass.
struct ForwardCache {
    Matrix input;                       // batch x d_in
    std::vector<Matrix> pre;            // per extractor layer, batch x width
    std::vector<Matrix> activations;    // post-ReLU for hidden, identity for feature layer
    Matrix features;                    // z, batch x d_feat (== activations.back())
    Matrix logits;                      // y, batch x n_classes
};

// Same shapes as ModelParams; used for gradients and Adam moments.
struct ParamTensors {
    std::vector<DenseLayer> extractor;
    DenseLayer classifier;

    static ParamTensors zeros_like(const ModelParams& params);
};

using Gradients = ParamTensors;

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    ParamTensors m;
    ParamTensors v;
    std::int64_t t = 0;
};

// Glorot-uniform weights, zero biases; deterministic given the Rng state.
ModelParams init_model(const NetShape& shape, Rng& rng);

AdamState init_adam(const ModelParams& params, const AdamConfig& config = {});

ForwardCache forward(const ModelParams& params, const Matrix& batch);

// Backward pass with two gradient entry points: dL_dlogits feeds the
// classifier path and dL_dfeatures injects directly at the embedding, so a
// loss may touch both the logits and the feature space. Either may be zero.
Gradients backward(const ModelParams& params, const ForwardCache& cache, const Matrix& dL_dlogits,
                   const Matrix& dL_dfeatures);

// Standard Adam update with bias correction; increments state.t.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state);

// Versioned JSON checkpoint of shape + flattened parameter arrays.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace carlab
