#include "carlab/model.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "carlab/errors.hpp"

namespace carlab {

namespace {

std::vector<std::size_t> layer_widths(const NetShape& shape) {
    std::vector<std::size_t> dims;
    dims.push_back(shape.d_in);
    dims.insert(dims.end(), shape.hidden.begin(), shape.hidden.end());
    dims.push_back(shape.d_feat);
    return dims;
}

void check_shape(const NetShape& shape) {
    if (shape.d_in == 0 || shape.d_feat == 0 || shape.n_classes == 0)
        throw ShapeError("init_model: zero dimension");
    for (std::size_t h : shape.hidden)
        if (h == 0) throw ShapeError("init_model: zero hidden dimension");
}

DenseLayer glorot_layer(std::size_t out_dim, std::size_t in_dim, Rng& rng) {
    DenseLayer layer{Matrix(out_dim, in_dim), Vec(out_dim, 0.0)};
    const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    for (double& w : layer.weight.data) w = rng.uniform(-limit, limit);
    return layer;
}

// pre = activations_in * W^T + bias (row per sample)
Matrix affine(const Matrix& in, const DenseLayer& layer) {
    if (in.cols != layer.weight.cols)
        throw ShapeError("forward: batch width " + std::to_string(in.cols) +
                         " does not match layer input " + std::to_string(layer.weight.cols));
    Matrix out = matmul(in, transpose(layer.weight));
    for (std::size_t i = 0; i < out.rows; ++i)
        for (std::size_t j = 0; j < out.cols; ++j) out(i, j) += layer.bias[j];
    return out;
}

Matrix relu(const Matrix& m) {
    Matrix out = m;
    for (double& x : out.data) x = x > 0.0 ? x : 0.0;
    return out;
}

}  // namespace

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : extractor) n += layer.weight.size() + layer.bias.size();
    return n + classifier.weight.size() + classifier.bias.size();
}

ParamTensors ParamTensors::zeros_like(const ModelParams& params) {
    ParamTensors t;
    t.extractor.reserve(params.extractor.size());
    for (const auto& layer : params.extractor)
        t.extractor.push_back({Matrix(layer.weight.rows, layer.weight.cols), Vec(layer.bias.size(), 0.0)});
    t.classifier = {Matrix(params.classifier.weight.rows, params.classifier.weight.cols),
                    Vec(params.classifier.bias.size(), 0.0)};
    return t;
}

ModelParams init_model(const NetShape& shape, Rng& rng) {
    check_shape(shape);
    ModelParams params;
    params.shape = shape;
    const auto dims = layer_widths(shape);
    for (std::size_t i = 1; i < dims.size(); ++i)
        params.extractor.push_back(glorot_layer(dims[i], dims[i - 1], rng));
    params.classifier = glorot_layer(shape.n_classes, shape.d_feat, rng);
    return params;
}

AdamState init_adam(const ModelParams& params, const AdamConfig& config) {
    AdamState state;
    state.config = config;
    state.m = ParamTensors::zeros_like(params);
    state.v = ParamTensors::zeros_like(params);
    state.t = 0;
    return state;
}

ForwardCache forward(const ModelParams& params, const Matrix& batch) {
    if (batch.cols != params.shape.d_in)
        throw ShapeError("forward: batch has " + std::to_string(batch.cols) +
                         " columns, expected " + std::to_string(params.shape.d_in));
    ForwardCache cache;
    cache.input = batch;
    const std::size_t n_layers = params.extractor.size();
    cache.pre.reserve(n_layers);
    cache.activations.reserve(n_layers);
    const Matrix* in = &cache.input;
    for (std::size_t l = 0; l < n_layers; ++l) {
        cache.pre.push_back(affine(*in, params.extractor[l]));
        const bool is_feature_layer = (l + 1 == n_layers);
        cache.activations.push_back(is_feature_layer ? cache.pre.back() : relu(cache.pre.back()));
        in = &cache.activations.back();
    }
    cache.features = cache.activations.back();
    cache.logits = affine(cache.features, params.classifier);
    return cache;
}

Gradients backward(const ModelParams& params, const ForwardCache& cache, const Matrix& dL_dlogits,
                   const Matrix& dL_dfeatures) {
    if (dL_dlogits.rows != cache.logits.rows || dL_dlogits.cols != cache.logits.cols)
        throw ShapeError("backward: dL_dlogits shape mismatch");
    if (dL_dfeatures.rows != cache.features.rows || dL_dfeatures.cols != cache.features.cols)
        throw ShapeError("backward: dL_dfeatures shape mismatch");

    Gradients grads = ParamTensors::zeros_like(params);

    grads.classifier.weight = matmul(transpose(dL_dlogits), cache.features);
    grads.classifier.bias = column_sums(dL_dlogits);

    // Upstream into the feature layer: classifier path plus direct injection.
    Matrix d_act = matmul(dL_dlogits, params.classifier.weight);
    for (std::size_t i = 0; i < d_act.size(); ++i) d_act.data[i] += dL_dfeatures.data[i];

    const std::size_t n_layers = params.extractor.size();
    for (std::size_t l = n_layers; l-- > 0;) {
        Matrix d_pre = d_act;
        if (l + 1 != n_layers) {  // hidden layers gate through ReLU; feature layer is linear
            const Matrix& pre = cache.pre[l];
            for (std::size_t i = 0; i < d_pre.size(); ++i)
                if (pre.data[i] <= 0.0) d_pre.data[i] = 0.0;
        }
        const Matrix& below = (l == 0) ? cache.input : cache.activations[l - 1];
        grads.extractor[l].weight = matmul(transpose(d_pre), below);
        grads.extractor[l].bias = column_sums(d_pre);
        if (l > 0) d_act = matmul(d_pre, params.extractor[l].weight);
    }
    return grads;
}

namespace {

void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v, const AdamConfig& cfg,
                 double bias1, double bias2) {
    if (param.rows != grad.rows || param.cols != grad.cols)
        throw ShapeError("adam_step: gradient shape mismatch");
    for (std::size_t i = 0; i < param.size(); ++i) {
        m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * grad.data[i];
        v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * grad.data[i] * grad.data[i];
        const double m_hat = m.data[i] / bias1;
        const double v_hat = v.data[i] / bias2;
        param.data[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

void adam_update(Vec& param, const Vec& grad, Vec& m, Vec& v, const AdamConfig& cfg, double bias1,
                 double bias2) {
    if (param.size() != grad.size()) throw ShapeError("adam_step: gradient shape mismatch");
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double m_hat = m[i] / bias1;
        const double v_hat = v[i] / bias2;
        param[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

}  // namespace

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state) {
    if (grads.extractor.size() != params.extractor.size())
        throw ShapeError("adam_step: layer count mismatch");
    state.t += 1;
    const double bias1 = 1.0 - std::pow(state.config.beta1, static_cast<double>(state.t));
    const double bias2 = 1.0 - std::pow(state.config.beta2, static_cast<double>(state.t));
    for (std::size_t l = 0; l < params.extractor.size(); ++l) {
        adam_update(params.extractor[l].weight, grads.extractor[l].weight, state.m.extractor[l].weight,
                    state.v.extractor[l].weight, state.config, bias1, bias2);
        adam_update(params.extractor[l].bias, grads.extractor[l].bias, state.m.extractor[l].bias,
                    state.v.extractor[l].bias, state.config, bias1, bias2);
    }
    adam_update(params.classifier.weight, grads.classifier.weight, state.m.classifier.weight,
                state.v.classifier.weight, state.config, bias1, bias2);
    adam_update(params.classifier.bias, grads.classifier.bias, state.m.classifier.bias,
                state.v.classifier.bias, state.config, bias1, bias2);
}

namespace {

constexpr int kCheckpointVersion = 1;

nlohmann::json layer_to_json(const DenseLayer& layer) {
    return {{"rows", layer.weight.rows},
            {"cols", layer.weight.cols},
            {"weight", layer.weight.data},
            {"bias", layer.bias}};
}

DenseLayer layer_from_json(const nlohmann::json& j) {
    DenseLayer layer;
    layer.weight.rows = j.at("rows").get<std::size_t>();
    layer.weight.cols = j.at("cols").get<std::size_t>();
    layer.weight.data = j.at("weight").get<std::vector<double>>();
    layer.bias = j.at("bias").get<Vec>();
    if (layer.weight.data.size() != layer.weight.rows * layer.weight.cols ||
        layer.bias.size() != layer.weight.rows)
        throw ParseError("checkpoint: inconsistent layer shapes");
    return layer;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "carlab-model";
    j["version"] = kCheckpointVersion;
    j["shape"] = {{"d_in", params.shape.d_in},
                  {"hidden", params.shape.hidden},
                  {"d_feat", params.shape.d_feat},
                  {"n_classes", params.shape.n_classes}};
    j["extractor"] = nlohmann::json::array();
    for (const auto& layer : params.extractor) j["extractor"].push_back(layer_to_json(layer));
    j["classifier"] = layer_to_json(params.classifier);
    std::ofstream out(path);
    if (!out) throw IoError("save_checkpoint: cannot write " + path.string());
    out << j.dump(2) << '\n';
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_checkpoint: cannot read " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("load_checkpoint: " + std::string(e.what()));
    }
    if (j.value("format", "") != "carlab-model")
        throw ParseError("load_checkpoint: not a carlab model checkpoint");
    if (j.value("version", -1) != kCheckpointVersion)
        throw ParseError("load_checkpoint: unsupported checkpoint version");
    ModelParams params;
    const auto& shape = j.at("shape");
    params.shape.d_in = shape.at("d_in").get<std::size_t>();
    params.shape.hidden = shape.at("hidden").get<std::vector<std::size_t>>();
    params.shape.d_feat = shape.at("d_feat").get<std::size_t>();
    params.shape.n_classes = shape.at("n_classes").get<std::size_t>();
    for (const auto& layer : j.at("extractor")) params.extractor.push_back(layer_from_json(layer));
    params.classifier = layer_from_json(j.at("classifier"));
    return params;
}

}  // namespace carlab
