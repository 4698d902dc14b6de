#pragma once

// Shared helpers for the gradient-check suites: flattening model parameters
// into one vector for the finite-difference oracle, and random fixtures.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "carlab/geometry.hpp"
#include "carlab/model.hpp"
#include "carlab/numerics.hpp"
#include "carlab/rng.hpp"

namespace carlab::testing {

inline Vec flatten(const ModelParams& params) {
    Vec flat;
    for (const auto& layer : params.extractor) {
        flat.insert(flat.end(), layer.weight.data.begin(), layer.weight.data.end());
        flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
    }
    flat.insert(flat.end(), params.classifier.weight.data.begin(),
                params.classifier.weight.data.end());
    flat.insert(flat.end(), params.classifier.bias.begin(), params.classifier.bias.end());
    return flat;
}

inline ModelParams unflatten(const ModelParams& reference, const Vec& flat) {
    ModelParams params = reference;
    std::size_t pos = 0;
    auto take = [&](auto& dst) {
        for (auto& x : dst) x = flat[pos++];
    };
    for (auto& layer : params.extractor) {
        take(layer.weight.data);
        take(layer.bias);
    }
    take(params.classifier.weight.data);
    take(params.classifier.bias);
    return params;
}

inline Vec flatten_gradients(const ModelParams& reference, const Gradients& grads) {
    ModelParams holder = reference;
    holder.extractor = grads.extractor;
    holder.classifier = grads.classifier;
    return flatten(holder);
}

inline CentroidStore random_store(std::size_t n, std::size_t dim, Rng& rng) {
    CentroidStore store;
    for (std::size_t c = 0; c < n; ++c) {
        Vec v(dim);
        for (double& x : v) x = rng.uniform(-3.0, 3.0);
        store.insert(static_cast<int>(c), l2_normalize(v));
    }
    return store;
}

// Relative error with an absolute floor for near-zero coordinates.
inline bool gradients_agree(double numeric, double analytic, double rel_tol, double abs_tol) {
    return std::abs(numeric - analytic) <=
           abs_tol + rel_tol * std::max(std::abs(numeric), std::abs(analytic));
}

// Draws a batch on which the composite objective is smooth within the
// finite-difference step: no hidden pre-activation near a ReLU kink, no
// feature row near the normalization singularity (where the analytic side
// applies the documented zero-gradient policy but central differences see a
// jump), and no normalized row close to a stored centroid (the distance
// term's curvature explodes there and drowns the central-difference
// truncation budget). The objective is differentiable everywhere else, so
// the oracle only applies there.
inline Matrix smooth_batch(const ModelParams& params, std::size_t rows, Rng& rng,
                           const CentroidStore* store = nullptr, double kink_margin = 1e-3,
                           double norm_margin = 5e-2, double centroid_margin = 0.15) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Matrix batch(rows, params.shape.d_in);
        for (double& x : batch.data) x = rng.uniform(-2.0, 2.0);
        ForwardCache cache = forward(params, batch);
        bool ok = true;
        for (std::size_t l = 0; ok && l + 1 < cache.pre.size(); ++l)
            for (double p : cache.pre[l].data)
                if (std::abs(p) < kink_margin) {
                    ok = false;
                    break;
                }
        for (std::size_t i = 0; ok && i < cache.features.rows; ++i) {
            const Vec row = cache.features.row_copy(i);
            if (l2_norm(row) < norm_margin) ok = false;
            if (ok && store != nullptr) {
                const Vec unit = l2_normalize(row);
                for (const auto& [id, centroid] : store->entries()) {
                    Vec diff(unit.size());
                    for (std::size_t j = 0; j < unit.size(); ++j) diff[j] = unit[j] - centroid[j];
                    if (l2_norm(diff) < centroid_margin) {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if (ok) return batch;
    }
    throw std::runtime_error("smooth_batch: no smooth batch found for this architecture");
}

}  // namespace carlab::testing
