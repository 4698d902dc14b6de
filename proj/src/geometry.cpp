#include "carlab/geometry.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "carlab/errors.hpp"
#include "carlab/numerics.hpp"

namespace carlab {

const Vec& CentroidStore::centroid(int class_id) const {
    auto it = entries_.find(class_id);
    if (it == entries_.end())
        throw ValueError("CentroidStore: no centroid for class " + std::to_string(class_id));
    return it->second;
}

std::set<int> CentroidStore::frozen_classes() const {
    std::set<int> classes;
    for (const auto& [id, centroid] : entries_) classes.insert(id);
    return classes;
}

void CentroidStore::insert(int class_id, Vec centroid) {
    if (entries_.count(class_id))
        throw ValueError("CentroidStore: class " + std::to_string(class_id) + " already frozen");
    if (!entries_.empty() && centroid.size() != feature_dim())
        throw ShapeError("CentroidStore: centroid dimension mismatch");
    entries_.emplace(class_id, std::move(centroid));
}

void CentroidStore::save_json(const std::filesystem::path& path) const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [id, centroid] : entries_) j[std::to_string(id)] = centroid;
    std::ofstream out(path);
    if (!out) throw IoError("CentroidStore: cannot write " + path.string());
    out << j.dump(2) << '\n';
}

CentroidStore CentroidStore::load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("CentroidStore: cannot read " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("CentroidStore: " + std::string(e.what()));
    }
    CentroidStore store;
    for (const auto& [key, value] : j.items()) store.insert(std::stoi(key), value.get<Vec>());
    return store;
}

Vec compute_centroid(const Matrix& class_features) {
    if (class_features.rows == 0) throw ValueError("compute_centroid: empty class");
    Vec mean(class_features.cols, 0.0);
    for (std::size_t i = 0; i < class_features.rows; ++i) {
        Vec normalized = l2_normalize(class_features.row_copy(i));
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += normalized[j];
    }
    for (double& x : mean) x /= static_cast<double>(class_features.rows);
    return mean;
}

void update_store(CentroidStore& store, const ModelParams& params,
                  std::span<const Sample> task_train) {
    std::map<int, std::vector<const Sample*>> by_class;
    for (const Sample& s : task_train) by_class[s.label].push_back(&s);
    for (const auto& [label, members] : by_class)
        if (store.contains(label))
            throw ValueError("update_store: class " + std::to_string(label) + " already frozen");
    for (const auto& [label, members] : by_class) {
        Matrix batch(members.size(), params.shape.d_in);
        for (std::size_t i = 0; i < members.size(); ++i)
            std::copy(members[i]->features.begin(), members[i]->features.end(),
                      batch.data.begin() + static_cast<std::ptrdiff_t>(i * batch.cols));
        ForwardCache cache = forward(params, batch);
        store.insert(label, compute_centroid(cache.features));
    }
}

IcfResult icf_loss(const Vec& z, const CentroidStore& store) {
    IcfResult result;
    result.dloss_dz.assign(z.size(), 0.0);
    if (store.empty()) return result;
    if (z.size() != store.feature_dim()) throw ShapeError("icf_loss: feature dimension mismatch");
    if (l2_norm(z) <= kNormEpsilon) return result;

    const Vec z_hat = l2_normalize(z);
    Vec grad_z_hat(z.size(), 0.0);
    for (const auto& [id, centroid] : store.entries()) {
        Vec diff(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) diff[i] = z_hat[i] - centroid[i];
        const double distance = l2_norm(diff);
        result.loss -= distance;
        // Subgradient 0 at coincident points.
        if (distance > kNormEpsilon)
            for (std::size_t i = 0; i < z.size(); ++i) grad_z_hat[i] -= diff[i] / distance;
    }
    result.dloss_dz = l2_normalize_backward(z, grad_z_hat);
    return result;
}

}  // namespace carlab
