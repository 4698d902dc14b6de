#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>

#include "carlab/matrix.hpp"
#include "carlab/model.hpp"
#include "carlab/tasks.hpp"

namespace carlab {

// Frozen per-class centroids in normalized feature space. A centroid is the
// mean of the row-normalized embeddings of its class and is never refreshed
// after its task finishes, so later feature drift leaves it stale on purpose.
class CentroidStore {
public:
    CentroidStore() = default;

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    bool contains(int class_id) const { return entries_.count(class_id) != 0; }
    std::size_t feature_dim() const { return entries_.empty() ? 0 : entries_.begin()->second.size(); }

    const Vec& centroid(int class_id) const;
    const std::map<int, Vec>& entries() const { return entries_; }
    std::set<int> frozen_classes() const;

    // Throws ValueError if the class is already frozen or dims disagree.
    void insert(int class_id, Vec centroid);

    void save_json(const std::filesystem::path& path) const;
    static CentroidStore load_json(const std::filesystem::path& path);

private:
    std::map<int, Vec> entries_;
};

// Mean of the row-wise L2-normalized features. The mean itself is not
// re-normalized, so its norm is at most 1 and can vanish for antipodal rows.
Vec compute_centroid(const Matrix& class_features);

// Embeds each class of the task's training data with the current extractor
// and freezes the resulting centroid. Classes already present are an error.
void update_store(CentroidStore& store, const ModelParams& params,
                  std::span<const Sample> task_train);

struct IcfResult {
    double loss = 0.0;
    Vec dloss_dz;
};

// Separation penalty for one embedding z against every frozen centroid:
//   loss = -sum_c || z/||z|| - mu_c ||_2
// Lower is better-separated. The gradient flows through the normalization;
// terms at (numerically) zero distance contribute zero gradient, and a
// degenerate ||z|| yields loss 0 with zero gradient.
IcfResult icf_loss(const Vec& z, const CentroidStore& store);

}  // namespace carlab
