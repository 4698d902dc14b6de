#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "carlab/rng.hpp"
#include "carlab/tasks.hpp"

namespace carlab {

// Class-balanced exemplar memory. Stores raw input vectors, not embeddings,
// so replayed samples are re-encoded by the current extractor every step.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity_per_class = 20)
        : capacity_per_class_(capacity_per_class) {}

    std::size_t capacity_per_class() const { return capacity_per_class_; }
    bool empty() const { return per_class_.empty(); }
    std::size_t class_count() const { return per_class_.size(); }
    bool has_class(int class_id) const { return per_class_.count(class_id) != 0; }
    std::size_t total_size() const;
    const std::map<int, std::vector<Sample>>& per_class() const { return per_class_; }

    // Selects min(capacity, class size) exemplars per new class, uniformly
    // without replacement. Re-adding a stored class is an error.
    void add_exemplars(std::span<const Sample> task_train, Rng& rng);

    // Round-robin over a shuffled class order, one uniform draw per visit,
    // so per-class counts never differ by more than one.
    std::vector<Sample> sample_batch(std::size_t n, Rng& rng) const;

    void save_json(const std::filesystem::path& path) const;
    static ReplayBuffer load_json(const std::filesystem::path& path);

private:
    std::size_t capacity_per_class_;
    std::map<int, std::vector<Sample>> per_class_;
};

}  // namespace carlab
