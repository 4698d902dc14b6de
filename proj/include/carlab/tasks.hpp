#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <vector>

#include "carlab/matrix.hpp"
#include "carlab/rng.hpp"

namespace carlab {

struct Sample {
    Vec features;
    int label = 0;

    bool operator==(const Sample&) const = default;
};

struct Task {
    std::vector<Sample> train;
    std::vector<Sample> test;
    std::set<int> classes;
};

// Ordered tasks with pairwise-disjoint class sets.
struct TaskStream {
    std::vector<Task> tasks;
    std::size_t d_in = 0;
    std::size_t total_classes = 0;  // logits width: max label + 1

    std::set<int> classes_through(std::size_t task_index) const;
};

struct SplitOptions {
    std::size_t classes_per_task = 2;
    // Explicit order wins; otherwise ascending label order, optionally shuffled.
    std::vector<int> class_order;
    bool shuffle_order = false;
    // Per-class train share; the split keeps at least one sample on each side.
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
};

// Groups consecutive classes of the order into tasks and splits each class
// into train/test with a seeded shuffle. The class count must divide evenly.
TaskStream split_protocol(const std::vector<Sample>& all_samples, const SplitOptions& options);

struct SynthOptions {
    std::size_t n_classes = 10;
    std::size_t d_in = 16;
    std::size_t per_class_train = 200;
    std::size_t per_class_test = 100;
    double spread = 1.0;
};

// Gaussian clusters around class means drawn uniformly on the sphere of
// radius 4; emits per_class_train + per_class_test samples per class.
std::vector<Sample> synth_gaussians(const SynthOptions& options, Rng& rng);

// Rows are `label,f1,...,fd` with a constant feature count; an optional header
// row is detected by a non-numeric first field.
std::vector<Sample> load_csv(const std::filesystem::path& path);

// Inverse of load_csv; features serialized with 17 significant digits so the
// round trip is bit-exact.
void save_csv(const std::vector<Sample>& samples, const std::filesystem::path& path);

// Stacks sample features into a batch matrix (row per sample).
Matrix stack_features(const std::vector<Sample>& samples);

std::vector<int> stack_labels(const std::vector<Sample>& samples);

}  // namespace carlab
