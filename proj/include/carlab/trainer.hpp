#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "carlab/metrics.hpp"
#include "carlab/model.hpp"
#include "carlab/tasks.hpp"

namespace carlab {

// The four ablation arms: plain sequential fine-tuning, replay alone,
// the feature-space penalty alone, and the full combination.
enum class Mode { Finetune, ReplayOnly, IcfOnly, Car };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct TrainConfig {
    Mode mode = Mode::Car;
    double lambda = 1.0;
    double lr = 0.001;
    std::size_t epochs_per_task = 20;
    std::size_t batch_size = 32;
    std::size_t buffer_capacity_per_class = 20;
    std::size_t replay_batch_size = 0;  // 0 means "match batch_size"
    bool icf_on_replay = false;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden_dims = {64, 64};
    std::size_t feature_dim = 32;

    // Mode-resolved settings: finetune and replay_only run with lambda 0,
    // finetune and icf_only run with no exemplar memory.
    double effective_lambda() const;
    std::size_t effective_capacity() const;
    std::size_t effective_replay_batch() const;

    void validate() const;
};

struct StepRecord {
    std::size_t step = 0;   // global step index across the whole run
    std::size_t task = 0;   // 0-based task index
    std::size_t epoch = 0;  // 0-based epoch within the task
    double ce = 0.0;
    double icf = 0.0;
    double total = 0.0;
};

struct RunLog {
    TrainConfig config;
    std::vector<StepRecord> steps;
    std::vector<double> task_seconds;
    AccuracyMatrix accuracy;

    void save_json(const std::filesystem::path& path) const;
};

struct TrainResult {
    RunLog log;
    ModelParams params;
};

// The sequential loop: per task, seeded epoch shuffles, batches of current
// samples with replayed exemplars appended, total-loss backprop, Adam; after
// the task, centroids are frozen (when the penalty is active), exemplars are
// stored (when memory is active), and every seen task is evaluated with the
// classes seen so far as the active mask. Everything is derived from
// (config, stream, seed), so a rerun reproduces the log bit for bit.
// A non-finite loss aborts with TrainingError naming the step.
TrainResult train_sequence(const TrainConfig& config, const TaskStream& stream);

// Fraction of samples whose argmax logit over the active classes matches the
// label; ties resolve to the lowest class id. Exact integer counting.
double evaluate(const ModelParams& params, std::span<const Sample> test_set,
                const std::set<int>& active_classes);

// The counting core of evaluate, exposed separately so it can be checked
// against an independent oracle on raw logit/label sets.
double accuracy_from_logits(const Matrix& logits, const std::vector<int>& labels,
                            const std::set<int>& active_classes);

}  // namespace carlab
