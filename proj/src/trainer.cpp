#include "carlab/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include <json.hpp>

#include "carlab/errors.hpp"
#include "carlab/geometry.hpp"
#include "carlab/objective.hpp"
#include "carlab/replay_buffer.hpp"
#include "carlab/text.hpp"

namespace carlab {

namespace {

// Sub-seed tags; one independent stream per concern.
constexpr std::uint64_t kTagInit = 0x494Eu;
constexpr std::uint64_t kTagShuffle = 0x5348u;
constexpr std::uint64_t kTagReplay = 0x5245u;
constexpr std::uint64_t kTagBuffer = 0x4255u;

}  // namespace

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::Finetune: return "finetune";
        case Mode::ReplayOnly: return "replay_only";
        case Mode::IcfOnly: return "icf_only";
        case Mode::Car: return "car";
    }
    return "unknown";
}

Mode mode_from_string(const std::string& name) {
    if (name == "finetune") return Mode::Finetune;
    if (name == "replay_only") return Mode::ReplayOnly;
    if (name == "icf_only") return Mode::IcfOnly;
    if (name == "car") return Mode::Car;
    throw UsageError("unknown mode '" + name + "' (expected finetune|replay_only|icf_only|car)");
}

double TrainConfig::effective_lambda() const {
    return (mode == Mode::Finetune || mode == Mode::ReplayOnly) ? 0.0 : lambda;
}

std::size_t TrainConfig::effective_capacity() const {
    return (mode == Mode::Finetune || mode == Mode::IcfOnly) ? 0 : buffer_capacity_per_class;
}

std::size_t TrainConfig::effective_replay_batch() const {
    return replay_batch_size == 0 ? batch_size : replay_batch_size;
}

void TrainConfig::validate() const {
    if (lambda < 0.0) throw ValueError("TrainConfig: lambda must be nonnegative");
    if (lr <= 0.0) throw ValueError("TrainConfig: lr must be positive");
    if (epochs_per_task == 0) throw ValueError("TrainConfig: epochs_per_task must be >= 1");
    if (batch_size == 0) throw ValueError("TrainConfig: batch_size must be >= 1");
    if (feature_dim == 0) throw ValueError("TrainConfig: feature_dim must be >= 1");
    for (std::size_t h : hidden_dims)
        if (h == 0) throw ValueError("TrainConfig: zero hidden dimension");
}

double accuracy_from_logits(const Matrix& logits, const std::vector<int>& labels,
                            const std::set<int>& active_classes) {
    if (labels.size() != logits.rows) throw ShapeError("accuracy_from_logits: one label per row");
    if (logits.rows == 0) throw ValueError("accuracy_from_logits: empty batch");
    if (active_classes.empty()) throw ValueError("accuracy_from_logits: empty class mask");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        int best = -1;
        double best_logit = 0.0;
        for (int c : active_classes) {  // ascending ids: strict > keeps the lowest on ties
            const double value = logits(i, static_cast<std::size_t>(c));
            if (best < 0 || value > best_logit) {
                best = c;
                best_logit = value;
            }
        }
        if (best == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(logits.rows);
}

double evaluate(const ModelParams& params, std::span<const Sample> test_set,
                const std::set<int>& active_classes) {
    if (test_set.empty()) throw ValueError("evaluate: empty test set");
    Matrix batch(test_set.size(), params.shape.d_in);
    std::vector<int> labels(test_set.size());
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        if (test_set[i].features.size() != params.shape.d_in)
            throw ShapeError("evaluate: feature dimension mismatch");
        std::copy(test_set[i].features.begin(), test_set[i].features.end(),
                  batch.data.begin() + static_cast<std::ptrdiff_t>(i * batch.cols));
        labels[i] = test_set[i].label;
    }
    return accuracy_from_logits(forward(params, batch).logits, labels, active_classes);
}

TrainResult train_sequence(const TrainConfig& config, const TaskStream& stream) {
    config.validate();
    if (stream.tasks.empty()) throw ValueError("train_sequence: empty task stream");

    const double lambda = config.effective_lambda();
    const std::size_t capacity = config.effective_capacity();
    const std::size_t replay_batch = config.effective_replay_batch();

    NetShape shape{stream.d_in, config.hidden_dims, config.feature_dim, stream.total_classes};
    Rng init_rng(derive_seed(config.seed, kTagInit));
    TrainResult result;
    result.params = init_model(shape, init_rng);
    result.log.config = config;

    AdamState adam = init_adam(result.params, AdamConfig{config.lr});
    CentroidStore store;
    ReplayBuffer buffer(capacity);
    std::set<int> seen_classes;
    std::size_t global_step = 0;

    for (std::size_t k = 0; k < stream.tasks.size(); ++k) {
        const Task& task = stream.tasks[k];
        seen_classes.insert(task.classes.begin(), task.classes.end());
        const auto task_start = std::chrono::steady_clock::now();

        for (std::size_t epoch = 0; epoch < config.epochs_per_task; ++epoch) {
            std::vector<std::size_t> order(task.train.size());
            std::iota(order.begin(), order.end(), 0);
            Rng shuffle_rng(derive_seed(config.seed, kTagShuffle, k, epoch));
            shuffle_rng.shuffle(order);
            Rng replay_rng(derive_seed(config.seed, kTagReplay, k, epoch));

            for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
                const std::size_t end = std::min(begin + config.batch_size, order.size());
                std::vector<Sample> batch_samples;
                batch_samples.reserve(end - begin + replay_batch);
                for (std::size_t i = begin; i < end; ++i) batch_samples.push_back(task.train[order[i]]);
                const std::size_t current_rows = batch_samples.size();

                if (!buffer.empty()) {
                    const std::size_t n_replay = std::min(replay_batch, buffer.total_size());
                    if (n_replay > 0) {
                        auto replayed = buffer.sample_batch(n_replay, replay_rng);
                        batch_samples.insert(batch_samples.end(), replayed.begin(), replayed.end());
                    }
                }

                ForwardCache cache = forward(result.params, stack_features(batch_samples));
                const std::size_t icf_rows = config.icf_on_replay ? batch_samples.size() : current_rows;
                TotalLossResult loss =
                    total_loss(cache, stack_labels(batch_samples), store, lambda, seen_classes, icf_rows);
                if (!std::isfinite(loss.breakdown.total))
                    throw TrainingError("train_sequence: non-finite loss at step " +
                                        std::to_string(global_step) + " (task " + std::to_string(k + 1) +
                                        ", epoch " + std::to_string(epoch + 1) + "; mode=" +
                                        to_string(config.mode) + " lambda=" + format_compact(config.lambda) +
                                        " lr=" + format_compact(config.lr) +
                                        " seed=" + std::to_string(config.seed) + ")");

                Gradients grads = backward(result.params, cache, loss.dlogits, loss.dfeatures);
                adam_step(result.params, grads, adam);
                result.log.steps.push_back({global_step, k, epoch, loss.breakdown.ce,
                                            loss.breakdown.icf, loss.breakdown.total});
                ++global_step;
            }
        }

        // Post-task bookkeeping. Centroids are only worth maintaining when the
        // separation term can contribute; this keeps a lambda=0 run identical
        // to its replay-only counterpart, log and all.
        if (lambda > 0.0) update_store(store, result.params, task.train);
        if (capacity > 0) {
            Rng buffer_rng(derive_seed(config.seed, kTagBuffer, k));
            buffer.add_exemplars(task.train, buffer_rng);
        }

        result.log.task_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - task_start).count());

        std::vector<double> row;
        row.reserve(k + 1);
        for (std::size_t i = 0; i <= k; ++i)
            row.push_back(100.0 * evaluate(result.params, stream.tasks[i].test, seen_classes));
        result.log.accuracy.rows.push_back(std::move(row));
    }
    return result;
}

void RunLog::save_json(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["config"] = {{"mode", to_string(config.mode)},
                   {"lambda", config.lambda},
                   {"lr", config.lr},
                   {"epochs_per_task", config.epochs_per_task},
                   {"batch_size", config.batch_size},
                   {"buffer_capacity_per_class", config.buffer_capacity_per_class},
                   {"replay_batch_size", config.effective_replay_batch()},
                   {"icf_on_replay", config.icf_on_replay},
                   {"seed", config.seed},
                   {"hidden_dims", config.hidden_dims},
                   {"feature_dim", config.feature_dim}};
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& s : steps)
        trace.push_back({{"step", s.step},
                         {"task", s.task},
                         {"epoch", s.epoch},
                         {"ce", s.ce},
                         {"icf", s.icf},
                         {"total", s.total}});
    j["loss_trace"] = std::move(trace);
    j["accuracy_matrix"] = accuracy.rows;
    j["task_seconds"] = task_seconds;
    std::ofstream out(path);
    if (!out) throw IoError("RunLog: cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace carlab
