#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "carlab/trainer.hpp"

namespace carlab {

// Everything a sweep needs: one dataset source, the training protocol, and
// the (mode, lambda, seed) grid. Every field has a default except the
// dataset choice.
struct ExperimentSpec {
    // Dataset source: exactly one of the two.
    bool synthetic = false;
    std::string csv_path;

    std::size_t synth_classes = 10;
    std::size_t synth_dim = 16;
    std::size_t synth_train = 200;
    std::size_t synth_test = 100;
    double spread = 1.0;

    std::size_t classes_per_task = 2;
    double train_fraction = 0.8;  // ingested data; synthetic uses its own counts
    bool shuffle_classes = false;

    bool ablation = false;
    std::vector<Mode> modes = {Mode::Car};
    std::vector<double> lambdas = {1.0};
    std::vector<std::uint64_t> seeds = {0};

    double lr = 0.001;
    std::size_t epochs = 20;
    std::size_t batch = 32;
    std::size_t capacity = 20;
    std::size_t replay_batch = 0;
    bool icf_on_replay = false;
    std::vector<std::size_t> hidden = {64, 64};
    std::size_t feature_dim = 32;

    std::string out_dir = "results";

    void validate() const;                 // throws UsageError
    std::vector<Mode> resolved_modes() const;
};

// Flat key=value config file ('#' starts a comment). Unknown keys and type
// mismatches are UsageErrors naming the offender.
void apply_config_file(ExperimentSpec& spec, const std::filesystem::path& path);

// Applies one key=value pair (the config-file grammar); flags reuse this.
void apply_config_entry(ExperimentSpec& spec, const std::string& key, const std::string& value);

std::string run_name(Mode mode, double lambda, std::uint64_t seed);

struct RunOutcome {
    Mode mode = Mode::Car;
    double lambda = 0.0;
    std::uint64_t seed = 0;
    bool ok = false;
    double final_avg_accuracy = 0.0;
    std::string error;
    std::filesystem::path dir;
};

// Trains every (mode, lambda, seed) combination, emits per-run result files
// under <out>/<run_name>/ and a summary CSV. Runs execute in parallel worker
// slots capped by the CAR_LAB_THREADS environment variable; outputs do not
// depend on the schedule. Returns one outcome per scheduled run, in grid
// order.
std::vector<RunOutcome> run_experiments(const ExperimentSpec& spec);

// Builds the task stream a given run trains on (also used by tests).
TaskStream build_stream(const ExperimentSpec& spec, std::uint64_t run_seed);

}  // namespace carlab
