// car_lab: configure, run, sweep, and ablate continual-learning experiments.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carlab/errors.hpp"
#include "carlab/experiment.hpp"
#include "carlab/text.hpp"

namespace {

struct RawFlags {
    std::string config_path;
    std::string mode;
    bool ablation = false;
    std::string lambdas;
    std::string seeds;
    bool synthetic = false;
    std::string csv_path;
    std::size_t classes_per_task = 0;
    std::size_t epochs = 0;
    std::size_t batch = 0;
    long long capacity = -1;
    std::string out_dir;
};

// Precedence: flags over config file over defaults.
carlab::ExperimentSpec assemble_spec(const CLI::App& run_cmd, const RawFlags& flags) {
    carlab::ExperimentSpec spec;
    if (run_cmd.count("--config")) carlab::apply_config_file(spec, flags.config_path);
    if (run_cmd.count("--mode")) carlab::apply_config_entry(spec, "mode", flags.mode);
    if (run_cmd.count("--ablation")) spec.ablation = true;
    if (run_cmd.count("--mode") && spec.ablation)
        throw carlab::UsageError("--mode and --ablation are mutually exclusive");
    if (run_cmd.count("--lambda")) carlab::apply_config_entry(spec, "lambda", flags.lambdas);
    if (run_cmd.count("--seed")) carlab::apply_config_entry(spec, "seed", flags.seeds);
    if (run_cmd.count("--synthetic")) spec.synthetic = true;
    if (run_cmd.count("--csv")) spec.csv_path = flags.csv_path;
    if (run_cmd.count("--classes-per-task")) spec.classes_per_task = flags.classes_per_task;
    if (run_cmd.count("--epochs")) spec.epochs = flags.epochs;
    if (run_cmd.count("--batch")) spec.batch = flags.batch;
    if (run_cmd.count("--capacity")) spec.capacity = static_cast<std::size_t>(flags.capacity);
    if (run_cmd.count("--out")) spec.out_dir = flags.out_dir;
    return spec;
}

int do_run(const CLI::App& run_cmd, const RawFlags& flags) {
    carlab::ExperimentSpec spec = assemble_spec(run_cmd, flags);
    auto outcomes = carlab::run_experiments(spec);
    bool all_ok = true;
    for (const auto& o : outcomes) {
        if (o.ok) {
            std::printf("done  %-40s final_avg=%.2f%%\n",
                        carlab::run_name(o.mode, o.lambda, o.seed).c_str(), o.final_avg_accuracy);
        } else {
            all_ok = false;
            std::fprintf(stderr, "FAIL  %s: %s\n", carlab::run_name(o.mode, o.lambda, o.seed).c_str(),
                         o.error.c_str());
        }
    }
    std::printf("summary: %s/summary.csv\n", spec.out_dir.c_str());
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"car_lab: continual-learning experiments with cluster-aware replay"};
    app.require_subcommand(1);

    RawFlags flags;
    CLI::App* run_cmd = app.add_subcommand("run", "train a (mode, lambda, seed) grid and emit results");
    run_cmd->add_option("--config", flags.config_path, "key=value config file");
    run_cmd->add_option("--mode", flags.mode, "finetune|replay_only|icf_only|car");
    run_cmd->add_flag("--ablation", flags.ablation, "run all four modes");
    run_cmd->add_option("--lambda", flags.lambdas, "comma-separated lambda sweep");
    run_cmd->add_option("--seed", flags.seeds, "comma-separated seed list");
    run_cmd->add_flag("--synthetic", flags.synthetic, "use the Gaussian-cluster dataset");
    run_cmd->add_option("--csv", flags.csv_path, "labeled-vector CSV dataset");
    run_cmd->add_option("--classes-per-task", flags.classes_per_task, "classes per task");
    run_cmd->add_option("--epochs", flags.epochs, "epochs per task");
    run_cmd->add_option("--batch", flags.batch, "batch size");
    run_cmd->add_option("--capacity", flags.capacity, "replay exemplars per class")
        ->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--out", flags.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        return do_run(*run_cmd, flags);
    } catch (const carlab::UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
