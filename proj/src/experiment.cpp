#include "carlab/experiment.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <thread>

#include "carlab/errors.hpp"
#include "carlab/geometry.hpp"
#include "carlab/replay_buffer.hpp"
#include "carlab/text.hpp"

namespace carlab {

namespace {

constexpr std::uint64_t kTagData = 0x4441u;  // dataset stream per run seed

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw UsageError("config: key '" + key + "' expects a boolean, got '" + value + "'");
}

double parse_double_or_throw(const std::string& key, const std::string& value) {
    auto parsed = parse_double(value);
    if (!parsed) throw UsageError("config: key '" + key + "' expects a number, got '" + value + "'");
    return *parsed;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
    auto parsed = parse_uint(value);
    if (!parsed) throw UsageError("config: key '" + key + "' expects a count, got '" + value + "'");
    return static_cast<std::size_t>(*parsed);
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& part : split(value, ','))
        out.push_back(parse_double_or_throw(key, std::string(trim(part))));
    if (out.empty()) throw UsageError("config: key '" + key + "' expects a nonempty list");
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& value) {
    std::vector<std::uint64_t> out;
    for (const auto& part : split(value, ',')) {
        auto parsed = parse_uint(trim(part));
        if (!parsed) throw UsageError("config: key '" + key + "' expects seeds, got '" + part + "'");
        out.push_back(*parsed);
    }
    if (out.empty()) throw UsageError("config: key '" + key + "' expects a nonempty list");
    return out;
}

std::vector<std::size_t> parse_count_list(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    for (const auto& part : split(value, ','))
        out.push_back(parse_count(key, std::string(trim(part))));
    return out;
}

std::size_t worker_slots(std::size_t n_jobs) {
    std::size_t slots = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CAR_LAB_THREADS")) {
        auto parsed = parse_uint(env);
        if (!parsed || *parsed == 0)
            throw UsageError("CAR_LAB_THREADS must be a positive integer, got '" + std::string(env) + "'");
        slots = std::min<std::size_t>(slots, static_cast<std::size_t>(*parsed));
    }
    return std::min(slots, std::max<std::size_t>(1, n_jobs));
}

}  // namespace

void ExperimentSpec::validate() const {
    if (synthetic == !csv_path.empty())
        throw UsageError("exactly one dataset source required: --synthetic or --csv PATH");
    if (resolved_modes().empty()) throw UsageError("no training mode selected");
    if (lambdas.empty()) throw UsageError("lambda list must be nonempty");
    for (double l : lambdas)
        if (l < 0.0) throw UsageError("lambda must be nonnegative");
    if (seeds.empty()) throw UsageError("seed list must be nonempty");
    if (epochs == 0) throw UsageError("epochs must be >= 1");
    if (batch == 0) throw UsageError("batch must be >= 1");
    if (classes_per_task == 0) throw UsageError("classes_per_task must be >= 1");
    if (lr <= 0.0) throw UsageError("lr must be positive");
    if (feature_dim == 0) throw UsageError("feature_dim must be >= 1");
    for (std::size_t h : hidden)
        if (h == 0) throw UsageError("hidden dims must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw UsageError("train_fraction must lie in (0, 1)");
    if (synthetic) {
        if (synth_classes < 2) throw UsageError("synth_classes must be >= 2");
        if (synth_dim < 2) throw UsageError("synth_dim must be >= 2");
        if (synth_train == 0 || synth_test == 0)
            throw UsageError("synth_train and synth_test must be >= 1");
        if (synth_classes % classes_per_task != 0)
            throw UsageError("synth_classes must be divisible by classes_per_task");
        if (spread < 0.0) throw UsageError("spread must be nonnegative");
    }
    if (out_dir.empty()) throw UsageError("output directory must be nonempty");
}

std::vector<Mode> ExperimentSpec::resolved_modes() const {
    if (ablation) return {Mode::Finetune, Mode::ReplayOnly, Mode::IcfOnly, Mode::Car};
    return modes;
}

void apply_config_entry(ExperimentSpec& spec, const std::string& key, const std::string& value) {
    if (key == "mode") {
        try {
            spec.modes = {mode_from_string(value)};
        } catch (const UsageError&) {
            throw UsageError("config: key 'mode' has unknown value '" + value + "'");
        }
    } else if (key == "ablation") {
        spec.ablation = parse_bool(key, value);
    } else if (key == "lambda") {
        spec.lambdas = parse_double_list(key, value);
    } else if (key == "seed") {
        spec.seeds = parse_seed_list(key, value);
    } else if (key == "synthetic") {
        spec.synthetic = parse_bool(key, value);
    } else if (key == "csv") {
        spec.csv_path = value;
    } else if (key == "classes_per_task") {
        spec.classes_per_task = parse_count(key, value);
    } else if (key == "epochs") {
        spec.epochs = parse_count(key, value);
    } else if (key == "batch") {
        spec.batch = parse_count(key, value);
    } else if (key == "capacity") {
        spec.capacity = parse_count(key, value);
    } else if (key == "out") {
        spec.out_dir = value;
    } else if (key == "lr") {
        spec.lr = parse_double_or_throw(key, value);
    } else if (key == "replay_batch") {
        spec.replay_batch = parse_count(key, value);
    } else if (key == "icf_on_replay") {
        spec.icf_on_replay = parse_bool(key, value);
    } else if (key == "spread") {
        spec.spread = parse_double_or_throw(key, value);
    } else if (key == "synth_classes") {
        spec.synth_classes = parse_count(key, value);
    } else if (key == "synth_dim") {
        spec.synth_dim = parse_count(key, value);
    } else if (key == "synth_train") {
        spec.synth_train = parse_count(key, value);
    } else if (key == "synth_test") {
        spec.synth_test = parse_count(key, value);
    } else if (key == "hidden") {
        spec.hidden = parse_count_list(key, value);
    } else if (key == "feature_dim") {
        spec.feature_dim = parse_count(key, value);
    } else if (key == "train_fraction") {
        spec.train_fraction = parse_double_or_throw(key, value);
    } else if (key == "shuffle_classes") {
        spec.shuffle_classes = parse_bool(key, value);
    } else {
        throw UsageError("config: unknown key '" + key + "'");
    }
}

void apply_config_file(ExperimentSpec& spec, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("config: cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto view = trim(line);
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = trim(view.substr(0, hash));
        if (view.empty()) continue;
        auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw UsageError("config: line " + std::to_string(line_no) + " is not key=value");
        const std::string key{trim(view.substr(0, eq))};
        const std::string value{trim(view.substr(eq + 1))};
        if (key.empty()) throw UsageError("config: line " + std::to_string(line_no) + " has empty key");
        apply_config_entry(spec, key, value);
    }
}

std::string run_name(Mode mode, double lambda, std::uint64_t seed) {
    return to_string(mode) + "_lambda" + format_compact(lambda) + "_seed" + std::to_string(seed);
}

TaskStream build_stream(const ExperimentSpec& spec, std::uint64_t run_seed) {
    const std::uint64_t data_seed = derive_seed(run_seed, kTagData);
    SplitOptions split;
    split.classes_per_task = spec.classes_per_task;
    split.shuffle_order = spec.shuffle_classes;
    split.seed = data_seed;
    if (spec.synthetic) {
        SynthOptions synth{spec.synth_classes, spec.synth_dim, spec.synth_train, spec.synth_test,
                           spec.spread};
        Rng rng(data_seed);
        auto samples = synth_gaussians(synth, rng);
        split.train_fraction = static_cast<double>(spec.synth_train) /
                               static_cast<double>(spec.synth_train + spec.synth_test);
        return split_protocol(samples, split);
    }
    split.train_fraction = spec.train_fraction;
    return split_protocol(load_csv(spec.csv_path), split);
}

namespace {

struct RunJob {
    Mode mode;
    double lambda;
    std::uint64_t seed;
};

void execute_run(const ExperimentSpec& spec, const RunJob& job, RunOutcome& outcome) {
    outcome.mode = job.mode;
    outcome.lambda = job.lambda;
    outcome.seed = job.seed;
    outcome.dir = std::filesystem::path(spec.out_dir) / run_name(job.mode, job.lambda, job.seed);
    try {
        TaskStream stream = build_stream(spec, job.seed);
        TrainConfig config;
        config.mode = job.mode;
        config.lambda = job.lambda;
        config.lr = spec.lr;
        config.epochs_per_task = spec.epochs;
        config.batch_size = spec.batch;
        config.buffer_capacity_per_class = spec.capacity;
        config.replay_batch_size = spec.replay_batch;
        config.icf_on_replay = spec.icf_on_replay;
        config.seed = job.seed;
        config.hidden_dims = spec.hidden;
        config.feature_dim = spec.feature_dim;

        TrainResult result = train_sequence(config, stream);
        emit_results(result.log.accuracy, result.log, outcome.dir);
        result.log.save_json(outcome.dir / "runlog.json");
        save_checkpoint(result.params, outcome.dir / "model.json");
        outcome.final_avg_accuracy = average_accuracy(result.log.accuracy, stream.tasks.size());
        outcome.ok = true;
    } catch (const std::exception& e) {
        outcome.ok = false;
        outcome.error = e.what();
        std::error_code ec;
        std::filesystem::create_directories(outcome.dir, ec);
        std::ofstream diag(outcome.dir / "ABORT.txt");
        diag << "run " << run_name(job.mode, job.lambda, job.seed) << " failed\n" << e.what() << '\n';
    }
}

}  // namespace

std::vector<RunOutcome> run_experiments(const ExperimentSpec& spec) {
    spec.validate();

    std::vector<RunJob> jobs;
    for (Mode mode : spec.resolved_modes())
        for (double lambda : spec.lambdas)
            for (std::uint64_t seed : spec.seeds) jobs.push_back({mode, lambda, seed});

    std::error_code ec;
    std::filesystem::create_directories(spec.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + spec.out_dir + ": " + ec.message());

    std::vector<RunOutcome> outcomes(jobs.size());
    const std::size_t n_workers = worker_slots(jobs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            execute_run(spec, jobs[i], outcomes[i]);
        }
    };
    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::thread> workers;
        workers.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) workers.emplace_back(work);
        for (auto& t : workers) t.join();
    }

    std::ofstream summary(std::filesystem::path(spec.out_dir) / "summary.csv");
    if (!summary) throw IoError("cannot write summary.csv under " + spec.out_dir);
    summary << "mode,lambda,seed,final_avg_accuracy\n";
    for (const auto& o : outcomes)
        if (o.ok)
            summary << to_string(o.mode) << ',' << format_compact(o.lambda) << ',' << o.seed << ','
                    << format_g17(o.final_avg_accuracy) << '\n';
    return outcomes;
}

}  // namespace carlab
