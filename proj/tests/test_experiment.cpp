#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "carlab/errors.hpp"
#include "carlab/experiment.hpp"

using namespace carlab;

namespace {

std::filesystem::path write_config(const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / "carlab_config_test.cfg";
    std::ofstream out(path);
    out << body;
    return path;
}

ExperimentSpec tiny_synth_spec(const std::string& out_dir) {
    ExperimentSpec spec;
    spec.synthetic = true;
    spec.synth_classes = 4;
    spec.synth_dim = 5;
    spec.synth_train = 12;
    spec.synth_test = 6;
    spec.epochs = 1;
    spec.batch = 8;
    spec.capacity = 4;
    spec.hidden = {8};
    spec.feature_dim = 4;
    spec.out_dir = out_dir;
    return spec;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("defaults carry the standard protocol") {
    ExperimentSpec spec;
    CHECK(spec.lambdas == std::vector<double>{1.0});
    CHECK(spec.lr == 0.001);
    CHECK(spec.epochs == 20);
    CHECK(spec.batch == 32);
    CHECK(spec.capacity == 20);
    CHECK(spec.modes == std::vector<Mode>{Mode::Car});
    // Dataset choice has no default.
    CHECK_THROWS_AS(spec.validate(), UsageError);
}

TEST_CASE("config file keys populate the spec and flags take precedence") {
    ExperimentSpec spec;
    const auto path = write_config(
        "# protocol\n"
        "mode = icf_only\n"
        "epochs = 5\n"
        "lambda = 0.5,2\n"
        "synthetic = true\n"
        "capacity=7\n");
    apply_config_file(spec, path);
    CHECK(spec.modes == std::vector<Mode>{Mode::IcfOnly});
    CHECK(spec.epochs == 5);
    CHECK(spec.lambdas == std::vector<double>{0.5, 2.0});
    CHECK(spec.capacity == 7);
    CHECK(spec.synthetic);

    // A later flag-style entry overrides the file value.
    apply_config_entry(spec, "epochs", "3");
    CHECK(spec.epochs == 3);
    std::filesystem::remove(path);
}

TEST_CASE("unknown keys and type mismatches are usage errors") {
    ExperimentSpec spec;
    try {
        apply_config_entry(spec, "eppochs", "3");
        FAIL("unknown key accepted");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("eppochs") != std::string::npos);
    }
    CHECK_THROWS_AS(apply_config_entry(spec, "epochs", "banana"), UsageError);
    CHECK_THROWS_AS(apply_config_entry(spec, "lambda", "0.1,oops"), UsageError);
    CHECK_THROWS_AS(apply_config_entry(spec, "synthetic", "maybe"), UsageError);
    CHECK_THROWS_AS(apply_config_entry(spec, "mode", "sgd"), UsageError);

    const auto path = write_config("no_equals_sign\n");
    CHECK_THROWS_AS(apply_config_file(spec, path), UsageError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(apply_config_file(spec, "/nonexistent.cfg"), UsageError);
}

TEST_CASE("spec validation catches contradictions") {
    ExperimentSpec spec = tiny_synth_spec("/tmp/unused");
    spec.csv_path = "also.csv";
    CHECK_THROWS_AS(spec.validate(), UsageError);  // both sources

    spec = tiny_synth_spec("/tmp/unused");
    spec.synth_classes = 5;  // not divisible by classes_per_task=2
    CHECK_THROWS_AS(spec.validate(), UsageError);

    spec = tiny_synth_spec("/tmp/unused");
    spec.lambdas = {-1.0};
    CHECK_THROWS_AS(spec.validate(), UsageError);

    spec = tiny_synth_spec("/tmp/unused");
    spec.epochs = 0;
    CHECK_THROWS_AS(spec.validate(), UsageError);
}

TEST_CASE("run_name formats lambda compactly") {
    CHECK(run_name(Mode::Car, 1.0, 7) == "car_lambda1_seed7");
    CHECK(run_name(Mode::ReplayOnly, 0.1, 0) == "replay_only_lambda0.1_seed0");
    CHECK(run_name(Mode::Finetune, 10.0, 3) == "finetune_lambda10_seed3");
}

TEST_CASE("ablation produces exactly the four mode directories") {
    const auto out = std::filesystem::temp_directory_path() / "carlab_exp_ablation";
    std::filesystem::remove_all(out);
    ExperimentSpec spec = tiny_synth_spec(out.string());
    spec.ablation = true;
    auto outcomes = run_experiments(spec);
    REQUIRE(outcomes.size() == 4);
    for (const auto& o : outcomes) CHECK(o.ok);

    std::set<std::string> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(out))
        if (entry.is_directory()) dirs.insert(entry.path().filename().string());
    CHECK(dirs == std::set<std::string>{"finetune_lambda1_seed0", "replay_only_lambda1_seed0",
                                        "icf_only_lambda1_seed0", "car_lambda1_seed0"});

    const std::string summary = slurp(out / "summary.csv");
    CHECK(summary.find("mode,lambda,seed,final_avg_accuracy\n") == 0);
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 5);  // header + 4 rows
    std::filesystem::remove_all(out);
}

TEST_CASE("lambda sweep yields one directory and summary row per value") {
    const auto out = std::filesystem::temp_directory_path() / "carlab_exp_sweep";
    std::filesystem::remove_all(out);
    ExperimentSpec spec = tiny_synth_spec(out.string());
    spec.lambdas = {0.1, 1.0, 10.0};
    auto outcomes = run_experiments(spec);
    REQUIRE(outcomes.size() == 3);
    for (const auto& o : outcomes) {
        CHECK(o.ok);
        CHECK(std::filesystem::exists(o.dir / "accuracy_matrix.csv"));
        CHECK(std::filesystem::exists(o.dir / "runlog.json"));
        CHECK(std::filesystem::exists(o.dir / "model.json"));
    }
    CHECK(std::filesystem::exists(out / "car_lambda0.1_seed0"));
    CHECK(std::filesystem::exists(out / "car_lambda1_seed0"));
    CHECK(std::filesystem::exists(out / "car_lambda10_seed0"));
    const std::string summary = slurp(out / "summary.csv");
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 4);
    std::filesystem::remove_all(out);
}

TEST_CASE("identical specs reproduce identical result files") {
    const auto out_a = std::filesystem::temp_directory_path() / "carlab_exp_det_a";
    const auto out_b = std::filesystem::temp_directory_path() / "carlab_exp_det_b";
    std::filesystem::remove_all(out_a);
    std::filesystem::remove_all(out_b);
    ExperimentSpec spec = tiny_synth_spec(out_a.string());
    run_experiments(spec);
    spec.out_dir = out_b.string();
    run_experiments(spec);

    for (const char* name :
         {"accuracy_matrix.csv", "avg_accuracy.csv", "forgetting.csv", "loss_trace.csv", "model.json"}) {
        CHECK(slurp(out_a / "car_lambda1_seed0" / name) == slurp(out_b / "car_lambda1_seed0" / name));
    }
    CHECK(slurp(out_a / "summary.csv") == slurp(out_b / "summary.csv"));
    std::filesystem::remove_all(out_a);
    std::filesystem::remove_all(out_b);
}

TEST_CASE("invalid CAR_LAB_THREADS is a usage error") {
    ExperimentSpec spec = tiny_synth_spec(
        (std::filesystem::temp_directory_path() / "carlab_exp_threads").string());
    setenv("CAR_LAB_THREADS", "banana", 1);
    CHECK_THROWS_AS(run_experiments(spec), UsageError);
    setenv("CAR_LAB_THREADS", "0", 1);
    CHECK_THROWS_AS(run_experiments(spec), UsageError);
    unsetenv("CAR_LAB_THREADS");
    std::filesystem::remove_all(spec.out_dir);
}

#ifdef CARLAB_CLI_BIN
TEST_CASE("the binary rejects malformed flags and missing dataset choices") {
    const std::string bin = CARLAB_CLI_BIN;
    CHECK(std::system((bin + " run --epochs banana --synthetic >/dev/null 2>&1").c_str()) != 0);
    CHECK(std::system((bin + " run --epochs 1 >/dev/null 2>&1").c_str()) != 0);  // no dataset
    CHECK(std::system((bin + " run --synthetic --csv x.csv >/dev/null 2>&1").c_str()) != 0);
    CHECK(std::system((bin + " run --synthetic --mode car --ablation >/dev/null 2>&1").c_str()) != 0);
}
#endif

TEST_CASE("a failing run leaves a diagnostic and others complete") {
    const auto out = std::filesystem::temp_directory_path() / "carlab_exp_fail";
    std::filesystem::remove_all(out);
    ExperimentSpec spec = tiny_synth_spec(out.string());
    spec.lambdas = {1.0};
    spec.lr = 1e200;  // overflows the forward pass into non-finite values
    auto outcomes = run_experiments(spec);
    REQUIRE(outcomes.size() == 1);
    CHECK(!outcomes[0].ok);
    CHECK(std::filesystem::exists(outcomes[0].dir / "ABORT.txt"));
    const std::string summary = slurp(out / "summary.csv");
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 1);  // header only
    std::filesystem::remove_all(out);
}
