#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "carlab/errors.hpp"
#include "carlab/metrics.hpp"
#include "carlab/rng.hpp"
#include "carlab/trainer.hpp"

using namespace carlab;

namespace {

// The running example used throughout: accuracies measured after each task.
AccuracyMatrix reference_matrix() {
    return AccuracyMatrix{{{57},
                           {50, 67},
                           {28, 10, 72},
                           {12, 12, 40, 70},
                           {12, 12, 40, 65, 70}}};
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("average_accuracy over the reference matrix") {
    AccuracyMatrix m = reference_matrix();
    CHECK(average_accuracy(m, 1) == doctest::Approx(57.0).epsilon(1e-12));
    CHECK(std::abs(average_accuracy(m, 2) - 58.5) <= 0.05);
    CHECK(std::abs(average_accuracy(m, 3) - 36.7) <= 0.05);
    CHECK(std::abs(average_accuracy(m, 4) - 33.5) <= 0.05);
    CHECK(std::abs(average_accuracy(m, 5) - 39.8) <= 0.05);
    CHECK_THROWS_AS(average_accuracy(m, 0), std::out_of_range);
    CHECK_THROWS_AS(average_accuracy(m, 6), std::out_of_range);
}

TEST_CASE("average_accuracy is permutation invariant") {
    AccuracyMatrix a{{{30, 60, 90}}};
    AccuracyMatrix b{{{90, 30, 60}}};
    CHECK(average_accuracy(a, 1) == average_accuracy(b, 1));
}

TEST_CASE("forgetting on the reference matrix and degenerate cases") {
    std::vector<double> f = forgetting(reference_matrix());
    CHECK(f == std::vector<double>{45, 55, 32, 5});

    AccuracyMatrix constant{{{50}, {50, 50}, {50, 50, 50}}};
    CHECK(forgetting(constant) == std::vector<double>{0, 0});

    // Monotone-improving column: peak is the final value, so no forgetting.
    AccuracyMatrix rising{{{10}, {20, 30}, {40, 50, 60}}};
    CHECK(forgetting(rising) == std::vector<double>{0, 0});

    AccuracyMatrix single{{{57}}};
    CHECK_THROWS_AS(forgetting(single), ValueError);
}

TEST_CASE("forgetting is nonnegative on random matrices") {
    Rng rng(61);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.below(6);
        AccuracyMatrix m;
        for (std::size_t k = 0; k < n; ++k) {
            std::vector<double> row(k + 1);
            for (double& x : row) x = rng.uniform(0.0, 100.0);
            m.rows.push_back(std::move(row));
        }
        for (double f : forgetting(m)) CHECK(f >= 0.0);
    }
}

TEST_CASE("emit_results writes the documented plot data") {
    AccuracyMatrix m = reference_matrix();
    RunLog log;
    log.steps = {{0, 0, 0, 0.5, -0.25, 0.375}, {1, 0, 0, 0.25, -0.5, 0.125}};
    const auto dir = std::filesystem::temp_directory_path() / "carlab_emit_test";
    std::filesystem::remove_all(dir);
    emit_results(m, log, dir);

    CHECK(slurp(dir / "avg_accuracy.csv") ==
          "after_task,avg_acc\n1,57.0\n2,58.5\n3,36.7\n4,33.5\n5,39.8\n");
    CHECK(slurp(dir / "forgetting.csv") == "task_i,forgetting\n1,45\n2,55\n3,32\n4,5\n");

    const std::string trace = slurp(dir / "loss_trace.csv");
    CHECK(trace.find("step,ce,icf,total\n") == 0);
    CHECK(trace.find("0,0.5,-0.25,0.375") != std::string::npos);
    CHECK(trace.find("1,0.25,-0.5,0.125") != std::string::npos);

    // Matrix file round-trips exactly.
    AccuracyMatrix parsed = parse_accuracy_matrix_csv(dir / "accuracy_matrix.csv");
    CHECK(parsed == m);
    std::filesystem::remove_all(dir);
}

TEST_CASE("emit_results for an empty run yields header-only files") {
    AccuracyMatrix empty;
    RunLog log;
    const auto dir = std::filesystem::temp_directory_path() / "carlab_emit_empty";
    std::filesystem::remove_all(dir);
    emit_results(empty, log, dir);
    CHECK(slurp(dir / "accuracy_matrix.csv") == "after_task,task_i,acc\n");
    CHECK(slurp(dir / "avg_accuracy.csv") == "after_task,avg_acc\n");
    CHECK(slurp(dir / "forgetting.csv") == "task_i,forgetting\n");
    CHECK(slurp(dir / "loss_trace.csv") == "step,ce,icf,total\n");
    std::filesystem::remove_all(dir);
}

TEST_CASE("accuracy matrix csv round trip preserves non-round values") {
    AccuracyMatrix m{{{100.0 / 3.0}, {12.5, 100.0 / 7.0}}};
    RunLog log;
    const auto dir = std::filesystem::temp_directory_path() / "carlab_emit_exact";
    std::filesystem::remove_all(dir);
    emit_results(m, log, dir);
    CHECK(parse_accuracy_matrix_csv(dir / "accuracy_matrix.csv") == m);
    std::filesystem::remove_all(dir);
}

TEST_CASE("emit_results refuses unwritable paths") {
    AccuracyMatrix m = reference_matrix();
    RunLog log;
    CHECK_THROWS_AS(emit_results(m, log, "/proc/carlab_forbidden/out"), IoError);
}
