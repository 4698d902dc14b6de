#pragma once

#include <filesystem>
#include <vector>

namespace carlab {

struct RunLog;

// Lower-triangular record: rows[k][i] is the accuracy (in percent) on task i
// measured after training task k. Row k has exactly k+1 entries.
struct AccuracyMatrix {
    std::vector<std::vector<double>> rows;

    std::size_t task_count() const { return rows.size(); }

    bool operator==(const AccuracyMatrix&) const = default;
};

// Mean of row `after_task` (1-based). Throws std::out_of_range beyond rows.
double average_accuracy(const AccuracyMatrix& m, std::size_t after_task);

// F_i = max_{k >= i} rows[k][i] - rows[N-1][i] for every task but the last,
// which has no post-training measurements. Nonnegative by construction since
// the max includes the final row. Needs at least two rows.
std::vector<double> forgetting(const AccuracyMatrix& m);

// Plot-data files: accuracy matrix (long form), average-accuracy curve,
// per-task forgetting, and the per-step loss trace.
void emit_results(const AccuracyMatrix& m, const RunLog& log, const std::filesystem::path& dir);

// Parses a file written by emit_results back into a matrix.
AccuracyMatrix parse_accuracy_matrix_csv(const std::filesystem::path& path);

}  // namespace carlab
