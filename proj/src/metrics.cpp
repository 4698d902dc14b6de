#include "carlab/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <string>

#include "carlab/errors.hpp"
#include "carlab/text.hpp"
#include "carlab/trainer.hpp"

namespace carlab {

double average_accuracy(const AccuracyMatrix& m, std::size_t after_task) {
    if (after_task < 1 || after_task > m.rows.size())
        throw std::out_of_range("average_accuracy: after_task " + std::to_string(after_task) +
                                " outside 1.." + std::to_string(m.rows.size()));
    const auto& row = m.rows[after_task - 1];
    double sum = 0.0;
    for (double a : row) sum += a;
    return sum / static_cast<double>(row.size());
}

std::vector<double> forgetting(const AccuracyMatrix& m) {
    const std::size_t n = m.rows.size();
    if (n < 2) throw ValueError("forgetting: need at least two rows of history");
    std::vector<double> result(n - 1);
    for (std::size_t i = 0; i < n - 1; ++i) {
        double peak = m.rows[i][i];
        for (std::size_t k = i; k < n; ++k) peak = std::max(peak, m.rows[k][i]);
        result[i] = peak - m.rows[n - 1][i];
    }
    return result;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("emit_results: cannot write " + path.string());
    return out;
}

}  // namespace

void emit_results(const AccuracyMatrix& m, const RunLog& log, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("emit_results: cannot create " + dir.string() + ": " + ec.message());

    {
        auto out = open_csv(dir / "accuracy_matrix.csv");
        out << "after_task,task_i,acc\n";
        for (std::size_t k = 0; k < m.rows.size(); ++k)
            for (std::size_t i = 0; i < m.rows[k].size(); ++i)
                out << (k + 1) << ',' << (i + 1) << ',' << format_g17(m.rows[k][i]) << '\n';
    }
    {
        // One decimal, matching the resolution the averages are read at.
        auto out = open_csv(dir / "avg_accuracy.csv");
        out << "after_task,avg_acc\n";
        for (std::size_t k = 1; k <= m.rows.size(); ++k)
            out << k << ',' << format_fixed1(average_accuracy(m, k)) << '\n';
    }
    {
        auto out = open_csv(dir / "forgetting.csv");
        out << "task_i,forgetting\n";
        if (m.rows.size() >= 2) {
            const auto values = forgetting(m);
            for (std::size_t i = 0; i < values.size(); ++i)
                out << (i + 1) << ',' << format_g17(values[i]) << '\n';
        }
    }
    {
        auto out = open_csv(dir / "loss_trace.csv");
        out << "step,ce,icf,total\n";
        for (const auto& s : log.steps)
            out << s.step << ',' << format_g17(s.ce) << ',' << format_g17(s.icf) << ','
                << format_g17(s.total) << '\n';
    }
}

AccuracyMatrix parse_accuracy_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("parse_accuracy_matrix_csv: cannot read " + path.string());
    AccuracyMatrix m;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto view = trim(line);
        if (view.empty() || line_no == 1) continue;  // header
        auto fields = split(view, ',');
        if (fields.size() != 3)
            throw ParseError("parse_accuracy_matrix_csv: line " + std::to_string(line_no));
        auto after = parse_uint(fields[0]);
        auto task = parse_uint(fields[1]);
        auto acc = parse_double(fields[2]);
        if (!after || !task || !acc)
            throw ParseError("parse_accuracy_matrix_csv: line " + std::to_string(line_no));
        if (*after != m.rows.size() && *after != m.rows.size() + 1)
            throw ParseError("parse_accuracy_matrix_csv: rows out of order at line " +
                             std::to_string(line_no));
        if (*after == m.rows.size() + 1) m.rows.emplace_back();
        if (*task != m.rows.back().size() + 1)
            throw ParseError("parse_accuracy_matrix_csv: entries out of order at line " +
                             std::to_string(line_no));
        m.rows.back().push_back(*acc);
    }
    return m;
}

}  // namespace carlab
