#include "carlab/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>

#include "carlab/errors.hpp"
#include "carlab/numerics.hpp"
#include "carlab/text.hpp"

namespace carlab {

namespace {

// Sub-seed tags for independent derived streams.
constexpr std::uint64_t kTagOrder = 0x5350u;  // class-order shuffle
constexpr std::uint64_t kTagSplit = 0x5351u;  // per-class train/test split

std::map<int, std::vector<std::size_t>> group_by_label(const std::vector<Sample>& samples) {
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < samples.size(); ++i) groups[samples[i].label].push_back(i);
    return groups;
}

}  // namespace

std::set<int> TaskStream::classes_through(std::size_t task_index) const {
    std::set<int> seen;
    for (std::size_t k = 0; k <= task_index && k < tasks.size(); ++k)
        seen.insert(tasks[k].classes.begin(), tasks[k].classes.end());
    return seen;
}

TaskStream split_protocol(const std::vector<Sample>& all_samples, const SplitOptions& options) {
    if (all_samples.empty()) throw ValueError("split_protocol: empty dataset");
    if (options.classes_per_task == 0) throw ValueError("split_protocol: classes_per_task must be >= 1");
    if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0))
        throw ValueError("split_protocol: train_fraction must lie in (0, 1)");

    const std::size_t d_in = all_samples.front().features.size();
    int max_label = 0;
    for (const auto& s : all_samples) {
        if (s.features.size() != d_in) throw ShapeError("split_protocol: inconsistent feature dims");
        if (s.label < 0) throw ValueError("split_protocol: negative label");
        max_label = std::max(max_label, s.label);
    }

    auto groups = group_by_label(all_samples);
    if (groups.size() % options.classes_per_task != 0)
        throw ValueError("split_protocol: " + std::to_string(groups.size()) +
                         " classes not divisible by " + std::to_string(options.classes_per_task));
    for (const auto& [label, indices] : groups)
        if (indices.size() < 2)
            throw ValueError("split_protocol: class " + std::to_string(label) + " has fewer than 2 samples");

    std::vector<int> order;
    if (!options.class_order.empty()) {
        order = options.class_order;
        std::set<int> requested(order.begin(), order.end());
        if (requested.size() != order.size()) throw ValueError("split_protocol: duplicate class in order");
        for (int c : order)
            if (!groups.count(c)) throw ValueError("split_protocol: unknown class " + std::to_string(c) + " in order");
        if (requested.size() != groups.size()) throw ValueError("split_protocol: class order incomplete");
    } else {
        for (const auto& [label, indices] : groups) order.push_back(label);
        if (options.shuffle_order) {
            Rng rng(derive_seed(options.seed, kTagOrder));
            rng.shuffle(order);
        }
    }

    TaskStream stream;
    stream.d_in = d_in;
    stream.total_classes = static_cast<std::size_t>(max_label) + 1;
    const std::size_t n_tasks = order.size() / options.classes_per_task;
    stream.tasks.resize(n_tasks);
    for (std::size_t t = 0; t < n_tasks; ++t) {
        Task& task = stream.tasks[t];
        for (std::size_t j = 0; j < options.classes_per_task; ++j) {
            const int label = order[t * options.classes_per_task + j];
            task.classes.insert(label);
            auto indices = groups.at(label);
            Rng rng(derive_seed(options.seed, kTagSplit, static_cast<std::uint64_t>(label)));
            rng.shuffle(indices);
            // Keep both sides nonempty regardless of rounding.
            const auto n = indices.size();
            std::size_t n_train = static_cast<std::size_t>(
                std::llround(options.train_fraction * static_cast<double>(n)));
            n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
            for (std::size_t i = 0; i < n; ++i) {
                const Sample& s = all_samples[indices[i]];
                (i < n_train ? task.train : task.test).push_back(s);
            }
        }
    }
    return stream;
}

std::vector<Sample> synth_gaussians(const SynthOptions& options, Rng& rng) {
    if (options.n_classes < 2) throw ValueError("synth_gaussians: need at least 2 classes");
    if (options.d_in < 2) throw ValueError("synth_gaussians: need at least 2 dimensions");
    if (options.spread < 0.0) throw ValueError("synth_gaussians: negative spread");

    std::vector<Sample> samples;
    const std::size_t per_class = options.per_class_train + options.per_class_test;
    samples.reserve(options.n_classes * per_class);
    for (std::size_t c = 0; c < options.n_classes; ++c) {
        Vec direction(options.d_in);
        for (double& x : direction) x = rng.normal();
        Vec mean = l2_normalize(direction);
        for (double& x : mean) x *= 4.0;
        for (std::size_t i = 0; i < per_class; ++i) {
            Sample s;
            s.label = static_cast<int>(c);
            s.features.resize(options.d_in);
            for (std::size_t d = 0; d < options.d_in; ++d)
                s.features[d] = mean[d] + options.spread * rng.normal();
            samples.push_back(std::move(s));
        }
    }
    return samples;
}

std::vector<Sample> load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_csv: cannot open " + path.string());

    std::vector<Sample> samples;
    std::string line;
    std::size_t line_no = 0;
    std::size_t expected_fields = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty()) continue;
        auto fields = split(view, ',');
        const bool maybe_header = first_content_line && !parse_double(fields[0]).has_value();
        first_content_line = false;
        if (maybe_header) continue;  // header row
        if (fields.size() < 2)
            throw ParseError("load_csv: line " + std::to_string(line_no) + ": expected label and features");
        if (expected_fields == 0) {
            expected_fields = fields.size();
        } else if (fields.size() != expected_fields) {
            throw ParseError("load_csv: line " + std::to_string(line_no) + ": expected " +
                             std::to_string(expected_fields) + " fields, got " +
                             std::to_string(fields.size()));
        }
        auto label = parse_int(fields[0]);
        if (!label || *label < 0)
            throw ParseError("load_csv: line " + std::to_string(line_no) + ": bad label '" + fields[0] + "'");
        Sample s;
        s.label = static_cast<int>(*label);
        s.features.reserve(fields.size() - 1);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            auto value = parse_double(fields[i]);
            if (!value)
                throw ParseError("load_csv: line " + std::to_string(line_no) + ": bad feature '" +
                                 fields[i] + "'");
            s.features.push_back(*value);
        }
        samples.push_back(std::move(s));
    }
    if (samples.empty()) throw ValueError("load_csv: empty dataset in " + path.string());
    return samples;
}

void save_csv(const std::vector<Sample>& samples, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_csv: cannot write " + path.string());
    for (const auto& s : samples) {
        out << s.label;
        for (double f : s.features) out << ',' << format_g17(f);
        out << '\n';
    }
}

Matrix stack_features(const std::vector<Sample>& samples) {
    if (samples.empty()) throw ValueError("stack_features: empty sample list");
    Matrix m(samples.size(), samples.front().features.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].features.size() != m.cols)
            throw ShapeError("stack_features: inconsistent feature dims");
        std::copy(samples[i].features.begin(), samples[i].features.end(), m.data.begin() + static_cast<std::ptrdiff_t>(i * m.cols));
    }
    return m;
}

std::vector<int> stack_labels(const std::vector<Sample>& samples) {
    std::vector<int> labels(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) labels[i] = samples[i].label;
    return labels;
}

}  // namespace carlab
