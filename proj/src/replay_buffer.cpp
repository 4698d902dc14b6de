#include "carlab/replay_buffer.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <string>

#include <json.hpp>

#include "carlab/errors.hpp"

namespace carlab {

std::size_t ReplayBuffer::total_size() const {
    std::size_t n = 0;
    for (const auto& [id, samples] : per_class_) n += samples.size();
    return n;
}

void ReplayBuffer::add_exemplars(std::span<const Sample> task_train, Rng& rng) {
    std::map<int, std::vector<const Sample*>> by_class;
    for (const Sample& s : task_train) by_class[s.label].push_back(&s);
    for (const auto& [label, members] : by_class)
        if (per_class_.count(label))
            throw ValueError("ReplayBuffer: class " + std::to_string(label) + " already stored");
    for (const auto& [label, members] : by_class) {
        const std::size_t keep = std::min(capacity_per_class_, members.size());
        // Uniform without replacement via a partial Fisher-Yates pass.
        std::vector<std::size_t> indices(members.size());
        std::iota(indices.begin(), indices.end(), 0);
        std::vector<Sample>& stored = per_class_[label];
        stored.reserve(keep);
        for (std::size_t i = 0; i < keep; ++i) {
            const std::size_t j = i + rng.below(indices.size() - i);
            std::swap(indices[i], indices[j]);
            stored.push_back(*members[indices[i]]);
        }
        if (keep == 0) per_class_.erase(label);
    }
}

std::vector<Sample> ReplayBuffer::sample_batch(std::size_t n, Rng& rng) const {
    if (per_class_.empty()) throw ValueError("ReplayBuffer: sample from empty buffer");
    if (n == 0) throw ValueError("ReplayBuffer: batch size must be >= 1");

    std::vector<const std::vector<Sample>*> lists;
    std::vector<int> order;
    for (const auto& [id, samples] : per_class_) order.push_back(id);
    rng.shuffle(order);
    for (int id : order) lists.push_back(&per_class_.at(id));

    std::vector<Sample> batch;
    batch.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        const auto& list = *lists[t % lists.size()];
        batch.push_back(list[rng.below(list.size())]);
    }
    return batch;
}

void ReplayBuffer::save_json(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["capacity_per_class"] = capacity_per_class_;
    nlohmann::json classes = nlohmann::json::object();
    for (const auto& [id, samples] : per_class_) {
        nlohmann::json vectors = nlohmann::json::array();
        for (const auto& s : samples) vectors.push_back(s.features);
        classes[std::to_string(id)] = std::move(vectors);
    }
    j["classes"] = std::move(classes);
    std::ofstream out(path);
    if (!out) throw IoError("ReplayBuffer: cannot write " + path.string());
    out << j.dump(2) << '\n';
}

ReplayBuffer ReplayBuffer::load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("ReplayBuffer: cannot read " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("ReplayBuffer: " + std::string(e.what()));
    }
    ReplayBuffer buffer(j.at("capacity_per_class").get<std::size_t>());
    for (const auto& [key, vectors] : j.at("classes").items()) {
        const int label = std::stoi(key);
        auto& stored = buffer.per_class_[label];
        for (const auto& v : vectors) stored.push_back(Sample{v.get<Vec>(), label});
        if (stored.size() > buffer.capacity_per_class_)
            throw ParseError("ReplayBuffer: class " + key + " exceeds capacity");
    }
    return buffer;
}

}  // namespace carlab
