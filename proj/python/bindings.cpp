#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "carlab/experiment.hpp"
#include "carlab/geometry.hpp"
#include "carlab/metrics.hpp"
#include "carlab/model.hpp"
#include "carlab/numerics.hpp"
#include "carlab/objective.hpp"
#include "carlab/replay_buffer.hpp"
#include "carlab/tasks.hpp"
#include "carlab/trainer.hpp"

namespace py = pybind11;
using namespace carlab;

PYBIND11_MODULE(_carlab, m) {
    m.doc() = "Continual-learning lab: cluster-aware replay with a feature-space "
              "separation penalty, sequential training, and retention metrics.";

    py::class_<Matrix>(m, "Matrix", py::buffer_protocol())
        .def(py::init<>())
        .def(py::init<std::size_t, std::size_t, double>(), py::arg("rows"), py::arg("cols"),
             py::arg("fill") = 0.0)
        .def(py::init([](py::buffer b) {
            py::buffer_info info = b.request();
            if (info.format != py::format_descriptor<double>::format() || info.ndim != 2)
                throw py::value_error("expected a 2-D float64 array");
            Matrix out(static_cast<std::size_t>(info.shape[0]), static_cast<std::size_t>(info.shape[1]));
            const auto row_stride = static_cast<std::size_t>(info.strides[0]);
            const auto col_stride = static_cast<std::size_t>(info.strides[1]);
            const char* base = static_cast<const char*>(info.ptr);
            for (std::size_t i = 0; i < out.rows; ++i)
                for (std::size_t j = 0; j < out.cols; ++j)
                    out(i, j) = *reinterpret_cast<const double*>(base + i * row_stride + j * col_stride);
            return out;
        }))
        .def_buffer([](Matrix& mat) {
            return py::buffer_info(mat.data.data(), sizeof(double),
                                   py::format_descriptor<double>::format(), 2,
                                   {mat.rows, mat.cols}, {sizeof(double) * mat.cols, sizeof(double)});
        })
        .def_readonly("rows", &Matrix::rows)
        .def_readonly("cols", &Matrix::cols)
        .def("__getitem__",
             [](const Matrix& mat, std::pair<std::size_t, std::size_t> ij) {
                 if (ij.first >= mat.rows || ij.second >= mat.cols) throw py::index_error();
                 return mat(ij.first, ij.second);
             })
        .def("__repr__", [](const Matrix& mat) {
            return "Matrix(" + std::to_string(mat.rows) + "x" + std::to_string(mat.cols) + ")";
        });

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("next_u64", &Rng::next_u64)
        .def("uniform", py::overload_cast<>(&Rng::uniform))
        .def("uniform", py::overload_cast<double, double>(&Rng::uniform), py::arg("lo"), py::arg("hi"))
        .def("normal", &Rng::normal)
        .def("below", &Rng::below, py::arg("n"));

    m.def("matmul", &matmul, py::arg("a"), py::arg("b"));
    m.def("transpose", &transpose, py::arg("m"));
    m.def("l2_normalize", &l2_normalize, py::arg("v"));
    m.def("l2_normalize_backward", &l2_normalize_backward, py::arg("v"), py::arg("upstream_grad"));
    m.def("finite_difference_gradient", &finite_difference_gradient, py::arg("f"), py::arg("at"),
          py::arg("step") = 1e-5);

    py::class_<NetShape>(m, "NetShape")
        .def(py::init([](std::size_t d_in, std::vector<std::size_t> hidden, std::size_t d_feat,
                         std::size_t n_classes) {
                 return NetShape{d_in, std::move(hidden), d_feat, n_classes};
             }),
             py::arg("d_in"), py::arg("hidden"), py::arg("d_feat"), py::arg("n_classes"))
        .def_readwrite("d_in", &NetShape::d_in)
        .def_readwrite("hidden", &NetShape::hidden)
        .def_readwrite("d_feat", &NetShape::d_feat)
        .def_readwrite("n_classes", &NetShape::n_classes);

    py::class_<ModelParams>(m, "ModelParams")
        .def_readonly("shape", &ModelParams::shape)
        .def("parameter_count", &ModelParams::parameter_count);

    py::class_<ForwardCache>(m, "ForwardCache")
        .def_readonly("features", &ForwardCache::features)
        .def_readonly("logits", &ForwardCache::logits);

    m.def("init_model", &init_model, py::arg("shape"), py::arg("rng"));
    m.def("forward", &forward, py::arg("params"), py::arg("batch"));
    m.def("save_checkpoint", &save_checkpoint, py::arg("params"), py::arg("path"));
    m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

    py::class_<CentroidStore>(m, "CentroidStore")
        .def(py::init<>())
        .def("insert", &CentroidStore::insert, py::arg("class_id"), py::arg("centroid"))
        .def("centroid", &CentroidStore::centroid, py::arg("class_id"))
        .def("entries", &CentroidStore::entries)
        .def("frozen_classes", &CentroidStore::frozen_classes)
        .def("__len__", &CentroidStore::size)
        .def("save_json", &CentroidStore::save_json, py::arg("path"))
        .def_static("load_json", &CentroidStore::load_json, py::arg("path"));

    m.def("compute_centroid", &compute_centroid, py::arg("class_features"));
    m.def(
        "update_store",
        [](CentroidStore& store, const ModelParams& params, const std::vector<Sample>& task_train) {
            update_store(store, params, task_train);
        },
        py::arg("store"), py::arg("params"), py::arg("task_train"));
    m.def(
        "icf_loss",
        [](const Vec& z, const CentroidStore& store) {
            IcfResult r = icf_loss(z, store);
            return py::make_tuple(r.loss, r.dloss_dz);
        },
        py::arg("z"), py::arg("store"));

    py::class_<LossBreakdown>(m, "LossBreakdown")
        .def_readonly("ce", &LossBreakdown::ce)
        .def_readonly("icf", &LossBreakdown::icf)
        .def_readonly("total", &LossBreakdown::total)
        .def_readonly("lambda_", &LossBreakdown::lambda);

    m.def(
        "cross_entropy",
        [](const Matrix& logits, const std::vector<int>& labels, const std::set<int>& active) {
            CrossEntropyResult r = cross_entropy(logits, labels, active);
            return py::make_tuple(r.loss, r.dlogits);
        },
        py::arg("logits"), py::arg("labels"), py::arg("active_classes"));
    m.def(
        "total_loss",
        [](const ForwardCache& cache, const std::vector<int>& labels, const CentroidStore& store,
           double lambda, const std::set<int>& active, std::size_t icf_row_count) {
            TotalLossResult r = total_loss(cache, labels, store, lambda, active, icf_row_count);
            return py::make_tuple(r.breakdown, r.dlogits, r.dfeatures);
        },
        py::arg("cache"), py::arg("labels"), py::arg("store"), py::arg("lambda_"),
        py::arg("active_classes"), py::arg("icf_row_count") = static_cast<std::size_t>(-1));

    py::class_<Sample>(m, "Sample")
        .def(py::init([](Vec features, int label) { return Sample{std::move(features), label}; }),
             py::arg("features"), py::arg("label"))
        .def_readwrite("features", &Sample::features)
        .def_readwrite("label", &Sample::label);

    py::class_<Task>(m, "Task")
        .def_readonly("train", &Task::train)
        .def_readonly("test", &Task::test)
        .def_readonly("classes", &Task::classes);

    py::class_<TaskStream>(m, "TaskStream")
        .def_readonly("tasks", &TaskStream::tasks)
        .def_readonly("d_in", &TaskStream::d_in)
        .def_readonly("total_classes", &TaskStream::total_classes);

    py::class_<SplitOptions>(m, "SplitOptions")
        .def(py::init<>())
        .def_readwrite("classes_per_task", &SplitOptions::classes_per_task)
        .def_readwrite("class_order", &SplitOptions::class_order)
        .def_readwrite("shuffle_order", &SplitOptions::shuffle_order)
        .def_readwrite("train_fraction", &SplitOptions::train_fraction)
        .def_readwrite("seed", &SplitOptions::seed);

    py::class_<SynthOptions>(m, "SynthOptions")
        .def(py::init<>())
        .def_readwrite("n_classes", &SynthOptions::n_classes)
        .def_readwrite("d_in", &SynthOptions::d_in)
        .def_readwrite("per_class_train", &SynthOptions::per_class_train)
        .def_readwrite("per_class_test", &SynthOptions::per_class_test)
        .def_readwrite("spread", &SynthOptions::spread);

    m.def("split_protocol", &split_protocol, py::arg("all_samples"), py::arg("options"));
    m.def("synth_gaussians", &synth_gaussians, py::arg("options"), py::arg("rng"));
    m.def("load_csv", &load_csv, py::arg("path"));
    m.def("save_csv", &save_csv, py::arg("samples"), py::arg("path"));

    py::class_<ReplayBuffer>(m, "ReplayBuffer")
        .def(py::init<std::size_t>(), py::arg("capacity_per_class") = 20)
        .def("add_exemplars",
             [](ReplayBuffer& buffer, const std::vector<Sample>& task_train, Rng& rng) {
                 buffer.add_exemplars(task_train, rng);
             },
             py::arg("task_train"), py::arg("rng"))
        .def("sample_batch", &ReplayBuffer::sample_batch, py::arg("n"), py::arg("rng"))
        .def("total_size", &ReplayBuffer::total_size)
        .def("class_count", &ReplayBuffer::class_count)
        .def_property_readonly("capacity_per_class", &ReplayBuffer::capacity_per_class)
        .def("per_class", &ReplayBuffer::per_class)
        .def("save_json", &ReplayBuffer::save_json, py::arg("path"))
        .def_static("load_json", &ReplayBuffer::load_json, py::arg("path"));

    py::enum_<Mode>(m, "Mode")
        .value("finetune", Mode::Finetune)
        .value("replay_only", Mode::ReplayOnly)
        .value("icf_only", Mode::IcfOnly)
        .value("car", Mode::Car);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("mode", &TrainConfig::mode)
        .def_readwrite("lambda_", &TrainConfig::lambda)
        .def_readwrite("lr", &TrainConfig::lr)
        .def_readwrite("epochs_per_task", &TrainConfig::epochs_per_task)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("buffer_capacity_per_class", &TrainConfig::buffer_capacity_per_class)
        .def_readwrite("replay_batch_size", &TrainConfig::replay_batch_size)
        .def_readwrite("icf_on_replay", &TrainConfig::icf_on_replay)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("hidden_dims", &TrainConfig::hidden_dims)
        .def_readwrite("feature_dim", &TrainConfig::feature_dim);

    py::class_<StepRecord>(m, "StepRecord")
        .def_readonly("step", &StepRecord::step)
        .def_readonly("task", &StepRecord::task)
        .def_readonly("epoch", &StepRecord::epoch)
        .def_readonly("ce", &StepRecord::ce)
        .def_readonly("icf", &StepRecord::icf)
        .def_readonly("total", &StepRecord::total);

    py::class_<AccuracyMatrix>(m, "AccuracyMatrix")
        .def(py::init<>())
        .def(py::init([](std::vector<std::vector<double>> rows) {
                 return AccuracyMatrix{std::move(rows)};
             }),
             py::arg("rows"))
        .def_readwrite("rows", &AccuracyMatrix::rows)
        .def("task_count", &AccuracyMatrix::task_count);

    py::class_<RunLog>(m, "RunLog")
        .def_readonly("steps", &RunLog::steps)
        .def_readonly("task_seconds", &RunLog::task_seconds)
        .def_readonly("accuracy", &RunLog::accuracy)
        .def("save_json", &RunLog::save_json, py::arg("path"));

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("log", &TrainResult::log)
        .def_readonly("params", &TrainResult::params);

    m.def("train_sequence", &train_sequence, py::arg("config"), py::arg("stream"),
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "evaluate",
        [](const ModelParams& params, const std::vector<Sample>& test_set,
           const std::set<int>& active) { return evaluate(params, test_set, active); },
        py::arg("params"), py::arg("test_set"), py::arg("active_classes"));
    m.def("accuracy_from_logits", &accuracy_from_logits, py::arg("logits"), py::arg("labels"),
          py::arg("active_classes"));

    m.def("average_accuracy", &average_accuracy, py::arg("matrix"), py::arg("after_task"));
    m.def("forgetting", &forgetting, py::arg("matrix"));
    m.def("emit_results", &emit_results, py::arg("matrix"), py::arg("log"), py::arg("dir"));

    py::class_<ExperimentSpec>(m, "ExperimentSpec")
        .def(py::init<>())
        .def_readwrite("synthetic", &ExperimentSpec::synthetic)
        .def_readwrite("csv_path", &ExperimentSpec::csv_path)
        .def_readwrite("synth_classes", &ExperimentSpec::synth_classes)
        .def_readwrite("synth_dim", &ExperimentSpec::synth_dim)
        .def_readwrite("synth_train", &ExperimentSpec::synth_train)
        .def_readwrite("synth_test", &ExperimentSpec::synth_test)
        .def_readwrite("spread", &ExperimentSpec::spread)
        .def_readwrite("classes_per_task", &ExperimentSpec::classes_per_task)
        .def_readwrite("train_fraction", &ExperimentSpec::train_fraction)
        .def_readwrite("ablation", &ExperimentSpec::ablation)
        .def_readwrite("modes", &ExperimentSpec::modes)
        .def_readwrite("lambdas", &ExperimentSpec::lambdas)
        .def_readwrite("seeds", &ExperimentSpec::seeds)
        .def_readwrite("lr", &ExperimentSpec::lr)
        .def_readwrite("epochs", &ExperimentSpec::epochs)
        .def_readwrite("batch", &ExperimentSpec::batch)
        .def_readwrite("capacity", &ExperimentSpec::capacity)
        .def_readwrite("hidden", &ExperimentSpec::hidden)
        .def_readwrite("feature_dim", &ExperimentSpec::feature_dim)
        .def_readwrite("out_dir", &ExperimentSpec::out_dir);

    py::class_<RunOutcome>(m, "RunOutcome")
        .def_readonly("mode", &RunOutcome::mode)
        .def_readonly("lambda_", &RunOutcome::lambda)
        .def_readonly("seed", &RunOutcome::seed)
        .def_readonly("ok", &RunOutcome::ok)
        .def_readonly("final_avg_accuracy", &RunOutcome::final_avg_accuracy)
        .def_readonly("error", &RunOutcome::error);

    m.def("run_experiments", &run_experiments, py::arg("spec"),
          py::call_guard<py::gil_scoped_release>());
    m.def("build_stream", &build_stream, py::arg("spec"), py::arg("run_seed"));
}
