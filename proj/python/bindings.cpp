#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "clrimpute/checkpoint.hpp"
#include "clrimpute/error.hpp"
#include "clrimpute/metrics.hpp"
#include "clrimpute/pipeline.hpp"
#include "clrimpute/synth.hpp"

namespace py = pybind11;
using namespace clr;

namespace {

using IndexArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::optional<Dims> to_dims(const std::optional<std::tuple<std::size_t, std::size_t, std::size_t>>& d) {
  if (!d) return std::nullopt;
  return Dims{std::get<0>(*d), std::get<1>(*d), std::get<2>(*d)};
}

py::tuple dims_tuple(const Dims& d) { return py::make_tuple(d.stations, d.parameters, d.slots); }

std::vector<EntryIndex> to_indices(const IndexArray& i, const IndexArray& j, const IndexArray& k) {
  if (i.ndim() != 1 || j.ndim() != 1 || k.ndim() != 1 || i.size() != j.size() || i.size() != k.size()) {
    throw ConfigError("i, j, k must be 1-d arrays of equal length");
  }
  std::vector<EntryIndex> out(static_cast<std::size_t>(i.size()));
  const auto* pi = i.data();
  const auto* pj = j.data();
  const auto* pk = k.data();
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (pi[n] < 0 || pj[n] < 0 || pk[n] < 0) throw BoundsError("negative index");
    out[n] = {static_cast<std::size_t>(pi[n]), static_cast<std::size_t>(pj[n]),
              static_cast<std::size_t>(pk[n])};
  }
  return out;
}

SparseTensor tensor_from_arrays(const IndexArray& i, const IndexArray& j, const IndexArray& k,
                                const RealArray& values,
                                const std::optional<std::tuple<std::size_t, std::size_t, std::size_t>>& dims) {
  const auto idx = to_indices(i, j, k);
  if (values.ndim() != 1 || static_cast<std::size_t>(values.size()) != idx.size()) {
    throw ConfigError("values must be a 1-d array matching the indices");
  }
  std::vector<Entry> entries(idx.size());
  Dims d{0, 0, 0};
  for (std::size_t n = 0; n < idx.size(); ++n) {
    entries[n] = {idx[n], values.data()[n]};
    d.stations = std::max(d.stations, idx[n].i + 1);
    d.parameters = std::max(d.parameters, idx[n].j + 1);
    d.slots = std::max(d.slots, idx[n].k + 1);
  }
  return SparseTensor(to_dims(dims).value_or(d), std::move(entries));
}

py::dict entry_arrays(std::span<const Entry> entries) {
  const auto n = static_cast<py::ssize_t>(entries.size());
  IndexArray i(n), j(n), k(n);
  RealArray v(n);
  for (py::ssize_t p = 0; p < n; ++p) {
    const auto& e = entries[static_cast<std::size_t>(p)];
    i.mutable_data()[p] = static_cast<std::int64_t>(e.index.i);
    j.mutable_data()[p] = static_cast<std::int64_t>(e.index.j);
    k.mutable_data()[p] = static_cast<std::int64_t>(e.index.k);
    v.mutable_data()[p] = e.value;
  }
  py::dict out;
  out["i"] = i;
  out["j"] = j;
  out["k"] = k;
  out["value"] = v;
  return out;
}

SplitAssignment labels_to_assignment(const SparseTensor& t, const py::array_t<std::uint8_t>& labels) {
  if (labels.ndim() != 1 || static_cast<std::size_t>(labels.size()) != t.size()) {
    throw ConfigError("labels must have one entry per observation");
  }
  SplitAssignment a;
  a.labels.resize(t.size());
  for (std::size_t n = 0; n < t.size(); ++n) {
    const auto l = labels.data()[n];
    if (l > 2) throw ConfigError("labels must be 0 (train), 1 (validation) or 2 (test)");
    a.labels[n] = static_cast<Label>(l);
  }
  return a;
}

py::list report_records(const TrainReport& r) {
  py::list out;
  for (const auto& e : r.epochs) {
    py::dict d;
    d["epoch"] = e.epoch;
    d["objective"] = e.objective;
    d["val_rmse"] = e.val_rmse;
    d["val_mae"] = e.val_mae;
    d["eta"] = e.eta;
    d["lambda"] = e.lambda;
    out.append(d);
  }
  return out;
}

struct FittedModel {
  Checkpoint checkpoint;
  TrainReport report;
  std::vector<double> gb_q_trace;

  RealArray predict(const IndexArray& i, const IndexArray& j, const IndexArray& k, bool normalized) const {
    const auto idx = to_indices(i, j, k);
    const Dims& d = model_dims(checkpoint.model);
    RealArray out(static_cast<py::ssize_t>(idx.size()));
    for (std::size_t n = 0; n < idx.size(); ++n) {
      if (!in_bounds(idx[n], d)) throw BoundsError("index outside model dimensions");
      double v = clr::predict(checkpoint.model, idx[n]);
      if (!normalized && checkpoint.norm) v = checkpoint.norm->invert(v);
      out.mutable_data()[n] = v;
    }
    return out;
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Causal-convolutional low-rank tensor imputation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto data = py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  (void)data;

  py::class_<SparseTensor>(m, "SparseTensor")
      .def(py::init(&tensor_from_arrays), py::arg("i"), py::arg("j"), py::arg("k"),
           py::arg("values"), py::arg("dims") = py::none())
      .def_property_readonly("dims", [](const SparseTensor& t) { return dims_tuple(t.dims()); })
      .def("__len__", &SparseTensor::size)
      .def("arrays", [](const SparseTensor& t) { return entry_arrays(t.entries()); },
           "Entries as a dict of numpy arrays i, j, k, value.");

  m.def("load_coo",
        [](const std::filesystem::path& path,
           const std::optional<std::tuple<std::size_t, std::size_t, std::size_t>>& dims) {
          return load_coo(path, to_dims(dims));
        },
        py::arg("path"), py::arg("dims") = py::none());
  m.def("write_coo", py::overload_cast<const std::filesystem::path&, const SparseTensor&, bool>(&write_coo),
        py::arg("path"), py::arg("tensor"), py::arg("header") = true);

  m.def("split",
        [](const SparseTensor& t, std::tuple<double, double, double> ratios, std::uint64_t seed) {
          const auto a = split(t, {std::get<0>(ratios), std::get<1>(ratios), std::get<2>(ratios)}, seed);
          py::array_t<std::uint8_t> out(static_cast<py::ssize_t>(a.labels.size()));
          for (std::size_t n = 0; n < a.labels.size(); ++n) {
            out.mutable_data()[n] = static_cast<std::uint8_t>(a.labels[n]);
          }
          return out;
        },
        py::arg("tensor"), py::arg("ratios") = std::make_tuple(0.1, 0.2, 0.7), py::arg("seed") = 0,
        "Per-entry labels: 0 train, 1 validation, 2 test.");

  py::class_<FittedModel>(m, "Model")
      .def_property_readonly("kind", [](const FittedModel& f) { return std::string(model_name(f.checkpoint.model)); })
      .def_property_readonly("dims", [](const FittedModel& f) { return dims_tuple(model_dims(f.checkpoint.model)); })
      .def_property_readonly("eta", [](const FittedModel& f) { return f.checkpoint.eta; })
      .def_property_readonly("lambda_", [](const FittedModel& f) { return f.checkpoint.lambda; })
      .def_property_readonly("train_seconds", [](const FittedModel& f) { return f.checkpoint.train_seconds; })
      .def_property_readonly("stop", [](const FittedModel& f) { return std::string(to_string(f.report.stop)); })
      .def_property_readonly("history", [](const FittedModel& f) { return report_records(f.report); })
      .def_property_readonly("gb_q_trace", [](const FittedModel& f) { return f.gb_q_trace; })
      .def("predict", &FittedModel::predict, py::arg("i"), py::arg("j"), py::arg("k"),
           py::arg("normalized") = false)
      .def("save", [](const FittedModel& f, const std::filesystem::path& p) { write_checkpoint(p, f.checkpoint); },
           py::arg("path"));

  m.def("load_model",
        [](const std::filesystem::path& p) { return FittedModel{read_checkpoint(p), {}, {}}; },
        py::arg("path"));

  m.def("fit",
        [](const SparseTensor& t, const py::array_t<std::uint8_t>& labels, const std::string& model,
           std::size_t rank, std::size_t kernel, double eta, double lambda, std::size_t max_epochs,
           double tol, std::uint64_t seed, bool tune, std::size_t particles, bool normalize) {
          FitOptions fo;
          fo.kind = parse_model_kind(model);
          fo.rank = rank;
          fo.kernel = kernel;
          fo.train = {eta, lambda, max_epochs, tol, seed};
          fo.init_seed = seed;
          if (tune) {
            SwarmConfig sc;
            sc.particles = particles;
            sc.seed = seed;
            fo.swarm = sc;
          }
          const auto prepared = prepare(t, labels_to_assignment(t, labels), normalize);
          py::gil_scoped_release release;
          auto outcome = fit(prepared, fo);
          return FittedModel{std::move(outcome.checkpoint), std::move(outcome.report),
                             std::move(outcome.gb_q_trace)};
        },
        py::arg("tensor"), py::arg("labels"), py::arg("model") = "clr", py::arg("rank") = 10,
        py::arg("kernel") = 3, py::arg("eta") = 0.01, py::arg("lambda_") = 0.001,
        py::arg("max_epochs") = 1000, py::arg("tol") = 1e-5, py::arg("seed") = 0,
        py::arg("tune") = false, py::arg("particles") = 10, py::arg("normalize") = true);

  m.def("rmse", [](const RealArray& truth, const RealArray& pred) {
    if (truth.size() != pred.size()) throw ConfigError("length mismatch");
    std::vector<Scored> s(static_cast<std::size_t>(truth.size()));
    for (std::size_t n = 0; n < s.size(); ++n) s[n] = {truth.data()[n], pred.data()[n]};
    return rmse(s);
  }, py::arg("truth"), py::arg("prediction"));
  m.def("mae", [](const RealArray& truth, const RealArray& pred) {
    if (truth.size() != pred.size()) throw ConfigError("length mismatch");
    std::vector<Scored> s(static_cast<std::size_t>(truth.size()));
    for (std::size_t n = 0; n < s.size(); ++n) s[n] = {truth.data()[n], pred.data()[n]};
    return mae(s);
  }, py::arg("truth"), py::arg("prediction"));

  m.def("generate",
        [](std::tuple<std::size_t, std::size_t, std::size_t> dims, std::size_t rank, std::size_t kernel,
           bool smooth, double rho, double noise, double observed_fraction, std::uint64_t seed) {
          SynthSpec spec;
          spec.dims = *to_dims(dims);
          spec.rank = rank;
          spec.kernel = kernel;
          spec.mode = smooth ? TemporalMode::smooth_ar : TemporalMode::iid;
          spec.rho = rho;
          spec.noise = noise;
          spec.observed_fraction = observed_fraction;
          spec.seed = seed;
          auto r = generate(spec);
          RealArray truth({static_cast<py::ssize_t>(spec.dims.stations),
                           static_cast<py::ssize_t>(spec.dims.parameters),
                           static_cast<py::ssize_t>(spec.dims.slots)});
          std::copy(r.truth.begin(), r.truth.end(), truth.mutable_data());
          return py::make_tuple(std::move(r.observed), truth);
        },
        py::arg("dims") = std::make_tuple(10, 8, 100), py::arg("rank") = 3, py::arg("kernel") = 3,
        py::arg("smooth") = true, py::arg("rho") = 0.9, py::arg("noise") = 0.01,
        py::arg("observed_fraction") = 0.2, py::arg("seed") = 1,
        "Synthetic tensor with planted structure; returns (observed, dense noiseless truth).");
}
