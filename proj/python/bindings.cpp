/* Copyright 2026 The ptsim Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "ptsim/cli.h"
#include "ptsim/mesh.h"
#include "ptsim/perf_model.h"
#include "ptsim/pt_model.h"
#include "ptsim/run_config.h"
#include "ptsim/tensor_parallel.h"
#include "ptsim/track_parallel.h"
#include "ptsim/transformer.h"

namespace py = pybind11;

namespace {

using ptsim::Tensor;

template <typename T>
py::array_t<T> ToNumpy(const Tensor<T>& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  py::array_t<T> out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

py::list EventsToPython(const ptsim::SyncStats& stats) {
  py::list events;
  for (const auto& e : stats.events) {
    py::dict d;
    d["seq_no"] = e.seq_no;
    d["layer_index"] = e.layer_index;
    d["kind"] = "allreduce";
    d["participants"] = e.participants;
    d["elements"] = e.elements;
    d["payload_bytes"] = e.payload_bytes;
    events.append(d);
  }
  return events;
}

ptsim::Arch ParseArch(const std::string& arch) {
  if (arch == "dense-tp" || arch == "dense_tp") return ptsim::Arch::kDenseTp;
  if (arch == "pt") return ptsim::Arch::kPt;
  throw ptsim::ConfigError("arch must be \"dense-tp\" or \"pt\"");
}

// Dispatches on the run's element width.
template <typename Fn>
py::object WithWidth(int element_width, Fn&& fn) {
  if (element_width == 64) return fn(double{});
  if (element_width == 32) return fn(float{});
  throw ptsim::ConfigError("element_width must be 32 or 64");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Track-parallel transformer simulator: numerics, mesh runtime and "
            "analytic serving model.";

  py::register_exception<ptsim::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ptsim::DimensionError>(m, "DimensionError",
                                                PyExc_ValueError);
  py::register_exception<ptsim::InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ptsim::ProtocolError>(m, "ProtocolError",
                                               PyExc_RuntimeError);
  py::register_exception<ptsim::IoError>(m, "IoError", PyExc_OSError);

  py::class_<ptsim::ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("d_model", &ptsim::ModelConfig::d_model)
      .def_readwrite("n_layers", &ptsim::ModelConfig::n_layers)
      .def_readwrite("n_heads", &ptsim::ModelConfig::n_heads)
      .def_readwrite("n_kv_heads", &ptsim::ModelConfig::n_kv_heads)
      .def_readwrite("head_dim", &ptsim::ModelConfig::head_dim)
      .def_readwrite("d_ff", &ptsim::ModelConfig::d_ff)
      .def_readwrite("vocab_size", &ptsim::ModelConfig::vocab_size)
      .def_readwrite("max_seq", &ptsim::ModelConfig::max_seq)
      .def_readwrite("norm_eps", &ptsim::ModelConfig::norm_eps)
      .def_readwrite("rope_base", &ptsim::ModelConfig::rope_base)
      .def("validate", &ptsim::ModelConfig::Validate)
      .def("__repr__", [](const ptsim::ModelConfig& c) {
        std::ostringstream s;
        s << "ModelConfig(d_model=" << c.d_model << ", n_layers=" << c.n_layers
          << ", n_heads=" << c.n_heads << ", n_kv_heads=" << c.n_kv_heads
          << ", head_dim=" << c.head_dim << ", d_ff=" << c.d_ff
          << ", vocab_size=" << c.vocab_size << ")";
        return s.str();
      });

  m.def("make_model_config", &ptsim::MakeModelConfig, py::arg("d_model"),
        py::arg("n_layers"), py::arg("n_heads"), py::arg("n_kv_heads"),
        py::arg("vocab_size"), py::arg("max_seq"));

  py::class_<ptsim::PTConfig>(m, "PTConfig")
      .def(py::init([](int n_tracks, int block_depth,
                       const ptsim::ModelConfig& track,
                       const std::string& reduce_op) {
             ptsim::PTConfig c{n_tracks, block_depth, track,
                               ptsim::ParseReduceOp(reduce_op)};
             c.Validate();
             return c;
           }),
           py::arg("n_tracks"), py::arg("block_depth"), py::arg("track"),
           py::arg("reduce_op") = "sum")
      .def_readwrite("n_tracks", &ptsim::PTConfig::n_tracks)
      .def_readwrite("block_depth", &ptsim::PTConfig::block_depth)
      .def_readwrite("track", &ptsim::PTConfig::track)
      .def_property_readonly("reduce_op", [](const ptsim::PTConfig& c) {
        return std::string(ptsim::ReduceOpName(c.reduce_op));
      });

  m.def("count_fusions", &ptsim::CountFusions);
  m.def("pt_counterpart",
        [](const ptsim::ModelConfig& dense, int n_tracks, int block_depth) {
          return ptsim::PtCounterpart(dense, n_tracks, block_depth);
        });
  m.def("dense_counterpart", &ptsim::DenseCounterpart);
  m.def("structural_preset", [](const std::string& name, int block_depth) {
    auto p = ptsim::MakeStructuralPreset(name, block_depth);
    return py::make_tuple(p.dense, p.pt);
  });

  py::class_<ptsim::HardwareProfile>(m, "HardwareProfile")
      .def(py::init([](double flops, double bw, double latency, int bytes) {
             ptsim::HardwareProfile hw{flops, bw, latency, bytes};
             hw.Validate();
             return hw;
           }),
           py::arg("flops_per_sec"), py::arg("link_bandwidth_bytes_per_sec"),
           py::arg("per_collective_latency_sec"), py::arg("element_bytes"))
      .def_readonly("flops_per_sec", &ptsim::HardwareProfile::flops_per_sec)
      .def_readonly("link_bandwidth_bytes_per_sec",
                    &ptsim::HardwareProfile::link_bandwidth_bytes_per_sec)
      .def_readonly("per_collective_latency_sec",
                    &ptsim::HardwareProfile::per_collective_latency_sec)
      .def_readonly("element_bytes", &ptsim::HardwareProfile::element_bytes);

  py::class_<ptsim::PerfEstimate>(m, "PerfEstimate")
      .def_readonly("ttft_sec", &ptsim::PerfEstimate::ttft_sec)
      .def_readonly("tpot_sec", &ptsim::PerfEstimate::tpot_sec)
      .def_readonly("throughput_tokens_per_sec",
                    &ptsim::PerfEstimate::throughput_tokens_per_sec)
      .def_property_readonly("breakdown", [](const ptsim::PerfEstimate& e) {
        py::dict d;
        d["compute_sec"] = e.breakdown.compute_sec;
        d["collective_latency_sec"] = e.breakdown.collective_latency_sec;
        d["collective_transfer_sec"] = e.breakdown.collective_transfer_sec;
        return d;
      });

  m.def("sync_count",
        [](const std::string& arch, int layers, int block_depth) {
          return ptsim::SyncCount(ParseArch(arch), layers, block_depth);
        },
        py::arg("arch"), py::arg("layers"), py::arg("block_depth") = 1);
  m.def("sync_reduction_fraction", &ptsim::SyncReductionFraction);
  m.def("collective_cost", &ptsim::CollectiveCost, py::arg("elements"),
        py::arg("n_devices"), py::arg("hw"));
  m.def("estimate_dense_tp",
        [](const ptsim::ModelConfig& cfg, int n_devices, int input_len,
           int output_len, int batch, const ptsim::HardwareProfile& hw) {
          return ptsim::EstimateDenseTp(cfg, n_devices,
                                        {input_len, output_len, batch}, hw);
        },
        py::arg("cfg"), py::arg("n_devices"), py::arg("input_len"),
        py::arg("output_len"), py::arg("batch"), py::arg("hw"));
  m.def("estimate_pt",
        [](const ptsim::PTConfig& cfg, int input_len, int output_len, int batch,
           const ptsim::HardwareProfile& hw) {
          return ptsim::EstimatePt(cfg, {input_len, output_len, batch}, hw);
        },
        py::arg("cfg"), py::arg("input_len"), py::arg("output_len"),
        py::arg("batch"), py::arg("hw"));

  m.def("seeded_prompt", &ptsim::SeededPrompt, py::arg("length"),
        py::arg("seed"), py::arg("vocab_size"));

  m.def("dense_forward",
        [](const std::vector<int>& tokens, const ptsim::ModelConfig& cfg,
           std::uint64_t seed, int element_width) {
          return WithWidth(element_width, [&](auto tag) -> py::object {
            using T = decltype(tag);
            const auto logits = [&] {
              py::gil_scoped_release release;
              return ptsim::DenseForward<T>(tokens, cfg,
                                            ptsim::MakeWeightSet<T>(cfg, seed));
            }();
            return ToNumpy(logits);
          });
        },
        py::arg("tokens"), py::arg("cfg"), py::arg("seed"),
        py::arg("element_width") = 64);

  m.def("pt_forward_sequential",
        [](const std::vector<int>& tokens, const ptsim::PTConfig& cfg,
           std::uint64_t seed, int element_width) {
          return WithWidth(element_width, [&](auto tag) -> py::object {
            using T = decltype(tag);
            const auto logits = [&] {
              py::gil_scoped_release release;
              return ptsim::PTForwardSequential<T>(
                  tokens, cfg, ptsim::MakePTWeightSet<T>(cfg, seed));
            }();
            return ToNumpy(logits);
          });
        },
        py::arg("tokens"), py::arg("cfg"), py::arg("seed"),
        py::arg("element_width") = 64);

  m.def("run_pt_parallel",
        [](const std::vector<int>& tokens, const ptsim::PTConfig& cfg,
           std::uint64_t seed, int element_width) {
          return WithWidth(element_width, [&](auto tag) -> py::object {
            using T = decltype(tag);
            const auto result = [&] {
              py::gil_scoped_release release;
              ptsim::Mesh<T> mesh(cfg.n_tracks);
              return ptsim::RunPtParallel<T>(
                  tokens, cfg, ptsim::MakePTWeightSet<T>(cfg, seed), mesh);
            }();
            return py::make_tuple(ToNumpy(result.logits),
                                  EventsToPython(result.stats));
          });
        },
        py::arg("tokens"), py::arg("cfg"), py::arg("seed"),
        py::arg("element_width") = 64);

  m.def("run_tp_forward",
        [](const std::vector<int>& tokens, const ptsim::ModelConfig& cfg,
           int n_shards, std::uint64_t seed, int element_width) {
          return WithWidth(element_width, [&](auto tag) -> py::object {
            using T = decltype(tag);
            const auto result = [&] {
              py::gil_scoped_release release;
              const auto sharded = ptsim::ShardWeights(
                  ptsim::MakeWeightSet<T>(cfg, seed), cfg, n_shards);
              ptsim::Mesh<T> mesh(n_shards);
              return ptsim::RunTpForward<T>(tokens, cfg, sharded, mesh);
            }();
            return py::make_tuple(ToNumpy(result.logits),
                                  EventsToPython(result.stats));
          });
        },
        py::arg("tokens"), py::arg("cfg"), py::arg("n_shards"),
        py::arg("seed"), py::arg("element_width") = 64);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::vector<const char*> argv{"ptsim"};
          for (const auto& a : args) argv.push_back(a.c_str());
          std::ostringstream out, err;
          const int code = ptsim::RunCli(static_cast<int>(argv.size()),
                                         argv.data(), out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"),
        "Runs a ptsim subcommand in-process; returns (exit_code, stdout, "
        "stderr).");
}
