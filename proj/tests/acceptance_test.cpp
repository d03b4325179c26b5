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

// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "oracle/reference_oracle.h"
#include "ptsim/cli.h"
#include "ptsim/kernels.h"
#include "ptsim/logits_file.h"
#include "ptsim/mesh.h"
#include "ptsim/perf_model.h"
#include "ptsim/pt_model.h"
#include "ptsim/tensor_parallel.h"
#include "ptsim/track_parallel.h"
#include "test_util.h"

namespace ptsim {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
  void Require(bool ok, const std::string& why) {
    if (!ok && pass) detail = why;
    pass = pass && ok;
  }
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

PTConfig RandomPt(testing::RandomShapes& r) {
  PTConfig cfg;
  cfg.n_tracks = r.Pick({1, 2, 4, 8});
  const int layers = r.Pick({2, 4, 8});
  std::vector<int> depths;
  for (int d = 1; d <= layers; ++d)
    if (layers % d == 0) depths.push_back(d);
  cfg.block_depth = depths[r.rng.Next() % depths.size()];
  cfg.reduce_op = r.rng.Next() % 2 ? ReduceOp::kMean : ReduceOp::kSum;
  cfg.track = r.Model(layers);
  return cfg;
}

// 1. Measured collective counts for L = 48.
Outcome SyncCounts() {
  Outcome o;
  const auto start = Clock::now();
  ModelConfig dense = MakeModelConfig(8, 48, 2, 2, 16, 4);
  dense.d_ff = 8;
  const std::vector<int> tokens = {1, 2, 3};
  Mesh<float> tp_mesh(2);
  const auto tp = RunTpForward<float>(
      tokens, dense, ShardWeights(MakeWeightSet<float>(dense, 1), dense, 2), tp_mesh);
  PTConfig pt;
  pt.n_tracks = 8;
  pt.block_depth = 8;
  pt.track = MakeModelConfig(8, 48, 1, 1, 16, 4);
  Mesh<float> pt_mesh(8);
  const auto ptr = RunPtParallel<float>(tokens, pt, MakePTWeightSet<float>(pt, 1), pt_mesh);
  const double secs = Seconds(start);
  o.Require(tp.stats.total_events == 96, "dense-TP events != 96");
  o.Require(ptr.stats.total_events == 6, "PT events != 6");
  o.Require(ptr.stats.total_events * 16 == tp.stats.total_events, "ratio != 16");
  o.Require(secs < 1.0, "runtime " + Fmt("%.3f", secs) + " s >= 1 s");
  if (o.pass) {
    o.detail = "dense_tp=" + std::to_string(tp.stats.total_events) +
               " pt=" + std::to_string(ptr.stats.total_events) + " ratio=16 time=" +
               Fmt("%.3f", secs) + "s";
  }
  return o;
}

// 2. Reduction fractions against exact rationals (2L - L/D) / 2L.
Outcome Reductions() {
  Outcome o;
  for (int d : {4, 8}) {
    const std::int64_t tp = SyncCount(Arch::kDenseTp, 48);
    const std::int64_t pt = SyncCount(Arch::kPt, 48, d);
    // (tp - pt) / tp is a dyadic rational here, so division is exact.
    const double exact = static_cast<double>(tp - pt) / static_cast<double>(tp);
    o.Require(SyncReductionFraction(d) == exact, "D=" + std::to_string(d));
  }
  o.Require(SyncReductionFraction(4) == 0.875, "D=4 != 0.875");
  o.Require(SyncReductionFraction(8) == 0.9375, "D=8 != 0.9375");
  if (o.pass) o.detail = "D=4 -> 0.875 D=8 -> 0.9375";
  return o;
}

// 3. Parallel vs sequential PT over random configs in both widths.
Outcome ParallelEquivalence() {
  Outcome o;
  const auto start = Clock::now();
  testing::RandomShapes r(2026);
  int configs = 0;
  double worst32 = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const PTConfig cfg = RandomPt(r);
    const auto tokens = r.Tokens(cfg.track.vocab_size, 16);
    const std::uint64_t seed = r.rng.Next();
    {
      const auto w = MakePTWeightSet<double>(cfg, seed);
      Mesh<double> mesh(cfg.n_tracks);
      const auto par = RunPtParallel<double>(tokens, cfg, w, mesh);
      o.Require(par.logits == PTForwardSequential<double>(tokens, cfg, w),
                "64-bit mismatch at trial " + std::to_string(trial));
      o.Require(par.stats.total_events == CountFusions(cfg),
                "event count at trial " + std::to_string(trial));
    }
    {
      const auto w = MakePTWeightSet<float>(cfg, seed);
      Mesh<float> mesh(cfg.n_tracks);
      const auto par = RunPtParallel<float>(tokens, cfg, w, mesh);
      const double rel =
          MaxRelativeDifference(par.logits, PTForwardSequential<float>(tokens, cfg, w));
      worst32 = std::max(worst32, rel);
      o.Require(rel <= 1e-5, "32-bit rel " + Fmt("%.3g", rel));
    }
    ++configs;
  }
  const double secs = Seconds(start);
  o.Require(secs < 60.0, "runtime " + Fmt("%.1f", secs) + " s >= 60 s");
  if (o.pass) {
    o.detail = std::to_string(configs) + " configs, 64-bit exact, 32-bit max_rel=" +
               Fmt("%.3g", worst32) + " time=" + Fmt("%.2f", secs) + "s";
  }
  return o;
}

// 4. TP vs dense.
Outcome TpEquivalence() {
  Outcome o;
  testing::RandomShapes r(4048);
  double worst = 0;
  int configs = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = r.Pick({1, 2, 4});
    const ModelConfig cfg = r.Model(r.Range(1, 6), n);
    const auto tokens = r.Tokens(cfg.vocab_size);
    const auto w = MakeWeightSet<double>(cfg, r.rng.Next());
    Mesh<double> mesh(n);
    const auto tp = RunTpForward<double>(tokens, cfg, ShardWeights(w, cfg, n), mesh);
    const double rel = MaxRelativeDifference(tp.logits, DenseForward<double>(tokens, cfg, w));
    worst = std::max(worst, rel);
    o.Require(rel <= 1e-12, "rel " + Fmt("%.3g", rel) + " at trial " + std::to_string(trial));
    o.Require(tp.stats.total_events == 2 * cfg.n_layers,
              "events != 2L at trial " + std::to_string(trial));
    ++configs;
  }
  if (o.pass) {
    o.detail = std::to_string(configs) + " configs, max_rel=" + Fmt("%.3g", worst) +
               ", 2L events each";
  }
  return o;
}

// 5. One track equals the dense model.
Outcome SingleTrackIdentity() {
  Outcome o;
  testing::RandomShapes r(55);
  int tested = 0;
  for (int trial = 0; trial < 40; ++trial) {
    PTConfig cfg = RandomPt(r);
    cfg.n_tracks = 1;
    const auto tokens = r.Tokens(cfg.track.vocab_size);
    const std::uint64_t seed = r.rng.Next();
    const auto dense64 =
        DenseForward<double>(tokens, cfg.track, MakeWeightSet<double>(cfg.track, seed));
    const auto dense32 =
        DenseForward<float>(tokens, cfg.track, MakeWeightSet<float>(cfg.track, seed));
    o.Require(PTForwardSequential<double>(tokens, cfg, MakePTWeightSet<double>(cfg, seed)) ==
                  dense64,
              "sequential 64-bit at trial " + std::to_string(trial));
    o.Require(PTForwardSequential<float>(tokens, cfg, MakePTWeightSet<float>(cfg, seed)) ==
                  dense32,
              "sequential 32-bit at trial " + std::to_string(trial));
    Mesh<double> mesh(1);
    o.Require(RunPtParallel<double>(tokens, cfg, MakePTWeightSet<double>(cfg, seed), mesh)
                      .logits == dense64,
              "parallel at trial " + std::to_string(trial));
    ++tested;
  }
  if (o.pass) o.detail = std::to_string(tested) + " configs bit-equal (both widths)";
  return o;
}

// 6. All tracks hold the same state after every fusion.
Outcome PostFusionConsistency() {
  Outcome o;
  testing::RandomShapes r(66);
  int points = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const PTConfig cfg = RandomPt(r);
    const auto tokens = r.Tokens(cfg.track.vocab_size);
    const auto w = MakePTWeightSet<double>(cfg, r.rng.Next());
    std::map<int, Tensor<double>> sequential;
    PTForwardSequential<double>(tokens, cfg, w,
                                [&](int layer, std::span<const Tensor<double>> s) {
                                  for (const auto& t : s) {
                                    o.Require(t == s[0], "sequential tracks differ");
                                  }
                                  sequential.emplace(layer, s[0]);
                                });
    std::mutex mu;
    std::map<int, std::vector<Tensor<double>>> parallel;
    Mesh<double> mesh(cfg.n_tracks);
    RunPtParallel<double>(tokens, cfg, w, mesh,
                          [&](int, int layer, const Tensor<double>& s) {
                            std::lock_guard lock(mu);
                            parallel[layer].push_back(s);
                          });
    o.Require(parallel.size() == static_cast<std::size_t>(CountFusions(cfg)),
              "missing sync points");
    for (const auto& [layer, states] : parallel) {
      o.Require(states.size() == static_cast<std::size_t>(cfg.n_tracks), "missing ranks");
      for (const auto& s : states) {
        o.Require(sequential.count(layer) && s == sequential.at(layer),
                  "rank state differs at layer " + std::to_string(layer));
      }
      ++points;
    }
  }
  if (o.pass) o.detail = std::to_string(points) + " sync points, all tracks equal";
  return o;
}

// 7. Trend properties over a hardware/model grid.
Outcome Trends() {
  Outcome o;
  const auto start = Clock::now();
  int points = 0;
  const double latencies[] = {1e-7, 1e-6, 1e-5, 1e-4, 1e-3};
  const double bandwidths[] = {1e9, 1e10, 1e11, 1e12};
  const double flops[] = {1e12, 1e15};
  const char* presets[] = {"6b", "13b", "30b"};
  for (double lat : latencies) {
    for (double bw : bandwidths) {
      for (double fl : flops) {
        const HardwareProfile hw{fl, bw, lat, 2};
        const auto& name = presets[points % 3];
        const auto preset = MakeStructuralPreset(name, 1);
        for (int out : {128, 4096}) {
          for (int in : {1024, 2048, 4096}) {
            const Workload wl{in, out, 1};
            const double dense = EstimateDenseTp(preset.dense, 8, wl, hw).ttft_sec;
            double prev = dense;
            for (int d : {2, 4, 8}) {
              PTConfig pt = preset.pt;
              pt.block_depth = d;
              const double t = EstimatePt(pt, wl, hw).ttft_sec;
              o.Require(t < prev, std::string(name) + " ttft not decreasing at D=" +
                                      std::to_string(d));
              o.Require(t < dense, "PT not below dense");
              prev = t;
            }
          }
          // ttft strictly increasing with input length, every column.
          double prev_dense = 0, prev_pt = 0;
          for (int in : {128, 512, 1024, 2048, 4096, 8192}) {
            const Workload wl{in, out, 1};
            const double d = EstimateDenseTp(preset.dense, 8, wl, hw).ttft_sec;
            const double p = EstimatePt(preset.pt, wl, hw).ttft_sec;
            o.Require(d > prev_dense && p > prev_pt, "ttft not increasing in input_len");
            prev_dense = d;
            prev_pt = p;
          }
        }
        ++points;
      }
    }
  }
  const double secs = Seconds(start);
  o.Require(points >= 40, "grid too small");
  o.Require(secs < 5.0, "runtime " + Fmt("%.2f", secs) + " s >= 5 s");
  if (o.pass) {
    o.detail = std::to_string(points * 2 * 3) + " grid points, time=" + Fmt("%.3f", secs) + "s";
  }
  return o;
}

struct CliResult {
  int code;
  std::string out;
};

CliResult Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ptsim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str() + err.str()};
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// 8. Byte-identical CLI output across repetitions.
Outcome Determinism() {
  Outcome o;
  const std::string dir = PTSIM_CONFIG_DIR;
  const auto tmp = std::filesystem::temp_directory_path() /
                   ("ptsim_accept_" + std::to_string(::getpid()));
  std::filesystem::create_directories(tmp);
  const std::vector<std::vector<std::string>> commands = {
      {"verify", dir + "/pt_small.json"},
      {"verify", dir + "/pt_l48_d8.json"},
      {"verify", dir + "/dense_l32.json"},
      {"perf-table", dir + "/pt_small.json", "--format", "csv"},
      {"perf-table", dir + "/pt30b_serving.json", "--pairing", "matched"},
      {"trace", dir + "/pt_small.json", (tmp / "t1.jsonl").string()},
      {"trace", dir + "/dense_l32.json", (tmp / "t2.jsonl").string()},
  };
  for (const auto& cmd : commands) {
    std::string first_out, first_file;
    for (int rep = 0; rep < 5; ++rep) {
      const auto r = Cli(cmd);
      const std::string file = cmd[0] == "trace" ? Slurp(cmd[2]) : "";
      o.Require(r.code == 0, cmd[0] + " exit " + std::to_string(r.code));
      if (rep == 0) {
        first_out = r.out;
        first_file = file;
      } else {
        o.Require(r.out == first_out && file == first_file,
                  cmd[0] + " " + cmd[1] + " differs on repetition " + std::to_string(rep));
      }
    }
  }
  std::filesystem::remove_all(tmp);
  if (o.pass) o.detail = std::to_string(commands.size()) + " commands x 5 repetitions identical";
  return o;
}

// 9. Committed goldens: library reproduces them, and they equal the oracle.
Outcome Goldens() {
  Outcome o;
  const std::string dir = PTSIM_GOLDEN_DIR;
  try {
    const auto dense_golden = ReadLogitsFile(dir + "/dense_tiny.bin");
    const auto pt_golden = ReadLogitsFile(dir + "/pt_tiny.bin");

    const ModelConfig dense = MakeModelConfig(32, 2, 4, 2, 64, 8);
    const auto dense_tokens = oracle::Prompt(8, 42, 64);
    o.Require(DenseForward<float>(dense_tokens, dense, MakeWeightSet<float>(dense, 42)) ==
                  dense_golden,
              "dense library != golden");
    o.Require(Tensor<float>({8, 64}, oracle::DenseLogits<float>(
                                         testing::ToDims(dense), 42, dense_tokens)) ==
                  dense_golden,
              "dense oracle != golden");

    PTConfig pt;
    pt.n_tracks = 2;
    pt.block_depth = 2;
    pt.track = MakeModelConfig(16, 4, 2, 1, 32, 8);
    const auto pt_tokens = oracle::Prompt(8, 7, 32);
    o.Require(PTForwardSequential<float>(pt_tokens, pt, MakePTWeightSet<float>(pt, 7)) ==
                  pt_golden,
              "PT library != golden");
    Mesh<float> mesh(2);
    o.Require(RunPtParallel<float>(pt_tokens, pt, MakePTWeightSet<float>(pt, 7), mesh).logits ==
                  pt_golden,
              "PT mesh != golden");
    o.Require(Tensor<float>({8, 32}, oracle::PtLogits<float>(testing::ToDims(pt.track), 2, 2,
                                                             7, pt_tokens)) == pt_golden,
              "PT oracle != golden");
  } catch (const std::exception& e) {
    o.Require(false, e.what());
  }
  if (o.pass) o.detail = "dense_tiny.bin and pt_tiny.bin bit-exact";
  return o;
}

}  // namespace
}  // namespace ptsim

int main() {
  using ptsim::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"sync-count reproduction", ptsim::SyncCounts},
      {"reduction percentages", ptsim::Reductions},
      {"parallel/sequential PT equivalence", ptsim::ParallelEquivalence},
      {"TP baseline equivalence", ptsim::TpEquivalence},
      {"single-track identity", ptsim::SingleTrackIdentity},
      {"post-fusion consistency", ptsim::PostFusionConsistency},
      {"trend reproduction", ptsim::Trends},
      {"determinism", ptsim::Determinism},
      {"golden cross-checks", ptsim::Goldens},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = Outcome{false, std::string("exception: ") + e.what()};
    }
    std::printf("%s AC%zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
