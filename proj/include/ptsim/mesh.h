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

// Simulated n-device mesh. Each device runs on its own worker thread and the
// only interaction between workers is the all-reduce rendezvous.
//
// Collectives gather to a single reducer, combine contributions in ascending
// rank order with Fuse(), and hand the identical result back to every rank, so
// results never depend on thread scheduling. Each collective is logged once
// (not once per rank) in the mesh's SyncStats.

#ifndef PTSIM_MESH_H_
#define PTSIM_MESH_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ptsim/errors.h"
#include "ptsim/pt_model.h"
#include "ptsim/tensor.h"

namespace ptsim {

enum class CollectiveKind { kAllReduce };

struct SyncEvent {
  std::int64_t seq_no = 0;
  int layer_index = 0;
  CollectiveKind kind = CollectiveKind::kAllReduce;
  int participants = 0;
  std::int64_t elements = 0;
  std::int64_t payload_bytes = 0;

  friend bool operator==(const SyncEvent&, const SyncEvent&) = default;
};

struct SyncStats {
  std::int64_t total_events = 0;
  std::int64_t total_payload_bytes = 0;
  std::vector<SyncEvent> events;

  void Append(const SyncEvent& event) {
    events.push_back(event);
    ++total_events;
    total_payload_bytes += event.payload_bytes;
  }

  friend bool operator==(const SyncStats&, const SyncStats&) = default;
};

// One JSON object per event and line, fields in the order seq_no,
// layer_index, kind, participants, elements, payload_bytes.
std::string TraceToJsonLines(const SyncStats& stats);
SyncStats ParseTraceJsonLines(std::string_view text);

// Throws IoError naming the path.
void ExportTrace(const SyncStats& stats, const std::filesystem::path& path);
SyncStats ReadTrace(const std::filesystem::path& path);

inline constexpr std::chrono::milliseconds kDefaultCollectiveTimeout{10000};

template <typename T>
class Mesh {
 public:
  explicit Mesh(int n_devices,
                std::chrono::milliseconds timeout = kDefaultCollectiveTimeout)
      : n_(n_devices), timeout_(timeout) {
    if (n_devices < 1) {
      throw ConfigError("mesh needs at least one device, got " +
                        std::to_string(n_devices));
    }
    ResetLocked();
  }

  Mesh(const Mesh&) = delete;
  Mesh& operator=(const Mesh&) = delete;

  int n_devices() const { return n_; }

  // Runs body(rank) on one worker per device and joins them. If any worker
  // fails, the mesh is aborted so no peer waits for the timeout, and the
  // first failure is rethrown.
  void Launch(const std::function<void(int rank)>& body) {
    {
      std::lock_guard lock(mu_);
      ResetLocked();
    }
    {
      std::vector<std::jthread> workers;
      workers.reserve(static_cast<std::size_t>(n_));
      for (int rank = 0; rank < n_; ++rank) {
        workers.emplace_back([this, rank, &body] {
          try {
            body(rank);
            MarkExited();
          } catch (...) {
            Fail(std::current_exception());
          }
        });
      }
    }
    std::lock_guard lock(mu_);
    if (first_error_) std::rethrow_exception(first_error_);
  }

  // All-reduce of `local` across every rank. Each rank must make the same
  // sequence of calls with same-shaped tensors, the same op, and the same
  // layer annotation.
  Tensor<T> AllReduce(int rank, const Tensor<T>& local, ReduceOp op,
                      int layer_index = 0) {
    std::unique_lock lock(mu_);
    if (rank < 0 || rank >= n_) {
      throw ProtocolError("rank " + std::to_string(rank) +
                          " is outside a mesh of " + std::to_string(n_));
    }
    if (aborted_) throw ProtocolError(abort_reason_);
    if (slots_[rank] != nullptr) {
      AbortLocked("rank " + std::to_string(rank) +
                  " joined collective #" + std::to_string(generation_) +
                  " twice");
      throw ProtocolError(abort_reason_);
    }
    ++calls_[rank];
    const std::uint64_t my_generation = generation_;
    slots_[rank] = &local;
    layers_[rank] = layer_index;
    ops_[rank] = op;
    if (++arrived_ == n_) {
      CompleteLocked();
      if (aborted_) throw ProtocolError(abort_reason_);
      return result_;
    }

    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    const bool done = cv_.wait_until(lock, deadline, [&] {
      return generation_ != my_generation || aborted_ || exited_ > 0;
    });
    if (aborted_) throw ProtocolError(abort_reason_);
    if (generation_ != my_generation) return result_;
    {
      if (!done) {
        AbortLocked("collective #" + std::to_string(my_generation) +
                    " (layer " + std::to_string(layer_index) +
                    ") timed out after " + std::to_string(timeout_.count()) +
                    " ms with " + std::to_string(arrived_) + " of " +
                    std::to_string(n_) + " ranks arrived; missing " +
                    MissingRanksLocked());
      } else {
        AbortLocked("rank(s) " + MissingRanksLocked() +
                    " left the mesh without joining collective #" +
                    std::to_string(my_generation) + " (layer " +
                    std::to_string(layer_index) + ")");
      }
    }
    throw ProtocolError(abort_reason_);
  }

  SyncStats Trace() const {
    std::lock_guard lock(mu_);
    return stats_;
  }

  void ClearTrace() {
    std::lock_guard lock(mu_);
    stats_ = SyncStats{};
  }

  // Collectives entered by each rank since the last Launch.
  std::vector<std::int64_t> CallCounts() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

 private:
  void ResetLocked() {
    const auto n = static_cast<std::size_t>(n_);
    slots_.assign(n, nullptr);
    layers_.assign(n, 0);
    ops_.assign(n, ReduceOp::kSum);
    calls_.assign(n, 0);
    arrived_ = 0;
    exited_ = 0;
    aborted_ = false;
    abort_reason_.clear();
    first_error_ = nullptr;
  }

  // Runs on the last rank to arrive.
  void CompleteLocked() {
    const Tensor<T>& first = *slots_[0];
    std::string problem;
    for (int r = 1; r < n_ && problem.empty(); ++r) {
      const Tensor<T>& other = *slots_[r];
      if (other.shape() != first.shape()) {
        problem = "shape divergence in collective #" +
                  std::to_string(generation_) + ": rank 0 has " +
                  ShapeToString(first.shape()) + ", rank " +
                  std::to_string(r) + " has " + ShapeToString(other.shape());
      } else if (layers_[r] != layers_[0] || ops_[r] != ops_[0]) {
        problem = "call-site divergence in collective #" +
                  std::to_string(generation_) + ": rank 0 at layer " +
                  std::to_string(layers_[0]) + " (" +
                  std::string(ReduceOpName(ops_[0])) + "), rank " +
                  std::to_string(r) + " at layer " +
                  std::to_string(layers_[r]) + " (" +
                  std::string(ReduceOpName(ops_[r])) + ")";
      }
    }
    if (problem.empty()) {
      std::vector<Tensor<T>> gathered;
      gathered.reserve(slots_.size());
      for (const Tensor<T>* s : slots_) gathered.push_back(*s);
      result_ = Fuse<T>(gathered, ops_[0]);
      const auto elements = static_cast<std::int64_t>(first.size());
      stats_.Append(SyncEvent{
          .seq_no = static_cast<std::int64_t>(stats_.events.size()),
          .layer_index = layers_[0],
          .kind = CollectiveKind::kAllReduce,
          .participants = n_,
          .elements = elements,
          .payload_bytes = elements * static_cast<std::int64_t>(sizeof(T)),
      });
    } else {
      AbortLocked(problem);
    }
    std::fill(slots_.begin(), slots_.end(), nullptr);
    arrived_ = 0;
    ++generation_;
    cv_.notify_all();
  }

  void AbortLocked(std::string reason) {
    if (aborted_) return;
    aborted_ = true;
    abort_reason_ = std::move(reason);
    cv_.notify_all();
  }

  std::string MissingRanksLocked() const {
    std::string out;
    for (int r = 0; r < n_; ++r) {
      if (slots_[r] == nullptr) {
        if (!out.empty()) out += ",";
        out += std::to_string(r);
      }
    }
    return out;
  }

  void MarkExited() {
    std::lock_guard lock(mu_);
    ++exited_;
    cv_.notify_all();
  }

  void Fail(std::exception_ptr error) {
    std::lock_guard lock(mu_);
    if (!first_error_) first_error_ = error;
    std::string what = "peer failure";
    try {
      std::rethrow_exception(error);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    AbortLocked(what);
    ++exited_;
    cv_.notify_all();
  }

  const int n_;
  const std::chrono::milliseconds timeout_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::vector<const Tensor<T>*> slots_;
  std::vector<int> layers_;
  std::vector<ReduceOp> ops_;
  std::vector<std::int64_t> calls_;
  int arrived_ = 0;
  int exited_ = 0;
  std::uint64_t generation_ = 0;
  Tensor<T> result_;
  bool aborted_ = false;
  std::string abort_reason_;
  std::exception_ptr first_error_;
  SyncStats stats_;
};

}  // namespace ptsim

#endif  // PTSIM_MESH_H_
