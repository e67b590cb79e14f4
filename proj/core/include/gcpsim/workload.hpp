#pragma once

#include <memory>
#include <string>

#include "gcpsim/locks.hpp"
#include "gcpsim/metrics.hpp"
#include "gcpsim/system.hpp"

namespace gcpsim {

enum class WorkloadKind { Microbench, KvsYcsb, GlobalLock };

const char* to_string(WorkloadKind k);
WorkloadKind workload_kind_from_string(const std::string& s);

struct WorkloadSpec {
  WorkloadKind kind{WorkloadKind::Microbench};
  uint32_t blades{2};
  uint32_t threads_per_blade{0};  // 0 -> kind default (1 micro, 10 kvs/global)
  uint64_t ops_per_thread{10000};
  double read_ratio{0.0};     // 0.5 / 0.95 / 1.0 give the YCSB A/B/C mixes
  uint32_t data_bytes{4096};  // protected bytes touched per critical section
  uint32_t buckets{10000};    // kvs only
  double zipf_theta{0.99};    // kvs only
  uint64_t key_space{0};      // kvs only; 0 -> 16 * buckets
  uint64_t cs_extra_ns{0};    // in-section compute time
  uint64_t local_op_ns{100};  // modeled local acquire/release overhead
  uint64_t warmup_ops{16};    // per-thread ops excluded from steady counters

  uint32_t effective_threads() const {
    if (threads_per_blade) return threads_per_blade;
    return kind == WorkloadKind::Microbench ? 1 : 10;
  }
  void validate() const;
};

struct RunOptions {
  NetworkProfile profile{};
  uint64_t seed{1};
  bool locality_opt{true};
  bool combined_data_opt{true};
  bool reorder_stress{false};
  bool check_invariants{false};
  bool verify_data{false};  // per-CS data checksum oracle
  uint64_t watchdog_events{1'000'000'000};
  uint32_t header_bytes{64};
  TraceSink* trace{nullptr};
};

RunResult run_workload(const WorkloadSpec& spec, const LockConfig& lock,
                       const RunOptions& opts);

// Convenience wrappers fixing the workload kind.
RunResult run_microbench(WorkloadSpec spec, const LockConfig& lock,
                         const RunOptions& opts);
RunResult run_kvs_ycsb(WorkloadSpec spec, const LockConfig& lock,
                       const RunOptions& opts);
RunResult run_globallock(WorkloadSpec spec, const LockConfig& lock,
                         const RunOptions& opts);

}  // namespace gcpsim
