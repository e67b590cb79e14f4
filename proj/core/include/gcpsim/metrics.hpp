#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "gcpsim/lines.hpp"
#include "gcpsim/types.hpp"

namespace gcpsim {

// A transaction is one directory-mediated request/grant cycle, counted at the
// requestor when the grant completes. Local hits and re-grants count zero.
struct TxnTally {
  uint64_t total{0};
  uint64_t critical{0};
  std::array<uint64_t, kLineClassCount> by_class{};
  std::array<uint64_t, kLineClassCount> critical_by_class{};
};

struct AcqTally {
  uint64_t total{0};
  uint64_t remote{0};
};

class Metrics {
 public:
  void count_txn(LineClass cls, bool critical, bool warmup, uint32_t blade,
                 LineId line) {
    TxnTally& t = warmup ? warm_txns_ : steady_txns_;
    t.total++;
    t.by_class[static_cast<int>(cls)]++;
    if (critical) {
      t.critical++;
      t.critical_by_class[static_cast<int>(cls)]++;
    }
    per_line_txns_[line]++;
    if (blade >= per_blade_txns_.size()) per_blade_txns_.resize(blade + 1, 0);
    per_blade_txns_[blade]++;
  }

  void count_acquisition(bool remote, bool warmup, uint64_t latency_ns) {
    AcqTally& a = warmup ? warm_acqs_ : steady_acqs_;
    a.total++;
    if (remote) a.remote++;
    latency_ns_.push_back(latency_ns);
  }

  void count_op(uint32_t blade) {
    ops_total_++;
    if (blade >= per_blade_ops_.size()) per_blade_ops_.resize(blade + 1, 0);
    per_blade_ops_[blade]++;
  }

  void count_exclusive_grant() { exclusive_grants_++; }

  const TxnTally& warm_txns() const { return warm_txns_; }
  const TxnTally& steady_txns() const { return steady_txns_; }
  TxnTally all_txns() const {
    TxnTally t = steady_txns_;
    t.total += warm_txns_.total;
    t.critical += warm_txns_.critical;
    for (int i = 0; i < kLineClassCount; ++i) {
      t.by_class[i] += warm_txns_.by_class[i];
      t.critical_by_class[i] += warm_txns_.critical_by_class[i];
    }
    return t;
  }
  const AcqTally& warm_acqs() const { return warm_acqs_; }
  const AcqTally& steady_acqs() const { return steady_acqs_; }
  AcqTally all_acqs() const {
    return AcqTally{warm_acqs_.total + steady_acqs_.total,
                    warm_acqs_.remote + steady_acqs_.remote};
  }

  uint64_t ops_total() const { return ops_total_; }
  uint64_t exclusive_grants() const { return exclusive_grants_; }
  const std::vector<uint64_t>& latency_samples() const { return latency_ns_; }
  const std::map<LineId, uint64_t>& per_line_txns() const {
    return per_line_txns_;
  }
  const std::vector<uint64_t>& per_blade_ops() const { return per_blade_ops_; }
  const std::vector<uint64_t>& per_blade_txns() const {
    return per_blade_txns_;
  }

 private:
  TxnTally warm_txns_, steady_txns_;
  AcqTally warm_acqs_, steady_acqs_;
  uint64_t ops_total_{0};
  uint64_t exclusive_grants_{0};
  std::vector<uint64_t> latency_ns_;
  std::map<LineId, uint64_t> per_line_txns_;
  std::vector<uint64_t> per_blade_ops_;
  std::vector<uint64_t> per_blade_txns_;
};

// Scalars and samples carried out of one simulation run.
struct RunResult {
  uint64_t completed_ops{0};
  SimTime elapsed_sim_ns{0};
  uint64_t messages_total{0};
  uint64_t bytes_total{0};
  uint64_t trace_hash{0};
  uint64_t trace_records{0};

  AcqTally acqs{};
  AcqTally steady_acqs{};
  TxnTally txns{};
  TxnTally steady_txns{};

  std::vector<uint64_t> latency_ns;  // sorted
  std::vector<uint64_t> per_blade_ops;
  std::vector<uint64_t> per_blade_txns;

  double throughput_ops_s() const {
    if (elapsed_sim_ns == 0) return 0.0;
    return static_cast<double>(completed_ops) * 1e9 /
           static_cast<double>(elapsed_sim_ns);
  }
  double txns_per_acq() const {
    return acqs.total ? static_cast<double>(txns.total) / acqs.total : 0.0;
  }
  double txns_per_remote_acq() const {
    return acqs.remote ? static_cast<double>(txns.total) / acqs.remote : 0.0;
  }
  double steady_txns_per_acq() const {
    return steady_acqs.total
               ? static_cast<double>(steady_txns.total) / steady_acqs.total
               : 0.0;
  }

  uint64_t latency_percentile(double p) const {
    if (latency_ns.empty()) return 0;
    size_t idx = static_cast<size_t>(p * (latency_ns.size() - 1) + 0.5);
    if (idx >= latency_ns.size()) idx = latency_ns.size() - 1;
    return latency_ns[idx];
  }
};

}  // namespace gcpsim
