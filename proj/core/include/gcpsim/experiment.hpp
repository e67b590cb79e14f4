#pragma once

#include <string>
#include <vector>

#include "gcpsim/config.hpp"

namespace gcpsim {

// One output row per sweep point: the fixed CSV schema plus the extras the
// JSON mirror carries.
struct MetricsRow {
  std::string run_id;
  std::string lock;
  std::string workload;
  std::string profile;
  uint32_t blades{0};
  uint32_t threads{0};
  double read_ratio{0.0};
  uint64_t completed_ops{0};
  uint64_t elapsed_sim_ns{0};
  double throughput_ops_s{0.0};
  uint64_t acq_p50_ns{0};
  uint64_t acq_p99_ns{0};
  double txns_per_acq{0.0};
  uint64_t msgs_total{0};
  uint64_t bytes_total{0};
  // JSON-only extras
  uint64_t acq_p90_ns{0};
  uint64_t trace_hash{0};
  double txns_per_remote_acq{0.0};
  double steady_txns_per_acq{0.0};
  uint64_t txns_total{0};
  uint64_t txns_critical{0};
  std::vector<uint64_t> latency_cdf_ns;  // retained when cdf output is on
};

// CSV header and row order are part of the output contract.
extern const char* const kCsvHeader;

std::string to_csv_row(const MetricsRow& r);
std::string to_csv(const std::vector<MetricsRow>& rows);
std::string to_json(const std::vector<MetricsRow>& rows, bool with_cdf);

// Two-column latency CDF (latency_ns, cumulative_fraction), monotone in both.
std::string cdf_table(const std::vector<uint64_t>& sorted_latencies);

MetricsRow run_point(const ExperimentConfig& cfg, uint32_t sweep_index);

// Runs the config's sweep (a single point when no axis is set). Independent
// points execute in parallel on isolated instances; rows come back in sweep
// order regardless of completion order.
std::vector<MetricsRow> run_experiment(const ExperimentConfig& cfg);

// Same workload and lock across several profiles, one row group per profile.
std::vector<MetricsRow> compare_profiles(const ExperimentConfig& cfg,
                                         const std::vector<std::string>& profiles);

// Writes csv/json/cdf outputs per the config; returns the primary text.
std::string write_outputs(const ExperimentConfig& cfg,
                          const std::vector<MetricsRow>& rows);

}  // namespace gcpsim
