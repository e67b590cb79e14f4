#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gcpsim/locks.hpp"
#include "gcpsim/workload.hpp"

namespace gcpsim {

// Resolves a named profile: "ethernet-disagg", "numa", or "cxl". The cxl
// latency is a configuration value, not a measured constant.
NetworkProfile named_profile(const std::string& name);
bool is_known_profile(const std::string& name);

struct ExperimentConfig {
  uint64_t seed{1};
  std::string profile_name{"ethernet-disagg"};
  NetworkProfile profile{named_profile("ethernet-disagg")};
  LockConfig lock{};
  WorkloadSpec workload{};

  bool locality_opt{true};
  bool combined_data_opt{true};
  bool reorder_stress{false};
  bool check_invariants{false};
  bool verify_data{false};
  uint64_t watchdog_events{1'000'000'000};
  uint32_t header_bytes{64};

  std::string sweep_axis;  // empty, "blades", "threads_per_blade", "read_ratio"
  std::vector<double> sweep_values;

  std::string out_path;            // empty -> stdout
  std::string out_format{"csv"};   // csv | json | both
  bool emit_cdf{false};
  std::string trace_path;          // empty -> tracing disabled
  bool parallel_sweep{true};

  // Parses and validates; throws ConfigError naming the offending field.
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);

  RunOptions run_options() const;
};

}  // namespace gcpsim
