#include "gcpsim/experiment.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

#include "json.hpp"

namespace gcpsim {

const char* const kCsvHeader =
    "run_id,lock,workload,profile,blades,threads,read_ratio,completed_ops,"
    "elapsed_sim_ns,throughput_ops_s,acq_p50_ns,acq_p99_ns,txns_per_acq,"
    "msgs_total,bytes_total";

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

ExperimentConfig apply_axis(const ExperimentConfig& base, double value) {
  ExperimentConfig c = base;
  if (base.sweep_axis == "blades")
    c.workload.blades = static_cast<uint32_t>(value);
  else if (base.sweep_axis == "threads_per_blade")
    c.workload.threads_per_blade = static_cast<uint32_t>(value);
  else if (base.sweep_axis == "read_ratio")
    c.workload.read_ratio = value;
  return c;
}

}  // namespace

std::string to_csv_row(const MetricsRow& r) {
  std::ostringstream os;
  os << r.run_id << ',' << r.lock << ',' << r.workload << ',' << r.profile
     << ',' << r.blades << ',' << r.threads << ',' << fmt_double(r.read_ratio)
     << ',' << r.completed_ops << ',' << r.elapsed_sim_ns << ','
     << fmt_double(r.throughput_ops_s) << ',' << r.acq_p50_ns << ','
     << r.acq_p99_ns << ',' << fmt_double(r.txns_per_acq) << ','
     << r.msgs_total << ',' << r.bytes_total;
  return os.str();
}

std::string to_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& r : rows) os << to_csv_row(r) << '\n';
  return os.str();
}

std::string to_json(const std::vector<MetricsRow>& rows, bool with_cdf) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j{
        {"run_id", r.run_id},
        {"lock", r.lock},
        {"workload", r.workload},
        {"profile", r.profile},
        {"blades", r.blades},
        {"threads", r.threads},
        {"read_ratio", r.read_ratio},
        {"completed_ops", r.completed_ops},
        {"elapsed_sim_ns", r.elapsed_sim_ns},
        {"throughput_ops_s", r.throughput_ops_s},
        {"acq_p50_ns", r.acq_p50_ns},
        {"acq_p90_ns", r.acq_p90_ns},
        {"acq_p99_ns", r.acq_p99_ns},
        {"txns_per_acq", r.txns_per_acq},
        {"txns_per_remote_acq", r.txns_per_remote_acq},
        {"steady_txns_per_acq", r.steady_txns_per_acq},
        {"txns_total", r.txns_total},
        {"txns_critical", r.txns_critical},
        {"msgs_total", r.msgs_total},
        {"bytes_total", r.bytes_total},
        {"trace_hash", r.trace_hash},
    };
    if (with_cdf) j["latency_cdf_ns"] = r.latency_cdf_ns;
    out.push_back(std::move(j));
  }
  return out.dump(2);
}

std::string cdf_table(const std::vector<uint64_t>& sorted) {
  std::ostringstream os;
  os << "latency_ns,cumulative_fraction\n";
  const size_t n = sorted.size();
  for (size_t i = 0; i < n; ++i) {
    // emit the last point of every distinct latency value
    if (i + 1 < n && sorted[i + 1] == sorted[i]) continue;
    os << sorted[i] << ',' << fmt_double(static_cast<double>(i + 1) / n)
       << '\n';
  }
  return os.str();
}

MetricsRow run_point(const ExperimentConfig& cfg, uint32_t sweep_index) {
  RunOptions opts = cfg.run_options();
  std::unique_ptr<JsonlTraceSink> sink;
  if (!cfg.trace_path.empty()) {
    std::string path = cfg.trace_path;
    if (!cfg.sweep_axis.empty())
      path += "." + std::to_string(sweep_index);
    sink = std::make_unique<JsonlTraceSink>(path);
    opts.trace = sink.get();
  }
  RunResult res = run_workload(cfg.workload, cfg.lock, opts);

  MetricsRow r;
  r.run_id = "s" + std::to_string(cfg.seed) + "-" + std::to_string(sweep_index);
  r.lock = to_string(cfg.lock.kind);
  r.workload = to_string(cfg.workload.kind);
  r.profile = cfg.profile_name;
  r.blades = cfg.workload.blades;
  r.threads = cfg.workload.effective_threads();
  r.read_ratio = cfg.workload.read_ratio;
  r.completed_ops = res.completed_ops;
  r.elapsed_sim_ns = res.elapsed_sim_ns;
  r.throughput_ops_s = res.throughput_ops_s();
  r.acq_p50_ns = res.latency_percentile(0.50);
  r.acq_p90_ns = res.latency_percentile(0.90);
  r.acq_p99_ns = res.latency_percentile(0.99);
  r.txns_per_acq = res.txns_per_acq();
  r.txns_per_remote_acq = res.txns_per_remote_acq();
  r.steady_txns_per_acq = res.steady_txns_per_acq();
  r.txns_total = res.txns.total;
  r.txns_critical = res.txns.critical;
  r.msgs_total = res.messages_total;
  r.bytes_total = res.bytes_total;
  r.trace_hash = res.trace_hash;
  if (cfg.emit_cdf) r.latency_cdf_ns = res.latency_ns;
  return r;
}

std::vector<MetricsRow> run_experiment(const ExperimentConfig& cfg) {
  if (cfg.sweep_axis.empty() || cfg.sweep_values.empty()) {
    return {run_point(cfg, 0)};
  }
  std::vector<MetricsRow> rows(cfg.sweep_values.size());
  if (cfg.parallel_sweep) {
    std::vector<std::future<MetricsRow>> futs;
    futs.reserve(cfg.sweep_values.size());
    for (size_t i = 0; i < cfg.sweep_values.size(); ++i) {
      ExperimentConfig point = apply_axis(cfg, cfg.sweep_values[i]);
      futs.push_back(std::async(std::launch::async, [point, i] {
        return run_point(point, static_cast<uint32_t>(i));
      }));
    }
    for (size_t i = 0; i < futs.size(); ++i) rows[i] = futs[i].get();
  } else {
    for (size_t i = 0; i < cfg.sweep_values.size(); ++i)
      rows[i] =
          run_point(apply_axis(cfg, cfg.sweep_values[i]), static_cast<uint32_t>(i));
  }
  return rows;
}

std::vector<MetricsRow> compare_profiles(
    const ExperimentConfig& cfg, const std::vector<std::string>& profiles) {
  if (profiles.size() < 2)
    throw ConfigError("compare requires at least two profiles");
  std::vector<MetricsRow> rows;
  for (size_t i = 0; i < profiles.size(); ++i) {
    ExperimentConfig c = cfg;
    c.profile_name = profiles[i];
    c.profile = named_profile(profiles[i]);
    auto group = run_experiment(c);
    for (auto& r : group) {
      r.run_id = "p" + std::to_string(i) + "-" + r.run_id;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::string write_outputs(const ExperimentConfig& cfg,
                          const std::vector<MetricsRow>& rows) {
  const std::string csv = to_csv(rows);
  const bool want_csv = cfg.out_format == "csv" || cfg.out_format == "both";
  const bool want_json = cfg.out_format == "json" || cfg.out_format == "both";
  if (!cfg.out_path.empty()) {
    if (want_csv) {
      std::ofstream f(cfg.out_path);
      if (!f) throw ConfigError("cannot write output file: " + cfg.out_path);
      f << csv;
    }
    if (want_json) {
      std::string jpath = cfg.out_path;
      if (want_csv) jpath += ".json";
      std::ofstream f(jpath);
      if (!f) throw ConfigError("cannot write output file: " + jpath);
      f << to_json(rows, cfg.emit_cdf);
    }
  }
  return want_csv ? csv : to_json(rows, cfg.emit_cdf);
}

}  // namespace gcpsim
