#include "gcpsim/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gcpsim {

using nlohmann::json;

NetworkProfile named_profile(const std::string& name) {
  // Processing costs are calibration knobs; only the latency/bandwidth pairs
  // follow the published characteristics of each interconnect class.
  if (name == "ethernet-disagg") return NetworkProfile{5000, 100.0, 500, 2000, 1000};
  if (name == "numa") return NetworkProfile{100, 500.0, 50, 100, 100};
  if (name == "cxl") return NetworkProfile{300, 500.0, 100, 200, 200};
  throw ConfigError("unknown profile name: " + name +
                    " (expected ethernet-disagg, numa, or cxl)");
}

bool is_known_profile(const std::string& name) {
  return name == "ethernet-disagg" || name == "numa" || name == "cxl";
}

namespace {

void validate_profile(const NetworkProfile& p) {
  if (p.one_way_latency_ns == 0)
    throw ConfigError("NetworkProfile.one_way_latency_ns must be positive");
  if (!(p.bandwidth_gbps > 0.0))
    throw ConfigError("NetworkProfile.bandwidth_gbps must be positive");
}

NetworkProfile parse_profile(const json& j, std::string& name_out) {
  if (j.is_string()) {
    name_out = j.get<std::string>();
    return named_profile(name_out);
  }
  if (!j.is_object()) throw ConfigError("profile must be a name or an object");
  NetworkProfile p;
  std::string base = j.value("name", std::string{});
  if (!base.empty()) {
    p = named_profile(base);
    name_out = base;
  } else {
    name_out = "custom";
  }
  if (j.contains("one_way_latency_ns"))
    p.one_way_latency_ns = j.at("one_way_latency_ns").get<uint64_t>();
  if (j.contains("bandwidth_gbps"))
    p.bandwidth_gbps = j.at("bandwidth_gbps").get<double>();
  if (j.contains("switch_proc_ns"))
    p.switch_proc_ns = j.at("switch_proc_ns").get<uint64_t>();
  if (j.contains("blade_proc_ns"))
    p.blade_proc_ns = j.at("blade_proc_ns").get<uint64_t>();
  if (j.contains("memory_proc_ns"))
    p.memory_proc_ns = j.at("memory_proc_ns").get<uint64_t>();
  validate_profile(p);
  return p;
}

}  // namespace

RunOptions ExperimentConfig::run_options() const {
  RunOptions o;
  o.profile = profile;
  o.seed = seed;
  o.locality_opt = locality_opt;
  o.combined_data_opt = combined_data_opt;
  o.reorder_stress = reorder_stress;
  o.check_invariants = check_invariants;
  o.verify_data = verify_data;
  o.watchdog_events = watchdog_events;
  o.header_bytes = header_bytes;
  return o;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    if (j.contains("profile")) c.profile = parse_profile(j.at("profile"), c.profile_name);
    validate_profile(c.profile);

    if (j.contains("lock")) {
      const json& l = j.at("lock");
      c.lock.kind = lock_kind_from_string(l.value("kind", std::string{"gcp"}));
      c.lock.cohort_budget = l.value("cohort_budget", c.lock.cohort_budget);
      if (c.lock.cohort_budget == 0)
        throw ConfigError("lock.cohort_budget must be positive");
      std::string api = l.value("gcp_api", std::string{"data_coupled"});
      if (api == "data_coupled")
        c.lock.gcp_api = GcpApi::DataCoupled;
      else if (api == "pthread")
        c.lock.gcp_api = GcpApi::Pthread;
      else
        throw ConfigError("lock.gcp_api must be data_coupled or pthread");
      if (l.contains("cohort_global"))
        c.lock.cohort_global =
            lock_kind_from_string(l.at("cohort_global").get<std::string>());
      c.locality_opt = l.value("locality_opt", c.locality_opt);
      c.combined_data_opt = l.value("combined_data_opt", c.combined_data_opt);
    }

    if (j.contains("workload")) {
      const json& w = j.at("workload");
      c.workload.kind =
          workload_kind_from_string(w.value("kind", std::string{"microbench"}));
      c.workload.blades = w.value("blades", c.workload.blades);
      c.workload.threads_per_blade =
          w.value("threads_per_blade", c.workload.threads_per_blade);
      c.workload.ops_per_thread =
          w.value("ops_per_thread", c.workload.ops_per_thread);
      c.workload.read_ratio = w.value("read_ratio", c.workload.read_ratio);
      if (c.workload.kind == WorkloadKind::GlobalLock)
        c.workload.data_bytes = 0;
      c.workload.data_bytes = w.value("data_bytes", c.workload.data_bytes);
      c.workload.buckets = w.value("buckets", c.workload.buckets);
      c.workload.zipf_theta = w.value("zipf_theta", c.workload.zipf_theta);
      c.workload.key_space = w.value("key_space", c.workload.key_space);
      c.workload.cs_extra_ns = w.value("cs_extra_ns", c.workload.cs_extra_ns);
      c.workload.local_op_ns = w.value("local_op_ns", c.workload.local_op_ns);
      c.workload.warmup_ops = w.value("warmup_ops", c.workload.warmup_ops);
      c.workload.validate();
    }

    if (j.contains("sim")) {
      const json& s = j.at("sim");
      c.reorder_stress = s.value("reorder_stress", c.reorder_stress);
      c.check_invariants = s.value("check_invariants", c.check_invariants);
      c.verify_data = s.value("verify_data", c.verify_data);
      c.watchdog_events = s.value("watchdog_events", c.watchdog_events);
      c.header_bytes = s.value("header_bytes", c.header_bytes);
    }

    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      c.sweep_axis = s.value("axis", std::string{});
      if (s.contains("values"))
        c.sweep_values = s.at("values").get<std::vector<double>>();
      if (!c.sweep_axis.empty() && c.sweep_axis != "blades" &&
          c.sweep_axis != "threads_per_blade" && c.sweep_axis != "read_ratio")
        throw ConfigError("sweep.axis must be blades, threads_per_blade, or "
                          "read_ratio");
      c.parallel_sweep = s.value("parallel", c.parallel_sweep);
    }

    if (j.contains("output")) {
      const json& o = j.at("output");
      c.out_path = o.value("path", c.out_path);
      c.out_format = o.value("format", c.out_format);
      if (c.out_format != "csv" && c.out_format != "json" &&
          c.out_format != "both")
        throw ConfigError("output.format must be csv, json, or both");
      c.emit_cdf = o.value("cdf", c.emit_cdf);
    }

    if (j.contains("trace")) {
      const json& t = j.at("trace");
      if (t.value("enabled", false))
        c.trace_path = t.value("path", std::string{"trace.jsonl"});
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  return c;
}

}  // namespace gcpsim
