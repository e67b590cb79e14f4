#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "gcpsim/blade.hpp"
#include "gcpsim/directory.hpp"
#include "gcpsim/lines.hpp"
#include "gcpsim/memory_actor.hpp"
#include "gcpsim/metrics.hpp"
#include "gcpsim/sim.hpp"

namespace gcpsim {

// One isolated simulation instance: blades, switch directory, memory blade,
// line registry, metrics. Instances share nothing and may run on different
// host threads concurrently.
class System {
 public:
  struct Options {
    uint32_t blades{2};
    SimOptions sim{};
    bool locality_opt{true};
    bool combined_data_opt{true};
    bool check_invariants{false};
  };

  explicit System(Options opts);
  ~System();

  Simulator& sim() { return *sim_; }
  LineRegistry& lines() { return lines_; }
  const LineRegistry& lines() const { return lines_; }
  Metrics& metrics() { return metrics_; }
  Directory& directory() { return *directory_; }
  MemoryActor& memory() { return *memory_; }
  Blade& blade(uint32_t i) { return *blades_.at(i); }
  uint32_t blade_count() const { return opts_.blades; }
  const Options& options() const { return opts_; }

  // Registers a plain coherence line (lock metadata or application data).
  LineId add_plain_line(uint32_t size_bytes, LineClass cls);

  // Registers a lock line protecting `regions` (may be empty). Regions must
  // not overlap any previously registered lock line's regions.
  LineId register_lock(std::vector<Region> regions);

  // Schedules a callback at an absolute simulated time (test scaffolding and
  // workload timers; not a message).
  void at(SimTime when, std::function<void()> fn);

  SimTime run(std::optional<SimTime> until = std::nullopt);

  // End-of-run audits: directory/blade sharer agreement for plain lines,
  // no in-flight protocol state left behind.
  void final_audit() const;
  std::string state_dump() const;

  // ---- invariant monitors (enabled via check_invariants) ----
  void note_line_event(LineId line);
  uint64_t max_queue_len_observed() const { return max_queue_len_; }
  void observe_queue_len(uint64_t n);
  void note_transfer_approved(LineId line);    // grant in flight to new holder
  void note_transfer_received(LineId line);    // new holder materialized it
  void note_writer_forwarded(LineId line, uint32_t blade);
  void note_writer_granted(LineId line, uint32_t blade);
  // Version-safety: a forwarded request must land at the current holder.
  void check_forward_target(LineId line, uint32_t blade) const;

  // lock-service manager dispatch (implemented by the locks layer)
  using ServiceHandler = std::function<void(uint32_t manager_blade, const Message&)>;
  void set_service_handler(ServiceHandler h) { service_ = std::move(h); }
  void dispatch_service(uint32_t manager_blade, const Message& msg) {
    if (!service_) throw ProtocolError("lock-service message without a manager");
    service_(manager_blade, msg);
  }

 private:
  void check_invariants_for(LineId line) const;

  Options opts_;
  std::unique_ptr<Simulator> sim_;
  LineRegistry lines_;
  Metrics metrics_;
  std::unique_ptr<Directory> directory_;
  std::unique_ptr<MemoryActor> memory_;
  std::vector<std::unique_ptr<Blade>> blades_;
  ServiceHandler service_;

  uint64_t max_queue_len_{0};
  std::map<LineId, int> transfers_in_flight_;
  std::map<LineId, std::vector<uint32_t>> writer_forward_order_;
  std::map<LineId, std::vector<uint32_t>> writer_grant_order_;
};

}  // namespace gcpsim
