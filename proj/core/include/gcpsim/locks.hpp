#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "gcpsim/system.hpp"

namespace gcpsim {

enum class LockKind { Mcs, CentralizedRw, PercpuRw, CohortRw, LockService, Gcp };
enum class LockMode { Shared, Exclusive };
enum class GcpApi { DataCoupled, Pthread };

const char* to_string(LockKind k);
LockKind lock_kind_from_string(const std::string& s);

struct LockConfig {
  LockKind kind{LockKind::Gcp};
  uint32_t cohort_budget{64};
  GcpApi gcp_api{GcpApi::DataCoupled};
  LockKind cohort_global{LockKind::CentralizedRw};
};

// Always-on correctness monitor: no writer/writer or writer/reader critical
// section overlap, plus a lost-update serialization audit (the counter is
// staged at entry and written back at exit, so overlapping exclusive
// sections would lose increments).
class LockMonitor {
 public:
  void enter(LockMode mode);
  void exit(LockMode mode);
  uint64_t exclusive_grants() const { return exclusive_grants_; }
  uint64_t shared_grants() const { return shared_grants_; }
  // true iff the audit counter saw every exclusive section exactly once
  bool audit_consistent() const { return counter_ == exclusive_grants_; }

 private:
  int readers_{0};
  int writers_{0};
  uint64_t exclusive_grants_{0};
  uint64_t shared_grants_{0};
  uint64_t counter_{0};
  uint64_t staged_{0};
};

class Lock {
 public:
  Lock(System& sys, std::string name) : sys_(sys), name_(std::move(name)) {}
  virtual ~Lock() = default;

  virtual void acquire(uint32_t blade, uint32_t thread, LockMode mode,
                       OpCtx ctx, Cont done) = 0;
  virtual void release(uint32_t blade, uint32_t thread, LockMode mode,
                       OpCtx ctx, Cont done) = 0;

  // The lock line whose grant ships the protected bytes, when the lock
  // couples data movement with acquisition.
  virtual std::optional<LineId> coupled_data_line() const {
    return std::nullopt;
  }

  LockMonitor& monitor() { return monitor_; }
  const std::string& name() const { return name_; }
  // internal locks (a cohort's global lock) keep out of the run metrics
  void set_internal() { internal_ = true; }

 protected:
  // counts the acquisition, samples latency, runs the monitor entry
  void granted(LockMode mode, OpCtx ctx, SimTime started, bool remote,
               Cont& done);

  System& sys_;
  std::string name_;
  LockMonitor monitor_;
  bool internal_{false};
};

// MCS queue mutex over plain coherence lines: a tail line plus one node line
// per simulated thread. Shared mode is not supported; callers map shared
// acquires to exclusive ones.
class McsLock : public Lock {
 public:
  McsLock(System& sys, std::string name, uint32_t blades,
          uint32_t threads_per_blade);
  void acquire(uint32_t blade, uint32_t thread, LockMode mode, OpCtx ctx,
               Cont done) override;
  void release(uint32_t blade, uint32_t thread, LockMode mode, OpCtx ctx,
               Cont done) override;

  LineId tail_line() const { return tail_; }
  LineId node_line(uint32_t blade, uint32_t thread) const;

 private:
  LineId tail_;
  uint32_t threads_per_blade_;
  std::vector<LineId> nodes_;  // blade-major
};

// Reader-writer lock with one centralized reader-indicator word:
// low bits count readers, a high bit marks the writer.
class CentralizedRwLock : public Lock {
 public:
  CentralizedRwLock(System& sys, std::string name);
  void acquire(uint32_t blade, uint32_t thread, LockMode mode, OpCtx ctx,
               Cont done) override;
  void release(uint32_t blade, uint32_t thread, LockMode mode, OpCtx ctx,
               Cont done) override;
  LineId word_line() const { return word_; }

 private:
  void read_loop(uint32_t blade, OpCtx ctx, SimTime started, Cont done);
  void write_loop(uint32_t blade, OpCtx ctx, SimTime started, Cont done);
  LineId word_;
};

// Reader-writer lock with one reader-indicator line per blade plus a writer
// flag line; read acquires touch only blade-local state in the steady state.
class PercpuRwLock : public Lock {
 public:
  PercpuRwLock(System& sys, std::string name, uint32_t blades);
  void acquire(uint32_t blade, uint32_t thread, LockMode mode, OpCtx ctx,
               Cont done) override;
  void release(uint32_t blade, uint32_t thread, LockMode mode, OpCtx ctx,
               Cont done) override;
  LineId flag_line() const { return flag_; }
  LineId indicator_line(uint32_t blade) const { return indicators_.at(blade); }

 private:
  void read_loop(uint32_t blade, OpCtx ctx, SimTime started, Cont done);
  void write_loop(uint32_t blade, OpCtx ctx, SimTime started, Cont done);
  void scan(uint32_t i, OpCtx ctx, SimTime started, uint32_t blade, Cont done);
  LineId flag_;
  std::vector<LineId> indicators_;
};

// Hierarchical lock: intra-blade handovers through a blade-local queue at
// zero network cost, a configurable inter-blade lock acquired once per
// cohort and passed locally up to `budget` times.
class CohortRwLock : public Lock {
 public:
  CohortRwLock(System& sys, std::string name, uint32_t blades,
               uint32_t threads_per_blade, uint32_t budget,
               LockKind global_kind);
  void acquire(uint32_t blade, uint32_t thread, LockMode mode, OpCtx ctx,
               Cont done) override;
  void release(uint32_t blade, uint32_t thread, LockMode mode, OpCtx ctx,
               Cont done) override;

  uint64_t global_handovers() const { return global_acquires_; }
  uint64_t local_handovers() const { return local_passes_; }

 private:
  struct Waiter {
    OpCtx ctx;
    SimTime started;
    Cont done;
  };
  struct BladeState {
    bool owns_global{false};
    bool global_pending{false};
    bool active{false};
    uint32_t passes{0};
    std::deque<Waiter> q;
  };
  void pump(uint32_t blade);

  std::unique_ptr<Lock> global_;
  uint32_t budget_;
  uint32_t rep_thread_;  // reserved thread id for the cohort representative
  std::vector<BladeState> blades_;
  uint64_t global_acquires_{0};
  uint64_t local_passes_{0};
};

// Standalone lock service bypassing coherence: a manager on one blade keeps
// a FIFO reader-writer queue per lock and answers requests over the network.
class LockServiceRegistry;

class LockServiceLock : public Lock {
 public:
  LockServiceLock(System& sys, std::string name, LockServiceRegistry& reg);
  void acquire(uint32_t blade, uint32_t thread, LockMode mode, OpCtx ctx,
               Cont done) override;
  void release(uint32_t blade, uint32_t thread, LockMode mode, OpCtx ctx,
               Cont done) override;

  uint32_t manager_blade() const { return manager_; }
  uint64_t grants_sent() const { return grants_sent_; }

 private:
  friend class LockServiceRegistry;
  struct Pending {
    uint32_t blade;
    uint32_t thread;
    LockMode mode;
  };
  void manager_acquire(uint32_t blade, uint32_t thread, LockMode mode);
  void manager_release(LockMode mode);
  void manager_pump();
  void grant(const Pending& p);
  void complete(uint32_t blade, uint32_t thread);

  LockServiceRegistry& reg_;
  uint64_t service_id_;
  uint32_t manager_;
  // manager-side state (lives on the manager blade)
  int active_readers_{0};
  bool active_writer_{false};
  std::deque<Pending> queue_;
  uint64_t grants_sent_{0};
  // requestor-side continuations keyed by (blade, thread)
  std::map<uint64_t, std::pair<SimTime, Cont>> waiting_;
  std::map<uint64_t, std::pair<OpCtx, LockMode>> waiting_meta_;
};

// Routes LockReq/LockGrant/LockRelease deliveries to their lock objects.
class LockServiceRegistry {
 public:
  explicit LockServiceRegistry(System& sys);
  uint64_t register_lock(LockServiceLock* lock);
  void handle(uint32_t blade, const Message& msg);

 private:
  System& sys_;
  std::vector<LockServiceLock*> locks_;
};

// Lock-line backed reader-writer lock with a blade-local cohort funnel: at
// most one request per (blade, line) is outstanding, local threads share or
// pass the cached line, and a budget bounds consecutive local handovers
// while remote requestors wait.
class GcpLock : public Lock {
 public:
  GcpLock(System& sys, std::string name, std::vector<Region> regions,
          uint32_t blades, uint32_t budget);
  void acquire(uint32_t blade, uint32_t thread, LockMode mode, OpCtx ctx,
               Cont done) override;
  void release(uint32_t blade, uint32_t thread, LockMode mode, OpCtx ctx,
               Cont done) override;
  std::optional<LineId> coupled_data_line() const override;

  LineId line() const { return line_; }

 private:
  struct Waiter {
    LockMode mode;
    OpCtx ctx;
    SimTime started;
    Cont done;
  };
  struct BladeState {
    std::deque<Waiter> q;
    uint32_t passes{0};
    bool remote_pending{false};
  };
  void pump(uint32_t blade);

  LineId line_;
  bool coupled_;
  uint32_t budget_;
  std::vector<BladeState> blades_;
};

// Builds the lock named by `cfg` over `data_bytes` of protected state.
// For data-coupled lock-line locks the regions cover the protected bytes;
// other kinds leave data movement to the caller.
std::unique_ptr<Lock> make_lock(System& sys, const LockConfig& cfg,
                                const std::string& name, uint32_t blades,
                                uint32_t threads_per_blade,
                                uint32_t data_bytes,
                                LockServiceRegistry* service);

}  // namespace gcpsim
