#include "gcpsim/workload.hpp"

#include <algorithm>
#include <cstring>

#include "gcpsim/zipf.hpp"

namespace gcpsim {

const char* to_string(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::Microbench: return "microbench";
    case WorkloadKind::KvsYcsb: return "kvs_ycsb";
    case WorkloadKind::GlobalLock: return "globallock";
  }
  return "?";
}

WorkloadKind workload_kind_from_string(const std::string& s) {
  if (s == "microbench") return WorkloadKind::Microbench;
  if (s == "kvs_ycsb" || s == "kvs") return WorkloadKind::KvsYcsb;
  if (s == "globallock" || s == "global_lock") return WorkloadKind::GlobalLock;
  throw ConfigError("unknown workload.kind: " + s);
}

void WorkloadSpec::validate() const {
  if (blades == 0) throw ConfigError("workload.blades must be positive");
  if (ops_per_thread == 0)
    throw ConfigError("workload.ops_per_thread must be positive");
  if (read_ratio < 0.0 || read_ratio > 1.0)
    throw ConfigError("workload.read_ratio must lie in [0, 1]");
  if (kind == WorkloadKind::KvsYcsb) {
    if (buckets == 0) throw ConfigError("workload.buckets must be positive");
    if (zipf_theta <= 0.0 || zipf_theta >= 1.0)
      throw ConfigError("workload.zipf_theta must lie in (0, 1)");
  }
}

namespace {

struct Harness;

// One closed-loop simulated worker: acquire, touch the protected bytes,
// optional in-section compute, release, repeat. Local completions advance
// inside a trampoline so bursts of cached operations neither recurse nor
// leave the current event.
class Worker {
 public:
  Worker(Harness& h, uint32_t blade, uint32_t thread);
  void kick() { run(); }

 private:
  enum class Stage { OpStart, Acquire, FetchData, Touch, CsWait, Release, OpDone };

  void run();
  bool step();  // false: parked on an asynchronous completion
  // Runs `op`, handing it a continuation that re-enters the trampoline.
  // Returns true when the operation completed within the call.
  template <typename Op>
  bool invoke(Op&& op) {
    in_call_ = true;
    inline_done_ = false;
    op([this] {
      if (in_call_)
        inline_done_ = true;
      else
        run();
    });
    in_call_ = false;
    return inline_done_;
  }
  void touch_coupled();
  void touch_plain();

  Harness& h_;
  uint32_t blade_;
  uint32_t thread_;
  uint64_t ops_done_{0};
  std::mt19937_64 rng_;
  Stage stage_{Stage::OpStart};
  bool running_{false};
  bool advance_{false};
  bool in_call_{false};
  bool inline_done_{false};
  // per-op state
  size_t lock_idx_{0};
  LockMode mode_{LockMode::Exclusive};
  LockMode effective_mode_{LockMode::Exclusive};
  OpCtx ctx_{};
};

struct Harness {
  Harness(const WorkloadSpec& s, const LockConfig& lc, const RunOptions& o)
      : spec(s),
        lockcfg(lc),
        opts(o),
        sys(System::Options{
            s.blades,
            SimOptions{o.profile, o.header_bytes, o.watchdog_events,
                       o.reorder_stress, 20'000, o.seed},
            o.locality_opt, o.combined_data_opt, o.check_invariants}) {
    if (o.trace) sys.sim().set_trace_sink(o.trace);
    const uint32_t nlocks =
        spec.kind == WorkloadKind::KvsYcsb ? spec.buckets : 1;
    if (lockcfg.kind == LockKind::LockService)
      service = std::make_unique<LockServiceRegistry>(sys);
    locks.reserve(nlocks);
    data_lines.reserve(nlocks);
    for (uint32_t i = 0; i < nlocks; ++i) {
      locks.push_back(make_lock(sys, lockcfg, "lock" + std::to_string(i),
                                spec.blades, spec.effective_threads(),
                                spec.data_bytes, service.get()));
      if (!locks.back()->coupled_data_line() && spec.data_bytes > 0)
        data_lines.push_back(
            sys.add_plain_line(spec.data_bytes, LineClass::AppData));
      else
        data_lines.push_back(0);
    }
    if (spec.kind == WorkloadKind::KvsYcsb) {
      uint64_t ks = spec.key_space ? spec.key_space : 16ull * spec.buckets;
      zipf = std::make_unique<ZipfGenerator>(ks, spec.zipf_theta);
    }
    if (opts.verify_data) expected.assign(nlocks, Bytes{});
    workers.reserve(spec.blades * spec.effective_threads());
    for (uint32_t b = 0; b < spec.blades; ++b)
      for (uint32_t t = 0; t < spec.effective_threads(); ++t)
        workers.push_back(std::make_unique<Worker>(*this, b, t));
  }

  RunResult run() {
    for (auto& w : workers) {
      Worker* p = w.get();
      sys.at(0, [p] { p->kick(); });
    }
    SimTime end = sys.run();
    finish_checks();

    RunResult r;
    r.completed_ops = sys.metrics().ops_total();
    r.elapsed_sim_ns = end;
    r.messages_total = sys.sim().messages_total();
    r.bytes_total = sys.sim().bytes_total();
    r.trace_hash = sys.sim().trace_hash();
    r.trace_records = sys.sim().trace_records();
    r.acqs = sys.metrics().all_acqs();
    r.steady_acqs = sys.metrics().steady_acqs();
    r.txns = sys.metrics().all_txns();
    r.steady_txns = sys.metrics().steady_txns();
    r.latency_ns = sys.metrics().latency_samples();
    std::sort(r.latency_ns.begin(), r.latency_ns.end());
    r.per_blade_ops = sys.metrics().per_blade_ops();
    r.per_blade_txns = sys.metrics().per_blade_txns();
    return r;
  }

  void finish_checks() {
    const uint64_t expected_ops = static_cast<uint64_t>(spec.blades) *
                                  spec.effective_threads() *
                                  spec.ops_per_thread;
    if (sys.metrics().ops_total() != expected_ops)
      throw ProtocolError("closed loop finished " +
                          std::to_string(sys.metrics().ops_total()) + " of " +
                          std::to_string(expected_ops) + " operations\n" +
                          sys.state_dump());
    for (auto& lk : locks) {
      if (!lk->monitor().audit_consistent())
        throw ProtocolError("serialization audit failed for " + lk->name());
    }
    if (opts.check_invariants) sys.final_audit();
  }

  const WorkloadSpec& spec;
  LockConfig lockcfg;
  RunOptions opts;
  System sys;
  std::unique_ptr<LockServiceRegistry> service;
  std::vector<std::unique_ptr<Lock>> locks;
  std::vector<LineId> data_lines;  // 0 when the lock ships the data
  std::unique_ptr<ZipfGenerator> zipf;
  std::vector<Bytes> expected;  // verify_data oracle, per lock
  std::vector<std::unique_ptr<Worker>> workers;
};

Worker::Worker(Harness& h, uint32_t blade, uint32_t thread)
    : h_(h), blade_(blade), thread_(thread),
      rng_(fnv1a(h.opts.seed * 0x517CC1B727220A95ull + blade * 1000003ull +
                 thread)) {}

void Worker::run() {
  if (running_) {
    advance_ = true;
    return;
  }
  running_ = true;
  advance_ = true;
  while (advance_) {
    advance_ = false;
    if (!step()) break;
  }
  running_ = false;
}

void Worker::touch_coupled() {
  Lock& lk = *h_.locks[lock_idx_];
  const LineId line = *lk.coupled_data_line();
  Blade& bl = h_.sys.blade(blade_);
  if (h_.sys.lines().info(line).size_bytes < 8) return;
  if (mode_ == LockMode::Exclusive) {
    const size_t idx = lock_idx_;
    bl.lock_mutate_data(line, [idx](Bytes& b) {
      uint64_t v;
      std::memcpy(&v, b.data(), 8);
      v++;
      std::memcpy(b.data(), &v, 8);
      uint64_t pat = fnv1a(v * 0x2545F4914F6CDD1Dull + idx);
      for (size_t i = 8; i + 8 <= b.size(); i += 8) {
        std::memcpy(b.data() + i, &pat, 8);
        pat = fnv1a(pat);
      }
    });
    if (h_.opts.verify_data) h_.expected[lock_idx_] = bl.lock_data(line);
  } else if (h_.opts.verify_data) {
    const Bytes& d = bl.lock_data(line);
    if (!h_.expected[lock_idx_].empty() && d != h_.expected[lock_idx_])
      throw ProtocolError("shared-section bytes differ from the last "
                          "writer's for " +
                          lk.name());
  }
}

void Worker::touch_plain() {
  if (h_.spec.data_bytes < 8) return;
  const LineId dl = h_.data_lines[lock_idx_];
  Blade& bl = h_.sys.blade(blade_);
  if (mode_ == LockMode::Exclusive) {
    uint64_t v = bl.load_word(dl) + 1;
    bl.store_word(dl, v);
    if (h_.spec.data_bytes >= 16)
      bl.store_word(dl, fnv1a(v + lock_idx_), 8);
    if (h_.opts.verify_data) h_.expected[lock_idx_] = *bl.cached_data(dl);
  } else if (h_.opts.verify_data) {
    const Bytes* d = bl.cached_data(dl);
    if (d && !h_.expected[lock_idx_].empty() && *d != h_.expected[lock_idx_])
      throw ProtocolError("shared-section bytes differ from the last writer's");
  }
}

bool Worker::step() {
  switch (stage_) {
    case Stage::OpStart: {
      if (ops_done_ == h_.spec.ops_per_thread) return false;
      ctx_.warmup = ops_done_ < h_.spec.warmup_ops;
      ctx_.critical = true;
      if (h_.spec.kind == WorkloadKind::KvsYcsb) {
        uint64_t key = h_.zipf->next(rng_);
        lock_idx_ = fnv1a(key) % h_.spec.buckets;
      } else {
        lock_idx_ = 0;
      }
      if (h_.spec.kind == WorkloadKind::GlobalLock) {
        mode_ = LockMode::Exclusive;
      } else {
        double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        mode_ = u < h_.spec.read_ratio ? LockMode::Shared : LockMode::Exclusive;
      }
      effective_mode_ =
          h_.lockcfg.kind == LockKind::Mcs ? LockMode::Exclusive : mode_;
      stage_ = Stage::Acquire;
      if (h_.spec.local_op_ns > 0) {
        h_.sys.at(h_.sys.sim().now() + h_.spec.local_op_ns, [this] { run(); });
        return false;
      }
      advance_ = true;
      return true;
    }
    case Stage::Acquire: {
      stage_ = Stage::FetchData;
      bool inline_done = invoke([this](Cont c) {
        h_.locks[lock_idx_]->acquire(blade_, thread_, effective_mode_, ctx_,
                                     std::move(c));
      });
      advance_ = inline_done;
      return inline_done;
    }
    case Stage::FetchData: {
      stage_ = Stage::Touch;
      Lock& lk = *h_.locks[lock_idx_];
      if (auto line = lk.coupled_data_line()) {
        bool inline_done = invoke([this, line](Cont c) {
          h_.sys.blade(blade_).lock_fetch_data(*line, ctx_, std::move(c));
        });
        advance_ = inline_done;
        return inline_done;
      }
      if (h_.spec.data_bytes == 0) {
        advance_ = true;
        return true;
      }
      const LineId dl = h_.data_lines[lock_idx_];
      Permission want =
          mode_ == LockMode::Exclusive ? Permission::M : Permission::S;
      bool inline_done = invoke([this, dl, want](Cont c) {
        h_.sys.blade(blade_).fetch(dl, want, ctx_, std::move(c));
      });
      advance_ = inline_done;
      return inline_done;
    }
    case Stage::Touch: {
      if (h_.locks[lock_idx_]->coupled_data_line())
        touch_coupled();
      else if (h_.spec.data_bytes > 0)
        touch_plain();
      stage_ = Stage::CsWait;
      advance_ = true;
      return true;
    }
    case Stage::CsWait: {
      stage_ = Stage::Release;
      if (h_.spec.cs_extra_ns > 0) {
        h_.sys.at(h_.sys.sim().now() + h_.spec.cs_extra_ns, [this] { run(); });
        return false;
      }
      advance_ = true;
      return true;
    }
    case Stage::Release: {
      stage_ = Stage::OpDone;
      bool inline_done = invoke([this](Cont c) {
        h_.locks[lock_idx_]->release(blade_, thread_, effective_mode_, ctx_,
                                     std::move(c));
      });
      advance_ = inline_done;
      return inline_done;
    }
    case Stage::OpDone: {
      h_.sys.metrics().count_op(blade_);
      ops_done_++;
      stage_ = Stage::OpStart;
      advance_ = true;
      return true;
    }
  }
  return false;
}

}  // namespace

RunResult run_workload(const WorkloadSpec& spec, const LockConfig& lock,
                       const RunOptions& opts) {
  spec.validate();
  Harness h(spec, lock, opts);
  return h.run();
}

RunResult run_microbench(WorkloadSpec spec, const LockConfig& lock,
                         const RunOptions& opts) {
  spec.kind = WorkloadKind::Microbench;
  return run_workload(spec, lock, opts);
}

RunResult run_kvs_ycsb(WorkloadSpec spec, const LockConfig& lock,
                       const RunOptions& opts) {
  spec.kind = WorkloadKind::KvsYcsb;
  return run_workload(spec, lock, opts);
}

RunResult run_globallock(WorkloadSpec spec, const LockConfig& lock,
                         const RunOptions& opts) {
  spec.kind = WorkloadKind::GlobalLock;
  return run_workload(spec, lock, opts);
}

}  // namespace gcpsim
