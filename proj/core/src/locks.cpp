#include "gcpsim/locks.hpp"

#include <cstring>

namespace gcpsim {

namespace {
constexpr uint64_t kWriterBit = 1ull << 62;
constexpr uint64_t kReaderMask = 0xFFFFFFFFull;

uint64_t key(uint32_t blade, uint32_t thread) {
  return (static_cast<uint64_t>(blade) << 32) | thread;
}
}  // namespace

const char* to_string(LockKind k) {
  switch (k) {
    case LockKind::Mcs: return "mcs";
    case LockKind::CentralizedRw: return "centralized_rw";
    case LockKind::PercpuRw: return "percpu_rw";
    case LockKind::CohortRw: return "cohort_rw";
    case LockKind::LockService: return "lock_service";
    case LockKind::Gcp: return "gcp";
  }
  return "?";
}

LockKind lock_kind_from_string(const std::string& s) {
  if (s == "mcs") return LockKind::Mcs;
  if (s == "centralized_rw" || s == "pthread") return LockKind::CentralizedRw;
  if (s == "percpu_rw" || s == "percpu") return LockKind::PercpuRw;
  if (s == "cohort_rw" || s == "cohort") return LockKind::CohortRw;
  if (s == "lock_service") return LockKind::LockService;
  if (s == "gcp") return LockKind::Gcp;
  throw ConfigError("unknown lock.kind: " + s);
}

void LockMonitor::enter(LockMode mode) {
  if (mode == LockMode::Exclusive) {
    if (writers_ > 0 || readers_ > 0)
      throw ProtocolError("mutual exclusion violated: writer admitted with " +
                          std::to_string(writers_) + " writers and " +
                          std::to_string(readers_) + " readers active");
    writers_ = 1;
    exclusive_grants_++;
    staged_ = counter_;
  } else {
    if (writers_ > 0)
      throw ProtocolError("reader admitted while a writer holds the lock");
    readers_++;
    shared_grants_++;
  }
}

void LockMonitor::exit(LockMode mode) {
  if (mode == LockMode::Exclusive) {
    if (writers_ != 1) throw ProtocolError("exclusive release without hold");
    counter_ = staged_ + 1;
    writers_ = 0;
  } else {
    if (readers_ < 1) throw ProtocolError("shared release without hold");
    readers_--;
  }
}

void Lock::granted(LockMode mode, OpCtx ctx, SimTime started, bool remote,
                   Cont& done) {
  if (!internal_)
    sys_.metrics().count_acquisition(remote, ctx.warmup,
                                     sys_.sim().now() - started);
  monitor_.enter(mode);
  done();
}

// ---------------- MCS ----------------

McsLock::McsLock(System& sys, std::string name, uint32_t blades,
                 uint32_t threads_per_blade)
    : Lock(sys, std::move(name)), threads_per_blade_(threads_per_blade) {
  tail_ = sys_.add_plain_line(64, LineClass::LockMeta);
  nodes_.reserve(blades * threads_per_blade);
  for (uint32_t b = 0; b < blades; ++b)
    for (uint32_t t = 0; t < threads_per_blade; ++t)
      nodes_.push_back(sys_.add_plain_line(64, LineClass::LockMeta));
}

LineId McsLock::node_line(uint32_t blade, uint32_t thread) const {
  return nodes_.at(blade * threads_per_blade_ + thread);
}

void McsLock::acquire(uint32_t blade, uint32_t thread, LockMode mode,
                      OpCtx ctx, Cont done) {
  if (mode != LockMode::Exclusive)
    throw ProtocolError("MCS lock supports exclusive mode only");
  Blade& bl = sys_.blade(blade);
  const LineId node = node_line(blade, thread);
  const SimTime started = sys_.sim().now();
  OpCtx enq = ctx;
  enq.critical = false;  // enqueue traffic is off the handover critical path

  // waiting flag at offset 0, successor link at offset 8
  bl.fetch(node, Permission::M, enq, [this, &bl, node, blade, thread, mode,
                                      ctx, enq, started,
                                      done = std::move(done)]() mutable {
    bl.store_word(node, 1, 0);
    bl.store_word(node, 0, 8);
    bl.rmw(
        tail_, [node](uint64_t) { return node; }, enq,
        [this, &bl, node, blade, mode, ctx, enq, started,
         done = std::move(done)](uint64_t prev) mutable {
          if (prev == 0) {
            Cont d = std::move(done);
            granted(mode, ctx, started, true, d);
            return;
          }
          // link into the predecessor's node, then spin on our waiting flag
          bl.fetch(prev, Permission::M, enq,
                   [this, &bl, prev, node, mode, ctx, started,
                    done = std::move(done)]() mutable {
                     bl.store_word(prev, node, 8);
                     OpCtx spin = ctx;
                     spin.critical = true;
                     bl.spin_until(
                         node, Permission::M,
                         [](const Bytes& b) {
                           uint64_t w;
                           std::memcpy(&w, b.data(), 8);
                           return w == 0;
                         },
                         spin,
                         [this, mode, ctx, started,
                          done = std::move(done)]() mutable {
                           Cont d = std::move(done);
                           granted(mode, ctx, started, true, d);
                         });
                   });
        });
  });
}

void McsLock::release(uint32_t blade, uint32_t thread, LockMode mode,
                      OpCtx ctx, Cont done) {
  monitor_.exit(LockMode::Exclusive);
  (void)mode;
  Blade& bl = sys_.blade(blade);
  const LineId node = node_line(blade, thread);

  auto wake_successor = [this, &bl, ctx](LineId succ, Cont done) mutable {
    bl.fetch(succ, Permission::M, ctx,
             [&bl, succ, done = std::move(done)]() mutable {
               bl.store_word(succ, 0, 0);
               done();
             });
  };

  // the successor-link read is on the handover critical path
  bl.fetch(node, Permission::M, ctx, [this, &bl, node, ctx, wake_successor,
                                      done = std::move(done)]() mutable {
    uint64_t succ = bl.load_word(node, 8);
    if (succ != 0) {
      wake_successor(succ, std::move(done));
      return;
    }
    OpCtx tailctx = ctx;
    tailctx.critical = false;
    bl.rmw(
        tail_,
        [node](uint64_t v) -> std::optional<uint64_t> {
          if (v == node) return uint64_t{0};
          return std::nullopt;
        },
        tailctx,
        [this, &bl, node, ctx, wake_successor,
         done = std::move(done)](uint64_t prior) mutable {
          if (prior == node) {  // queue emptied
            done();
            return;
          }
          // a new requestor swapped the tail; wait for it to link itself
          bl.spin_until(
              node, Permission::M,
              [](const Bytes& b) {
                uint64_t n;
                std::memcpy(&n, b.data() + 8, 8);
                return n != 0;
              },
              ctx,
              [&bl, node, wake_successor, done = std::move(done)]() mutable {
                wake_successor(bl.load_word(node, 8), std::move(done));
              });
        });
  });
}

// ---------------- centralized reader-writer ----------------

CentralizedRwLock::CentralizedRwLock(System& sys, std::string name)
    : Lock(sys, std::move(name)) {
  word_ = sys_.add_plain_line(64, LineClass::LockMeta);
}

void CentralizedRwLock::acquire(uint32_t blade, uint32_t thread, LockMode mode,
                                OpCtx ctx, Cont done) {
  (void)thread;
  const SimTime started = sys_.sim().now();
  if (mode == LockMode::Shared)
    read_loop(blade, ctx, started, std::move(done));
  else
    write_loop(blade, ctx, started, std::move(done));
}

void CentralizedRwLock::read_loop(uint32_t blade, OpCtx ctx, SimTime started,
                                  Cont done) {
  Blade& bl = sys_.blade(blade);
  bl.rmw(
      word_,
      [](uint64_t v) -> std::optional<uint64_t> {
        if (v & kWriterBit) return std::nullopt;
        return v + 1;
      },
      ctx,
      [this, &bl, blade, ctx, started, done = std::move(done)](
          uint64_t prior) mutable {
        if (!(prior & kWriterBit)) {
          granted(LockMode::Shared, ctx, started, true, done);
          return;
        }
        bl.spin_until(
            word_, Permission::S,
            [](const Bytes& b) {
              uint64_t v;
              std::memcpy(&v, b.data(), 8);
              return (v & kWriterBit) == 0;
            },
            ctx,
            [this, blade, ctx, started, done = std::move(done)]() mutable {
              read_loop(blade, ctx, started, std::move(done));
            });
      });
}

void CentralizedRwLock::write_loop(uint32_t blade, OpCtx ctx, SimTime started,
                                   Cont done) {
  Blade& bl = sys_.blade(blade);
  bl.rmw(
      word_,
      [](uint64_t v) -> std::optional<uint64_t> {
        if (v & kWriterBit) return std::nullopt;
        return v | kWriterBit;
      },
      ctx,
      [this, &bl, blade, ctx, started, done = std::move(done)](
          uint64_t prior) mutable {
        if (prior & kWriterBit) {
          bl.spin_until(
              word_, Permission::S,
              [](const Bytes& b) {
                uint64_t v;
                std::memcpy(&v, b.data(), 8);
                return (v & kWriterBit) == 0;
              },
              ctx,
              [this, blade, ctx, started, done = std::move(done)]() mutable {
                write_loop(blade, ctx, started, std::move(done));
              });
          return;
        }
        // flag is ours; wait for the reader count to drain
        bl.spin_until(
            word_, Permission::S,
            [](const Bytes& b) {
              uint64_t v;
              std::memcpy(&v, b.data(), 8);
              return (v & kReaderMask) == 0;
            },
            ctx,
            [this, ctx, started, done = std::move(done)]() mutable {
              granted(LockMode::Exclusive, ctx, started, true, done);
            });
      });
}

void CentralizedRwLock::release(uint32_t blade, uint32_t thread, LockMode mode,
                                OpCtx ctx, Cont done) {
  (void)thread;
  monitor_.exit(mode);
  Blade& bl = sys_.blade(blade);
  if (mode == LockMode::Shared) {
    bl.rmw(
        word_, [](uint64_t v) { return v - 1; }, ctx,
        [done = std::move(done)](uint64_t) mutable { done(); });
  } else {
    bl.rmw(
        word_, [](uint64_t v) { return v & ~kWriterBit; }, ctx,
        [done = std::move(done)](uint64_t) mutable { done(); });
  }
}

// ---------------- per-blade reader-writer ----------------

PercpuRwLock::PercpuRwLock(System& sys, std::string name, uint32_t blades)
    : Lock(sys, std::move(name)) {
  flag_ = sys_.add_plain_line(64, LineClass::LockMeta);
  for (uint32_t b = 0; b < blades; ++b)
    indicators_.push_back(sys_.add_plain_line(64, LineClass::LockMeta));
}

void PercpuRwLock::acquire(uint32_t blade, uint32_t thread, LockMode mode,
                           OpCtx ctx, Cont done) {
  (void)thread;
  const SimTime started = sys_.sim().now();
  if (mode == LockMode::Shared)
    read_loop(blade, ctx, started, std::move(done));
  else
    write_loop(blade, ctx, started, std::move(done));
}

void PercpuRwLock::read_loop(uint32_t blade, OpCtx ctx, SimTime started,
                             Cont done) {
  Blade& bl = sys_.blade(blade);
  bl.fetch(flag_, Permission::S, ctx, [this, &bl, blade, ctx, started,
                                       done = std::move(done)]() mutable {
    if (bl.load_word(flag_) != 0) {
      bl.spin_until(
          flag_, Permission::S,
          [](const Bytes& b) {
            uint64_t v;
            std::memcpy(&v, b.data(), 8);
            return v == 0;
          },
          ctx,
          [this, blade, ctx, started, done = std::move(done)]() mutable {
            read_loop(blade, ctx, started, std::move(done));
          });
      return;
    }
    bl.rmw(
        indicators_[blade], [](uint64_t v) { return v + 1; }, ctx,
        [this, &bl, blade, ctx, started,
         done = std::move(done)](uint64_t) mutable {
          // re-check: a writer may have raised the flag meanwhile
          bl.fetch(flag_, Permission::S,
                   ctx, [this, &bl, blade, ctx, started,
                         done = std::move(done)]() mutable {
                     if (bl.load_word(flag_) == 0) {
                       granted(LockMode::Shared, ctx, started, true, done);
                       return;
                     }
                     bl.rmw(
                         indicators_[blade],
                         [](uint64_t v) { return v - 1; }, ctx,
                         [this, &bl, blade, ctx, started,
                          done = std::move(done)](uint64_t) mutable {
                           bl.spin_until(
                               flag_, Permission::S,
                               [](const Bytes& b) {
                                 uint64_t v;
                                 std::memcpy(&v, b.data(), 8);
                                 return v == 0;
                               },
                               ctx,
                               [this, blade, ctx, started,
                                done = std::move(done)]() mutable {
                                 read_loop(blade, ctx, started,
                                           std::move(done));
                               });
                         });
                   });
        });
  });
}

void PercpuRwLock::write_loop(uint32_t blade, OpCtx ctx, SimTime started,
                              Cont done) {
  Blade& bl = sys_.blade(blade);
  bl.rmw(
      flag_,
      [](uint64_t v) -> std::optional<uint64_t> {
        if (v != 0) return std::nullopt;
        return uint64_t{1};
      },
      ctx,
      [this, &bl, blade, ctx, started, done = std::move(done)](
          uint64_t prior) mutable {
        if (prior != 0) {
          bl.spin_until(
              flag_, Permission::S,
              [](const Bytes& b) {
                uint64_t v;
                std::memcpy(&v, b.data(), 8);
                return v == 0;
              },
              ctx,
              [this, blade, ctx, started, done = std::move(done)]() mutable {
                write_loop(blade, ctx, started, std::move(done));
              });
          return;
        }
        scan(0, ctx, started, blade, std::move(done));
      });
}

void PercpuRwLock::scan(uint32_t i, OpCtx ctx, SimTime started, uint32_t blade,
                        Cont done) {
  if (i == indicators_.size()) {
    granted(LockMode::Exclusive, ctx, started, true, done);
    return;
  }
  sys_.blade(blade).spin_until(
      indicators_[i], Permission::S,
      [](const Bytes& b) {
        uint64_t v;
        std::memcpy(&v, b.data(), 8);
        return v == 0;
      },
      ctx, [this, i, ctx, started, blade, done = std::move(done)]() mutable {
        scan(i + 1, ctx, started, blade, std::move(done));
      });
}

void PercpuRwLock::release(uint32_t blade, uint32_t thread, LockMode mode,
                           OpCtx ctx, Cont done) {
  (void)thread;
  monitor_.exit(mode);
  Blade& bl = sys_.blade(blade);
  if (mode == LockMode::Shared) {
    bl.rmw(
        indicators_[blade], [](uint64_t v) { return v - 1; }, ctx,
        [done = std::move(done)](uint64_t) mutable { done(); });
  } else {
    bl.rmw(
        flag_, [](uint64_t) { return uint64_t{0}; }, ctx,
        [done = std::move(done)](uint64_t) mutable { done(); });
  }
}

// ---------------- cohort ----------------

CohortRwLock::CohortRwLock(System& sys, std::string name, uint32_t blades,
                           uint32_t threads_per_blade, uint32_t budget,
                           LockKind global_kind)
    : Lock(sys, std::move(name)), budget_(budget), rep_thread_(threads_per_blade),
      blades_(blades) {
  LockConfig g;
  g.kind = global_kind;
  // the representative occupies one extra thread slot per blade
  global_ = make_lock(sys, g, name_ + ".global", blades,
                      threads_per_blade + 1, 0, nullptr);
  global_->set_internal();
}

void CohortRwLock::acquire(uint32_t blade, uint32_t thread, LockMode mode,
                           OpCtx ctx, Cont done) {
  const SimTime started = sys_.sim().now();
  if (mode == LockMode::Shared) {
    // readers bypass the cohort layer and take the global lock shared
    global_->acquire(blade, thread, mode, ctx,
                     [this, ctx, started, done = std::move(done)]() mutable {
                       granted(LockMode::Shared, ctx, started, true, done);
                     });
    return;
  }
  BladeState& st = blades_.at(blade);
  st.q.push_back(Waiter{ctx, started, std::move(done)});
  pump(blade);
}

void CohortRwLock::pump(uint32_t blade) {
  BladeState& st = blades_.at(blade);
  if (st.active || st.q.empty()) return;
  if (st.owns_global) {
    Waiter w = std::move(st.q.front());
    st.q.pop_front();
    st.active = true;
    granted(LockMode::Exclusive, w.ctx, w.started, true, w.done);
    return;
  }
  if (st.global_pending) return;
  st.global_pending = true;
  OpCtx ctx = st.q.front().ctx;
  global_->acquire(blade, rep_thread_, LockMode::Exclusive, ctx,
                   [this, blade]() {
                     BladeState& st = blades_.at(blade);
                     st.global_pending = false;
                     st.owns_global = true;
                     st.passes = 0;
                     global_acquires_++;
                     pump(blade);
                   });
}

void CohortRwLock::release(uint32_t blade, uint32_t thread, LockMode mode,
                           OpCtx ctx, Cont done) {
  monitor_.exit(mode);
  if (mode == LockMode::Shared) {
    global_->release(blade, thread, mode, ctx, std::move(done));
    return;
  }
  BladeState& st = blades_.at(blade);
  st.active = false;
  if (!st.q.empty() && st.passes < budget_) {
    st.passes++;
    local_passes_++;
    pump(blade);
    done();
    return;
  }
  st.owns_global = false;
  global_->release(blade, rep_thread_, LockMode::Exclusive, ctx,
                   [this, blade, done = std::move(done)]() mutable {
                     done();
                     pump(blade);
                   });
}

// ---------------- standalone lock service ----------------

LockServiceRegistry::LockServiceRegistry(System& sys) : sys_(sys) {
  sys_.set_service_handler(
      [this](uint32_t blade, const Message& msg) { handle(blade, msg); });
}

uint64_t LockServiceRegistry::register_lock(LockServiceLock* lock) {
  locks_.push_back(lock);
  return locks_.size() - 1;
}

void LockServiceRegistry::handle(uint32_t blade, const Message& msg) {
  LockServiceLock* lk = locks_.at(msg.line & ~(1ull << 62));
  switch (msg.kind) {
    case MsgKind::LockReq:
      lk->manager_acquire(msg.requestor.index,
                          static_cast<uint32_t>(msg.payload().value),
                          msg.want == Permission::M ? LockMode::Exclusive
                                                    : LockMode::Shared);
      return;
    case MsgKind::LockRelease:
      lk->manager_release(msg.want == Permission::M ? LockMode::Exclusive
                                                    : LockMode::Shared);
      return;
    case MsgKind::LockGrant:
      lk->complete(blade, static_cast<uint32_t>(msg.payload().value));
      return;
    default:
      throw ProtocolError("lock service: unexpected message");
  }
}

LockServiceLock::LockServiceLock(System& sys, std::string name,
                                 LockServiceRegistry& reg)
    : Lock(sys, std::move(name)), reg_(reg) {
  service_id_ = reg_.register_lock(this);
  uint64_t h = (service_id_ + 1) * 0x9E3779B97F4A7C15ull;
  manager_ = static_cast<uint32_t>((h >> 32) % sys_.blade_count());
}

void LockServiceLock::acquire(uint32_t blade, uint32_t thread, LockMode mode,
                              OpCtx ctx, Cont done) {
  waiting_[key(blade, thread)] = {sys_.sim().now(), std::move(done)};
  waiting_meta_[key(blade, thread)] = {ctx, mode};
  if (blade == manager_) {
    manager_acquire(blade, thread, mode);
    return;
  }
  Message req;
  req.kind = MsgKind::LockReq;
  req.line = (1ull << 62) | service_id_;
  req.want = mode == LockMode::Exclusive ? Permission::M : Permission::S;
  req.requestor = ActorId::blade(blade);
  req.critical = ctx.critical;
  req.warmup = ctx.warmup;
  auto body = std::make_shared<MsgBody>();
  body->value = thread;
  req.body = body;
  sys_.sim().send(ActorId::blade(blade), ActorId::blade(manager_), req);
}

void LockServiceLock::manager_acquire(uint32_t blade, uint32_t thread,
                                      LockMode mode) {
  queue_.push_back(Pending{blade, thread, mode});
  manager_pump();
}

void LockServiceLock::manager_pump() {
  while (!queue_.empty()) {
    const Pending& p = queue_.front();
    if (p.mode == LockMode::Shared) {
      if (active_writer_) return;
      active_readers_++;
    } else {
      if (active_writer_ || active_readers_ > 0) return;
      active_writer_ = true;
    }
    Pending granted_req = p;
    queue_.pop_front();
    grant(granted_req);
  }
}

void LockServiceLock::grant(const Pending& p) {
  grants_sent_++;
  if (p.blade == manager_) {
    complete(p.blade, p.thread);
    return;
  }
  Message g;
  g.kind = MsgKind::LockGrant;
  g.line = (1ull << 62) | service_id_;
  g.want = p.mode == LockMode::Exclusive ? Permission::M : Permission::S;
  auto body = std::make_shared<MsgBody>();
  body->value = p.thread;
  g.body = body;
  sys_.sim().send(ActorId::blade(manager_), ActorId::blade(p.blade), g);
}

void LockServiceLock::complete(uint32_t blade, uint32_t thread) {
  auto it = waiting_.find(key(blade, thread));
  if (it == waiting_.end())
    throw ProtocolError("lock-service grant for an unknown waiter");
  auto [started, done] = std::move(it->second);
  waiting_.erase(it);
  auto meta = waiting_meta_.at(key(blade, thread));
  waiting_meta_.erase(key(blade, thread));
  granted(meta.second, meta.first, started, true, done);
}

void LockServiceLock::manager_release(LockMode mode) {
  if (mode == LockMode::Exclusive) {
    active_writer_ = false;
  } else {
    active_readers_--;
  }
  manager_pump();
}

void LockServiceLock::release(uint32_t blade, uint32_t thread, LockMode mode,
                              OpCtx ctx, Cont done) {
  (void)thread;
  monitor_.exit(mode);
  if (blade == manager_) {
    manager_release(mode);
    done();
    return;
  }
  Message rel;
  rel.kind = MsgKind::LockRelease;
  rel.line = (1ull << 62) | service_id_;
  rel.want = mode == LockMode::Exclusive ? Permission::M : Permission::S;
  rel.critical = ctx.critical;
  rel.warmup = ctx.warmup;
  sys_.sim().send(ActorId::blade(blade), ActorId::blade(manager_), rel);
  done();
}

// ---------------- lock-line backed lock ----------------

GcpLock::GcpLock(System& sys, std::string name, std::vector<Region> regions,
                 uint32_t blades, uint32_t budget)
    : Lock(sys, std::move(name)), budget_(budget), blades_(blades) {
  coupled_ = !regions.empty();
  line_ = sys_.register_lock(std::move(regions));
}

std::optional<LineId> GcpLock::coupled_data_line() const {
  if (coupled_) return line_;
  return std::nullopt;
}

void GcpLock::acquire(uint32_t blade, uint32_t thread, LockMode mode,
                      OpCtx ctx, Cont done) {
  (void)thread;
  blades_.at(blade).q.push_back(
      Waiter{mode, ctx, sys_.sim().now(), std::move(done)});
  pump(blade);
}

void GcpLock::pump(uint32_t blade) {
  BladeState& st = blades_.at(blade);
  Blade& bl = sys_.blade(blade);
  while (!st.q.empty()) {
    if (st.remote_pending) return;
    auto v = bl.lock_view(line_);
    const LockMode head_mode = st.q.front().mode;
    Permission want =
        head_mode == LockMode::Exclusive ? Permission::M : Permission::S;
    const bool contended = !v.queue.empty() || v.notify_writer;
    const bool budget_spent = contended && st.passes >= budget_;
    if (!budget_spent && !v.notify_writer &&
        bl.lock_try_acquire_local(line_, want)) {
      if (contended) st.passes++;
      Waiter w = std::move(st.q.front());
      st.q.pop_front();
      granted(head_mode, w.ctx, w.started, false, w.done);
      continue;
    }
    if (v.active_cs > 0 || v.outstanding) return;  // wait for releases
    // head goes remote; one outstanding request per (blade, line)
    st.remote_pending = true;
    Waiter w = std::move(st.q.front());
    st.q.pop_front();
    bl.lock_acquire(line_, want,
                    w.ctx, [this, blade, w = std::move(w)](bool remote) mutable {
                      BladeState& st = blades_.at(blade);
                      st.remote_pending = false;
                      st.passes = 0;
                      granted(w.mode, w.ctx, w.started, remote, w.done);
                      pump(blade);
                    });
    return;
  }
}

void GcpLock::release(uint32_t blade, uint32_t thread, LockMode mode,
                      OpCtx ctx, Cont done) {
  (void)thread;
  (void)ctx;
  monitor_.exit(mode);
  BladeState& st = blades_.at(blade);
  Blade& bl = sys_.blade(blade);
  auto v = bl.lock_view(line_);

  // intra-blade handover: pass the cached line to the next local waiter
  // instead of releasing it, bounded by the cohort budget under contention
  if (v.active_cs == 1 && !st.q.empty() && !v.notify_writer &&
      !v.transfer_pending && !v.outstanding) {
    const LockMode head_mode = st.q.front().mode;
    Permission want =
        head_mode == LockMode::Exclusive ? Permission::M : Permission::S;
    const bool contended = !v.queue.empty();
    if (v.perm >= want && (!contended || st.passes < budget_)) {
      bl.lock_pass_local(line_, want);
      if (contended) st.passes++;
      Waiter w = std::move(st.q.front());
      st.q.pop_front();
      granted(head_mode, w.ctx, w.started, false, w.done);
      done();
      return;
    }
  }
  bl.lock_release(line_);
  done();
  pump(blade);
}

// ---------------- factory ----------------

std::unique_ptr<Lock> make_lock(System& sys, const LockConfig& cfg,
                                const std::string& name, uint32_t blades,
                                uint32_t threads_per_blade, uint32_t data_bytes,
                                LockServiceRegistry* service) {
  switch (cfg.kind) {
    case LockKind::Mcs:
      return std::make_unique<McsLock>(sys, name, blades, threads_per_blade);
    case LockKind::CentralizedRw:
      return std::make_unique<CentralizedRwLock>(sys, name);
    case LockKind::PercpuRw:
      return std::make_unique<PercpuRwLock>(sys, name, blades);
    case LockKind::CohortRw:
      if (cfg.cohort_global == LockKind::CohortRw ||
          cfg.cohort_global == LockKind::Gcp ||
          cfg.cohort_global == LockKind::LockService)
        throw ConfigError("lock.cohort_global must be a coherence-layered "
                          "flat lock kind");
      return std::make_unique<CohortRwLock>(sys, name, blades,
                                            threads_per_blade,
                                            cfg.cohort_budget,
                                            cfg.cohort_global);
    case LockKind::LockService:
      if (!service)
        throw ConfigError("lock service requires a manager registry");
      return std::make_unique<LockServiceLock>(sys, name, *service);
    case LockKind::Gcp: {
      std::vector<Region> regions;
      if (cfg.gcp_api == GcpApi::Pthread) {
        regions.push_back(Region{sys.lines().alloc_addr(8), 8});
      } else if (data_bytes > 0) {
        regions.push_back(
            Region{sys.lines().alloc_addr(data_bytes), data_bytes});
      }
      return std::make_unique<GcpLock>(sys, name, std::move(regions), blades,
                                       cfg.cohort_budget);
    }
  }
  throw ConfigError("unknown lock kind");
}

}  // namespace gcpsim
