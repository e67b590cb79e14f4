#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>

#include "gcpsim/sim.hpp"
#include "gcpsim/types.hpp"

namespace gcpsim {

class System;

using Cont = std::function<void()>;

// Per-operation accounting context: critical-path flag for the transactions
// the operation triggers, and whether it belongs to the warm-up window.
struct OpCtx {
  bool critical{true};
  bool warmup{false};
};

// Compute blade: cached lines, the blade half of the coherence protocol, the
// lock-line engine (wait queue holding, transfers, writer-wait commits), and
// event-driven spin waiters for the layered lock algorithms.
class Blade : public Actor {
 public:
  Blade(System& sys, uint32_t index) : sys_(sys), index_(index) {}

  uint32_t index() const { return index_; }
  ActorId id() const { return ActorId::blade(index_); }

  void on_message(const Message& msg) override;

  // ---- plain coherence lines ----

  // Brings the line to at least `want`. Local hit completes inline with no
  // messages and no transaction; otherwise one directory transaction.
  void fetch(LineId line, Permission want, OpCtx ctx, Cont done);

  // fetch(M) + one atomic local transform. `fn` returns the new value or
  // nullopt to leave the word unchanged (failed CAS). Completes with the
  // prior value.
  void rmw(LineId line, std::function<std::optional<uint64_t>(uint64_t)> fn,
           OpCtx ctx, std::function<void(uint64_t)> done);

  // Local word access; the blade must hold a sufficient copy.
  uint64_t load_word(LineId line, uint32_t offset = 0) const;
  void store_word(LineId line, uint64_t value, uint32_t offset = 0);

  // Event-driven spin: re-reads the line only when the local copy is
  // invalidated or written by a same-blade thread. `refetch` is the
  // permission used for wake re-reads.
  void spin_until(LineId line, Permission refetch,
                  std::function<bool(const Bytes&)> pred, OpCtx ctx, Cont done);

  Permission perm(LineId line) const;
  const Bytes* cached_data(LineId line) const;

  // ---- lock lines ----

  // done(remote): remote=false for a local re-grant (0 messages, 0
  // transactions), true when the grant involved the directory.
  void lock_acquire(LineId line, Permission want, OpCtx ctx,
                    std::function<void(bool remote)> done);
  void lock_release(LineId line);

  // Grants locally iff the cached copy suffices; no messages either way.
  bool lock_try_acquire_local(LineId line, Permission want);
  // Hands the single active critical section to a same-blade successor
  // without touching the protocol (intra-blade lock handover).
  void lock_pass_local(LineId line, Permission want);

  // Awaits the shipped regions when the combined-data optimization is off
  // (separate transaction); completes inline when data already arrived.
  void lock_fetch_data(LineId line, OpCtx ctx, Cont done);

  // Region bytes access inside a critical section.
  void lock_mutate_data(LineId line, const std::function<void(Bytes&)>& fn);
  const Bytes& lock_data(LineId line) const;

  struct LockLineView {
    Permission perm{Permission::I};
    int active_cs{0};
    bool writer_cs{false};
    bool has_queue{false};
    bool transfer_pending{false};
    bool notify_writer{false};
    bool outstanding{false};
    std::vector<QueueEntry> queue;
    uint64_t holder_version{0};
    bool waiting_writer{false};
    uint32_t pending_acks{0};
  };
  LockLineView lock_view(LineId line) const;
  bool lock_has_remote_waiters(LineId line) const;

  std::string dump() const;

 private:
  struct SpinWaiter {
    Permission refetch;
    std::function<bool(const Bytes&)> pred;
    OpCtx ctx;
    Cont done;
  };

  struct PendingFetch {
    Permission want;
    OpCtx ctx;
    Cont done;
  };

  struct PlainLine {
    Permission perm{Permission::I};
    Bytes data;
    bool fetch_pending{false};
    Permission fetch_want{Permission::S};
    OpCtx fetch_ctx{};
    std::deque<PendingFetch> fetch_queue;
    std::deque<Message> deferred_invals;  // invalidations racing a fill
    std::vector<SpinWaiter> waiters;
  };

  enum class CsMode : uint8_t { None, Reader, Writer };

  struct LockLine {
    Permission perm{Permission::I};
    Bytes data;
    bool data_valid{false};
    int active_cs{0};
    CsMode cs_mode{CsMode::None};
    // acquire in flight
    bool outstanding{false};
    Permission want_pending{Permission::S};
    OpCtx acq_ctx{};
    std::function<void(bool)> acq_done;
    bool fill_grant{false};  // last grant came straight from memory
    // queue holding
    bool has_queue{false};
    std::deque<QueueEntry> queue;
    uint64_t holder_version{0};
    bool transfer_pending{false};
    bool deny_retry{false};
    Disposition pending_dispo{Disposition::TransferToWriter};
    // waiting writer (queue at the next writer while readers drain)
    bool waiting_writer{false};
    uint32_t pending_acks{0};
    bool commit_data_ready{false};
    // reader-side: writer to notify at release
    bool notify_writer{false};
    ActorId writer{};
    // notify that crossed our own in-flight acquire; resolved at the grant
    bool stash_notify{false};
    ActorId stash_writer{};
    // combined-data off: separate region fetch
    bool data_fetch_pending{false};
    std::vector<Cont> data_waiters;
  };

  void handle_plain(const Message& msg);
  void handle_lock(const Message& msg);

  void issue_fetch(LineId line, PlainLine& pl);
  void complete_fetch(LineId line, PlainLine& pl, const Message& grant);
  void apply_invalidate(LineId line, PlainLine& pl, const Message& msg);
  void wake_waiters_local(LineId line);
  void wake_waiters_invalidated(LineId line);

  void send_acquire(LineId line, LockLine& ll);
  void complete_lock_acquire(LineId line, LockLine& ll, bool remote);
  void on_forwarded_acquire(LineId line, LockLine& ll, const Message& msg);
  void start_disposition(LineId line, LockLine& ll);
  void on_transfer_verdict(LineId line, LockLine& ll, const Message& msg);
  void writer_commit(LineId line, LockLine& ll);
  void reader_release_to_writer(LineId line, LockLine& ll);
  void drop_lock_copy(LineId line, LockLine& ll);

  System& sys_;
  uint32_t index_;
  std::map<LineId, PlainLine> plain_;
  std::map<LineId, LockLine> locks_;
  std::map<LineId, uint32_t> early_acks_;  // acks that overtook a designation
};

}  // namespace gcpsim
