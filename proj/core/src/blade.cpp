#include "gcpsim/blade.hpp"

#include <cstring>
#include <sstream>

#include "gcpsim/system.hpp"

namespace gcpsim {

namespace {

uint64_t read_u64(const Bytes& b, uint32_t off) {
  if (b.size() < off + 8) return 0;
  uint64_t v;
  std::memcpy(&v, b.data() + off, 8);
  return v;
}

void write_u64(Bytes& b, uint32_t off, uint64_t v) {
  if (b.size() < off + 8) b.resize(off + 8, 0);
  std::memcpy(b.data() + off, &v, 8);
}

}  // namespace

void Blade::on_message(const Message& msg) {
  switch (msg.kind) {
    case MsgKind::MemData:
    case MsgKind::DataReply:
    case MsgKind::Invalidate:
      if (sys_.lines().is_lock_line(msg.line)) {
        handle_lock(msg);
      } else {
        handle_plain(msg);
      }
      return;
    case MsgKind::GrantS:
    case MsgKind::GrantM:
    case MsgKind::Acquire:
    case MsgKind::Enqueue:
    case MsgKind::WriterWaitNotify:
    case MsgKind::InvAckToWriter:
    case MsgKind::QTransferApprove:
    case MsgKind::QTransferDeny:
      handle_lock(msg);
      return;
    case MsgKind::LockReq:
    case MsgKind::LockGrant:
    case MsgKind::LockRelease:
      sys_.dispatch_service(index_, msg);
      return;
    default:
      throw ProtocolError(std::string("blade b") + std::to_string(index_) +
                          ": unexpected message " + to_string(msg.kind));
  }
}

// ---------------- plain coherence ----------------

void Blade::fetch(LineId line, Permission want, OpCtx ctx, Cont done) {
  if (sys_.lines().is_lock_line(line))
    throw ProtocolError("fetch on a lock line");
  PlainLine& pl = plain_[line];
  if (pl.perm >= want) {
    done();
    return;
  }
  pl.fetch_queue.push_back(PendingFetch{want, ctx, std::move(done)});
  if (!pl.fetch_pending) issue_fetch(line, pl);
}

void Blade::issue_fetch(LineId line, PlainLine& pl) {
  while (!pl.fetch_queue.empty() && !pl.fetch_pending) {
    PendingFetch& f = pl.fetch_queue.front();
    if (pl.perm >= f.want) {
      Cont d = std::move(f.done);
      pl.fetch_queue.pop_front();
      d();
      continue;
    }
    pl.fetch_pending = true;
    pl.fetch_want = f.want;
    pl.fetch_ctx = f.ctx;
    Message req;
    req.kind = MsgKind::FetchReq;
    req.line = line;
    req.want = f.want;
    req.requestor = id();
    req.critical = f.ctx.critical;
    req.warmup = f.ctx.warmup;
    sys_.sim().send(id(), ActorId::switch_dir(), req);
  }
}

void Blade::complete_fetch(LineId line, PlainLine& pl, const Message& grant) {
  pl.fetch_pending = false;
  pl.perm = grant.want;
  if (grant.payload_bytes > 0) {
    pl.data = grant.payload().data;
  } else if (pl.data.empty()) {
    pl.data.assign(sys_.lines().info(line).size_bytes, 0);
  }
  sys_.metrics().count_txn(sys_.lines().info(line).cls, pl.fetch_ctx.critical,
                           pl.fetch_ctx.warmup, index_, line);

  PendingFetch f = std::move(pl.fetch_queue.front());
  pl.fetch_queue.pop_front();
  f.done();

  // invalidations that raced the fill apply after its consumer ran
  while (!pl.deferred_invals.empty()) {
    Message inv = pl.deferred_invals.front();
    pl.deferred_invals.pop_front();
    apply_invalidate(line, pl, inv);
  }
  issue_fetch(line, pl);
}

void Blade::apply_invalidate(LineId line, PlainLine& pl, const Message& msg) {
  if (pl.perm == Permission::I) {
    if (pl.fetch_pending) {
      pl.deferred_invals.push_back(msg);
      return;
    }
    throw ProtocolError("b" + std::to_string(index_) +
                        ": invalidate for uncached line " +
                        std::to_string(line) + "\n" + dump());
  }
  const bool dirty = pl.perm == Permission::M;
  const bool demote = msg.want == Permission::S;
  Message ack;
  ack.kind = MsgKind::InvAck;
  ack.line = line;
  if (dirty) {
    ack.payload_bytes = sys_.lines().info(line).size_bytes;
    auto body = std::make_shared<MsgBody>();
    body->data = pl.data;
    ack.body = body;
  }
  ack.critical = msg.critical;
  ack.warmup = msg.warmup;
  pl.perm = demote ? Permission::S : Permission::I;
  if (!demote) pl.data.clear();
  sys_.sim().send(id(), ActorId::switch_dir(), ack);
  if (!demote) wake_waiters_invalidated(line);
}

void Blade::handle_plain(const Message& msg) {
  PlainLine& pl = plain_[msg.line];
  switch (msg.kind) {
    case MsgKind::MemData:
    case MsgKind::DataReply:
      if (!pl.fetch_pending)
        throw ProtocolError("grant without an outstanding fetch, line " +
                            std::to_string(msg.line));
      complete_fetch(msg.line, pl, msg);
      return;
    case MsgKind::Invalidate:
      apply_invalidate(msg.line, pl, msg);
      return;
    default:
      throw ProtocolError("plain line: unexpected message");
  }
}

void Blade::rmw(LineId line,
                std::function<std::optional<uint64_t>(uint64_t)> fn, OpCtx ctx,
                std::function<void(uint64_t)> done) {
  fetch(line, Permission::M, ctx,
        [this, line, fn = std::move(fn), done = std::move(done)]() {
          PlainLine& pl = plain_.at(line);
          uint64_t prior = read_u64(pl.data, 0);
          auto nv = fn(prior);
          if (nv) {
            write_u64(pl.data, 0, *nv);
            wake_waiters_local(line);
          }
          done(prior);
        });
}

uint64_t Blade::load_word(LineId line, uint32_t offset) const {
  auto it = plain_.find(line);
  if (it == plain_.end() || it->second.perm == Permission::I)
    throw ProtocolError("load from uncached line");
  return read_u64(it->second.data, offset);
}

void Blade::store_word(LineId line, uint64_t value, uint32_t offset) {
  PlainLine& pl = plain_.at(line);
  if (pl.perm != Permission::M)
    throw ProtocolError("store without M permission");
  write_u64(pl.data, offset, value);
  wake_waiters_local(line);
}

Permission Blade::perm(LineId line) const {
  auto it = plain_.find(line);
  return it == plain_.end() ? Permission::I : it->second.perm;
}

const Bytes* Blade::cached_data(LineId line) const {
  auto it = plain_.find(line);
  if (it == plain_.end() || it->second.perm == Permission::I) return nullptr;
  return &it->second.data;
}

void Blade::spin_until(LineId line, Permission refetch,
                       std::function<bool(const Bytes&)> pred, OpCtx ctx,
                       Cont done) {
  PlainLine& pl = plain_[line];
  if (pl.perm != Permission::I && pl.perm >= Permission::S) {
    if (pred(pl.data)) {
      done();
      return;
    }
    pl.waiters.push_back(SpinWaiter{refetch, std::move(pred), ctx, std::move(done)});
    return;
  }
  fetch(line, refetch, ctx,
        [this, line, refetch, pred = std::move(pred), ctx,
         done = std::move(done)]() mutable {
          PlainLine& pl = plain_.at(line);
          if (pred(pl.data)) {
            done();
            return;
          }
          pl.waiters.push_back(
              SpinWaiter{refetch, std::move(pred), ctx, std::move(done)});
        });
}

void Blade::wake_waiters_local(LineId line) {
  PlainLine& pl = plain_.at(line);
  if (pl.waiters.empty()) return;
  std::vector<SpinWaiter> still;
  std::vector<SpinWaiter> ready;
  for (auto& w : pl.waiters) {
    if (w.pred(pl.data))
      ready.push_back(std::move(w));
    else
      still.push_back(std::move(w));
  }
  pl.waiters = std::move(still);
  for (auto& w : ready) w.done();
}

void Blade::wake_waiters_invalidated(LineId line) {
  PlainLine& pl = plain_.at(line);
  if (pl.waiters.empty()) return;
  std::vector<SpinWaiter> parked = std::move(pl.waiters);
  pl.waiters.clear();
  // one shared re-read wakes every waiter on the line
  Permission refetch = parked.front().refetch;
  OpCtx ctx = parked.front().ctx;
  fetch(line, refetch, ctx, [this, line, parked = std::move(parked)]() mutable {
    PlainLine& pl = plain_.at(line);
    std::vector<SpinWaiter> ready;
    for (auto& w : parked) {
      if (w.pred(pl.data))
        ready.push_back(std::move(w));
      else
        pl.waiters.push_back(std::move(w));
    }
    for (auto& w : ready) w.done();
  });
}

// ---------------- lock lines ----------------

void Blade::lock_acquire(LineId line, Permission want, OpCtx ctx,
                         std::function<void(bool)> done) {
  if (!sys_.lines().is_lock_line(line))
    throw ProtocolError("lock_acquire on a plain line");
  LockLine& ll = locks_[line];
  if (ll.outstanding)
    throw ProtocolError("b" + std::to_string(index_) +
                        ": concurrent acquires on one lock line");

  // local readers share a cached copy only under S permission; under M a
  // single local critical section runs at a time
  const bool compatible =
      ll.active_cs == 0 || (want == Permission::S && ll.perm == Permission::S &&
                            ll.cs_mode == CsMode::Reader);
  if (ll.perm >= want && compatible && !ll.transfer_pending &&
      !ll.waiting_writer) {
    // locality optimization: the line stayed cached, re-grant locally
    ll.active_cs++;
    ll.cs_mode = want == Permission::M ? CsMode::Writer : CsMode::Reader;
    done(false);
    return;
  }
  if (ll.active_cs != 0)
    throw ProtocolError("remote acquire with a live local critical section");

  ll.outstanding = true;
  ll.want_pending = want;
  ll.acq_ctx = ctx;
  ll.acq_done = std::move(done);
  ll.fill_grant = false;
  send_acquire(line, ll);
}

bool Blade::lock_try_acquire_local(LineId line, Permission want) {
  LockLine& ll = locks_[line];
  if (ll.outstanding) return false;
  const bool compatible =
      ll.active_cs == 0 || (want == Permission::S && ll.perm == Permission::S &&
                            ll.cs_mode == CsMode::Reader);
  if (!(ll.perm >= want && compatible && !ll.transfer_pending &&
        !ll.waiting_writer))
    return false;
  ll.active_cs++;
  ll.cs_mode = want == Permission::M ? CsMode::Writer : CsMode::Reader;
  return true;
}

void Blade::lock_pass_local(LineId line, Permission want) {
  LockLine& ll = locks_.at(line);
  if (ll.active_cs != 1 || ll.perm < want || ll.transfer_pending ||
      ll.waiting_writer || ll.outstanding)
    throw ProtocolError("invalid local lock handover");
  ll.cs_mode = want == Permission::M ? CsMode::Writer : CsMode::Reader;
}

void Blade::send_acquire(LineId line, LockLine& ll) {
  Message req;
  req.kind = MsgKind::Acquire;
  req.line = line;
  req.want = ll.want_pending;
  req.requestor = id();
  req.critical = ll.acq_ctx.critical;
  req.warmup = ll.acq_ctx.warmup;
  sys_.sim().send(id(), ActorId::switch_dir(), req);
}

void Blade::complete_lock_acquire(LineId line, LockLine& ll, bool remote) {
  if (!ll.outstanding)
    throw ProtocolError("grant without an outstanding acquire");
  ll.outstanding = false;
  ll.active_cs++;
  ll.cs_mode =
      ll.want_pending == Permission::M ? CsMode::Writer : CsMode::Reader;
  if (remote) {
    if (ll.cs_mode == CsMode::Writer) sys_.note_writer_granted(line, index_);
    sys_.metrics().count_txn(LineClass::LockLine, ll.acq_ctx.critical,
                             ll.acq_ctx.warmup, index_, line);
  }
  // a notify that crossed this acquire: a memory fill means we were a
  // counted sharer (ack at release); a relayed grant means the directory
  // already compensated on our behalf
  if (ll.stash_notify) {
    ll.stash_notify = false;
    if (remote && ll.cs_mode == CsMode::Reader && !ll.notify_writer &&
        ll.fill_grant) {
      ll.notify_writer = true;
      ll.writer = ll.stash_writer;
    }
  }
  auto done = std::move(ll.acq_done);
  ll.acq_done = nullptr;
  done(remote);
}

void Blade::lock_release(LineId line) {
  LockLine& ll = locks_.at(line);
  if (ll.active_cs < 1)
    throw ProtocolError("release without a matching acquire");
  ll.active_cs--;
  if (ll.active_cs > 0) return;
  const bool writer = ll.cs_mode == CsMode::Writer;
  ll.cs_mode = CsMode::None;

  if (!writer) {
    reader_release_to_writer(line, ll);
    return;
  }
  // releasing writer: dispose of the queue per the transfer protocol
  if (ll.queue.empty()) {
    if (sys_.options().locality_opt) {
      // drop the queue, keep line and data cached; the directory keeps
      // routing requests here and an idle handover serves them
      ll.has_queue = false;
    } else {
      start_disposition(line, ll);  // evict
    }
    return;
  }
  start_disposition(line, ll);
}

void Blade::reader_release_to_writer(LineId line, LockLine& ll) {
  if (ll.notify_writer) {
    ActorId writer = ll.writer;
    ll.notify_writer = false;
    drop_lock_copy(line, ll);
    Message ack;
    ack.kind = MsgKind::InvAckToWriter;
    ack.line = line;
    sys_.sim().send(id(), writer, ack);
    Message rel;
    rel.kind = MsgKind::Release;
    rel.line = line;
    sys_.sim().send(id(), ActorId::switch_dir(), rel);
    return;
  }
  if (!sys_.options().locality_opt) {
    // no deferred writer: an S copy may drop silently; stale sharer-list
    // entries answer later notifications with an immediate ack
    drop_lock_copy(line, ll);
  }
}

void Blade::drop_lock_copy(LineId line, LockLine& ll) {
  (void)line;
  ll.perm = Permission::I;
  ll.data.clear();
  ll.data_valid = false;
}

void Blade::start_disposition(LineId line, LockLine& ll) {
  if (ll.transfer_pending)
    throw ProtocolError("disposition while a transfer is pending");
  auto body = std::make_shared<MsgBody>();
  const uint32_t size = sys_.lines().info(line).size_bytes;
  if (ll.data_valid && size > 0) body->data = ll.data;

  if (ll.queue.empty()) {
    body->dispo = Disposition::Evict;
  } else if (ll.queue.front().want == Permission::M) {
    body->dispo = Disposition::TransferToWriter;
    body->grants.push_back(ll.queue.front());
    body->queue.assign(ll.queue.begin() + 1, ll.queue.end());
  } else {
    size_t i = 0;
    while (i < ll.queue.size() && ll.queue[i].want == Permission::S) i++;
    body->grants.assign(ll.queue.begin(), ll.queue.begin() + i);
    if (i < ll.queue.size()) {
      body->dispo = Disposition::GrantReadersThenTransfer;
      body->writer = ll.queue[i].blade;
      body->has_writer = true;
      body->queue.assign(ll.queue.begin() + i + 1, ll.queue.end());
    } else {
      body->dispo = Disposition::GrantReadersThenDrop;
    }
  }

  Message req;
  req.kind = MsgKind::QTransferReq;
  req.line = line;
  req.version = ll.holder_version;
  req.payload_bytes = static_cast<uint32_t>(body->data.size() +
                                            16 * body->queue.size());
  req.body = body;
  ll.transfer_pending = true;
  ll.pending_dispo = body->dispo;
  sys_.sim().send(id(), ActorId::switch_dir(), req);
}

void Blade::on_transfer_verdict(LineId line, LockLine& ll,
                                const Message& msg) {
  ll.transfer_pending = false;
  if (msg.kind == MsgKind::QTransferDeny) {
    // every forward the directory counted has arrived by now (the channel is
    // FIFO); reattempt over the grown queue
    start_disposition(line, ll);
    return;
  }
  // approved: queue, line and data have left this blade
  ll.has_queue = false;
  ll.queue.clear();
  ll.holder_version = 0;
  drop_lock_copy(line, ll);
}

void Blade::on_forwarded_acquire(LineId line, LockLine& ll,
                                 const Message& msg) {
  sys_.check_forward_target(line, index_);
  ll.holder_version++;
  ll.has_queue = true;
  ll.queue.push_back(QueueEntry{msg.requestor, msg.want});
  sys_.observe_queue_len(ll.queue.size());
  const bool idle = ll.active_cs == 0 && !ll.waiting_writer &&
                    !ll.transfer_pending && !ll.outstanding;
  if (idle) start_disposition(line, ll);
}

void Blade::writer_commit(LineId line, LockLine& ll) {
  ll.waiting_writer = false;
  ll.perm = Permission::M;
  Message up;
  up.kind = MsgKind::DirUpdate;
  up.line = line;
  sys_.sim().send(id(), ActorId::switch_dir(), up);
  complete_lock_acquire(line, ll, true);
}

void Blade::lock_fetch_data(LineId line, OpCtx ctx, Cont done) {
  LockLine& ll = locks_.at(line);
  const uint32_t size = sys_.lines().info(line).size_bytes;
  if (ll.data_valid || size == 0) {
    done();
    return;
  }
  ll.data_waiters.push_back(std::move(done));
  if (ll.data_fetch_pending) return;
  ll.data_fetch_pending = true;
  Message req;
  req.kind = MsgKind::FetchReq;
  req.line = line;
  req.want = Permission::I;  // data only
  req.requestor = id();
  req.critical = ctx.critical;
  req.warmup = ctx.warmup;
  sys_.sim().send(id(), ActorId::switch_dir(), req);
}

void Blade::lock_mutate_data(LineId line, const std::function<void(Bytes&)>& fn) {
  LockLine& ll = locks_.at(line);
  if (ll.cs_mode != CsMode::Writer || ll.active_cs < 1)
    throw ProtocolError("lock data write outside a writer critical section");
  if (!ll.data_valid && sys_.lines().info(line).size_bytes > 0)
    throw ProtocolError("lock data write before the regions arrived");
  if (ll.data.size() < sys_.lines().info(line).size_bytes)
    ll.data.resize(sys_.lines().info(line).size_bytes, 0);
  ll.data_valid = true;
  fn(ll.data);
}

const Bytes& Blade::lock_data(LineId line) const {
  const LockLine& ll = locks_.at(line);
  if (ll.active_cs < 1) throw ProtocolError("lock data read outside a CS");
  return ll.data;
}

bool Blade::lock_has_remote_waiters(LineId line) const {
  auto it = locks_.find(line);
  if (it == locks_.end()) return false;
  return !it->second.queue.empty();
}

Blade::LockLineView Blade::lock_view(LineId line) const {
  LockLineView v;
  auto it = locks_.find(line);
  if (it == locks_.end()) return v;
  const LockLine& ll = it->second;
  v.perm = ll.perm;
  v.active_cs = ll.active_cs;
  v.writer_cs = ll.active_cs > 0 && ll.cs_mode == CsMode::Writer;
  v.has_queue = ll.has_queue;
  v.transfer_pending = ll.transfer_pending;
  v.notify_writer = ll.notify_writer || ll.stash_notify;
  v.outstanding = ll.outstanding;
  v.queue.assign(ll.queue.begin(), ll.queue.end());
  v.holder_version = ll.holder_version;
  v.waiting_writer = ll.waiting_writer;
  v.pending_acks = ll.pending_acks;
  return v;
}

void Blade::handle_lock(const Message& msg) {
  LockLine& ll = locks_[msg.line];
  const uint32_t size = sys_.lines().info(msg.line).size_bytes;
  const bool combined = sys_.options().combined_data_opt;

  auto take_data = [&](const Message& m) {
    if (m.payload_bytes > 0 || size == 0) {
      ll.data = m.payload().data;
      ll.data.resize(size, 0);
      ll.data_valid = true;
    }
  };
  auto data_ready = [&]() {
    return ll.data_valid || !combined || size == 0;
  };

  switch (msg.kind) {
    case MsgKind::GrantM: {  // fill grant for a writer (unheld line)
      take_data(msg);
      ll.perm = Permission::M;
      ll.has_queue = true;  // initialize an empty queue unless one formed
      ll.fill_grant = true;
      complete_lock_acquire(msg.line, ll, true);
      return;
    }
    case MsgKind::GrantS: {  // fill grant or reader-batch grant
      take_data(msg);
      ll.perm = Permission::S;
      ll.fill_grant = msg.src.role == ActorId::Role::Memory;
      const MsgBody& b = msg.payload();
      if (b.has_writer) {
        ll.notify_writer = true;
        ll.writer = b.writer;
      }
      complete_lock_acquire(msg.line, ll, true);
      return;
    }
    case MsgKind::MemData: {  // staged regions or a separate data fetch
      ll.data = msg.payload().data;
      ll.data.resize(size, 0);
      ll.data_valid = true;
      if (ll.data_fetch_pending) {
        ll.data_fetch_pending = false;
        sys_.metrics().count_txn(LineClass::LockLine, msg.critical,
                                 msg.warmup, index_, msg.line);
        std::vector<Cont> ws = std::move(ll.data_waiters);
        ll.data_waiters.clear();
        for (auto& w : ws) w();
        return;
      }
      if (ll.waiting_writer && ll.pending_acks == 0)
        writer_commit(msg.line, ll);
      return;
    }
    case MsgKind::Enqueue: {  // this blade's writer request was deferred
      const MsgBody& b = msg.payload();
      ll.has_queue = true;
      ll.holder_version = 0;
      ll.waiting_writer = true;
      uint32_t acks = b.pending_acks;
      uint32_t early = std::min(acks, early_acks_[msg.line]);
      early_acks_[msg.line] -= early;
      ll.pending_acks = acks - early;
      if (b.value == 1) ll.data_valid = true;  // own S copy is current
      if (ll.pending_acks == 0 && data_ready()) writer_commit(msg.line, ll);
      return;
    }
    case MsgKind::WriterWaitNotify: {
      if (ll.active_cs > 0) {
        // in a read critical section: deferred invalidation, ack at release
        ll.notify_writer = true;
        ll.writer = msg.requestor;
        return;
      }
      if (ll.outstanding) {
        // crossed our own acquire; settle when the grant tells us whether we
        // were filled as a sharer or forwarded (and compensated for)
        ll.stash_notify = true;
        ll.stash_writer = msg.requestor;
        if (ll.perm != Permission::I && ll.want_pending == Permission::M)
          drop_lock_copy(msg.line, ll);
        return;
      }
      // idle or stale sharer: invalidate immediately and ack
      if (ll.perm != Permission::I) drop_lock_copy(msg.line, ll);
      Message ack;
      ack.kind = MsgKind::InvAckToWriter;
      ack.line = msg.line;
      sys_.sim().send(id(), msg.requestor, ack);
      Message rel;
      rel.kind = MsgKind::Release;
      rel.line = msg.line;
      sys_.sim().send(id(), ActorId::switch_dir(), rel);
      return;
    }
    case MsgKind::InvAckToWriter: {
      if (!ll.waiting_writer) {
        early_acks_[msg.line]++;  // ack overtook our designation
        return;
      }
      if (ll.pending_acks == 0)
        throw ProtocolError("reader ack the writer did not expect");
      ll.pending_acks--;
      if (ll.pending_acks == 0 && data_ready()) writer_commit(msg.line, ll);
      return;
    }
    case MsgKind::QTransferApprove: {
      if (ll.transfer_pending) {
        on_transfer_verdict(msg.line, ll, msg);
        return;
      }
      // incoming queue: this blade is the new holder
      sys_.note_transfer_received(msg.line);
      const MsgBody& b = msg.payload();
      ll.has_queue = true;
      ll.queue.assign(b.queue.begin(), b.queue.end());
      sys_.observe_queue_len(ll.queue.size());
      ll.holder_version = 0;
      take_data(msg);
      if (b.pending_acks > 0) {
        ll.waiting_writer = true;
        uint32_t acks = b.pending_acks;
        uint32_t early = std::min(acks, early_acks_[msg.line]);
        early_acks_[msg.line] -= early;
        ll.pending_acks = acks - early;
        if (ll.pending_acks == 0 && data_ready()) writer_commit(msg.line, ll);
        return;
      }
      ll.perm = Permission::M;
      complete_lock_acquire(msg.line, ll, true);
      return;
    }
    case MsgKind::QTransferDeny:
      if (!ll.transfer_pending)
        throw ProtocolError("transfer verdict without a pending transfer");
      on_transfer_verdict(msg.line, ll, msg);
      return;
    case MsgKind::Acquire:  // forwarded by the directory: we hold the queue
      on_forwarded_acquire(msg.line, ll, msg);
      return;
    default:
      throw ProtocolError(std::string("lock line: unexpected message ") +
                          to_string(msg.kind));
  }
}

std::string Blade::dump() const {
  std::ostringstream os;
  os << "blade b" << index_ << ":\n";
  for (const auto& [line, pl] : plain_) {
    if (pl.perm == Permission::I && !pl.fetch_pending && pl.waiters.empty())
      continue;
    os << "  line " << line << ": perm=" << to_string(pl.perm)
       << (pl.fetch_pending ? " fetch-pending" : "") << " waiters="
       << pl.waiters.size() << "\n";
  }
  for (const auto& [line, ll] : locks_) {
    os << "  lock " << line << ": perm=" << to_string(ll.perm)
       << " cs=" << ll.active_cs << (ll.has_queue ? " queue[" : "")
       << (ll.has_queue ? std::to_string(ll.queue.size()) + "]" : "")
       << (ll.waiting_writer
               ? " waiting(acks=" + std::to_string(ll.pending_acks) + ")"
               : "")
       << (ll.transfer_pending ? " transfer-pending" : "") << "\n";
  }
  return os.str();
}

}  // namespace gcpsim
