#include "gcpsim/directory.hpp"

#include <sstream>

#include "gcpsim/system.hpp"

namespace gcpsim {

const Directory::Entry& Directory::entry(LineId line) const {
  static const Entry empty;
  auto it = entries_.find(line);
  return it == entries_.end() ? empty : it->second;
}

void Directory::on_message(const Message& msg) {
  switch (msg.kind) {
    case MsgKind::FetchReq:
      if (sys_.lines().is_lock_line(msg.line) && msg.want == Permission::I) {
        // separate region fetch (combined-data optimization off)
        stage_data_to(msg.line, msg.requestor);
        return;
      }
      handle_fetch(msg);
      return;
    case MsgKind::InvAck:
      handle_inv_ack(msg);
      return;
    case MsgKind::Acquire:
      handle_acquire(msg);
      return;
    case MsgKind::QTransferReq:
      handle_transfer_req(msg);
      return;
    case MsgKind::DirUpdate:
      handle_dir_update(msg);
      return;
    case MsgKind::Release:
      handle_release(msg);
      return;
    default:
      throw ProtocolError(std::string("directory: unexpected message kind ") +
                          to_string(msg.kind));
  }
}

// ---------------- plain MSI ----------------

void Directory::handle_fetch(const Message& msg) {
  Entry& e = ent(msg.line);
  if (e.busy) {
    e.deferred.push_back(msg);
    return;
  }
  start_plain_txn(e, msg);
}

void Directory::start_plain_txn(Entry& e, const Message& msg) {
  const LineId line = msg.line;
  const uint32_t req = msg.requestor.index;
  const uint32_t size = sys_.lines().info(line).size_bytes;

  if (msg.want == Permission::S) {
    if (e.perm != Permission::M) {
      // I->S / S->S: sharer-list update, data fetched from memory
      e.perm = Permission::S;
      e.sharers.insert(req);
      fill_from_memory(line, msg.requestor, Permission::S, msg.critical,
                       msg.warmup);
      return;
    }
    // M->S: demote the owner, relay dirty data, write back to memory
    e.busy = true;
    InFlight fl;
    fl.requestor = msg.requestor;
    fl.want = Permission::S;
    fl.critical = msg.critical;
    fl.warmup = msg.warmup;
    fl.acks_left = 1;
    fl.demote = true;
    inflight_[line] = fl;
    Message inv;
    inv.kind = MsgKind::Invalidate;
    inv.line = line;
    inv.want = Permission::S;  // demote-to-S
    inv.requestor = msg.requestor;
    inv.critical = msg.critical;
    inv.warmup = msg.warmup;
    sys_.sim().send(ActorId::switch_dir(), ActorId::blade(*e.owner), inv);
    return;
  }

  // want == M
  if (e.perm == Permission::I) {
    e.perm = Permission::M;
    e.owner = req;
    e.sharers = {req};
    fill_from_memory(line, msg.requestor, Permission::M, msg.critical,
                     msg.warmup);
    return;
  }

  // S->M / M->M: invalidate every other holder, then grant
  std::vector<uint32_t> targets;
  for (uint32_t b : e.sharers)
    if (b != req) targets.push_back(b);
  const bool requestor_had_copy = e.sharers.count(req) != 0;

  if (targets.empty()) {
    // sole-sharer upgrade: permission-only grant
    e.perm = Permission::M;
    e.owner = req;
    e.sharers = {req};
    Message grant;
    grant.kind = MsgKind::DataReply;
    grant.line = line;
    grant.want = Permission::M;
    grant.payload_bytes = 0;
    grant.critical = msg.critical;
    grant.warmup = msg.warmup;
    sys_.sim().send(ActorId::switch_dir(), msg.requestor, grant);
    return;
  }

  e.busy = true;
  InFlight fl;
  fl.requestor = msg.requestor;
  fl.want = Permission::M;
  fl.critical = msg.critical;
  fl.warmup = msg.warmup;
  fl.acks_left = static_cast<uint32_t>(targets.size());
  fl.requestor_has_data = requestor_had_copy;
  inflight_[line] = fl;
  (void)size;
  for (uint32_t b : targets) {
    Message inv;
    inv.kind = MsgKind::Invalidate;
    inv.line = line;
    inv.want = Permission::M;  // drop
    inv.requestor = msg.requestor;
    inv.critical = msg.critical;
    inv.warmup = msg.warmup;
    sys_.sim().send(ActorId::switch_dir(), ActorId::blade(b), inv);
  }
}

void Directory::handle_inv_ack(const Message& msg) {
  auto it = inflight_.find(msg.line);
  if (it == inflight_.end())
    throw ProtocolError("InvAck with no transaction in flight, line " +
                        std::to_string(msg.line) + "\n" + dump());
  InFlight& fl = it->second;
  if (msg.payload_bytes > 0) {
    fl.newest = msg.payload().data;
    fl.have_newest = true;
  }
  if (--fl.acks_left == 0) finish_plain_txn(msg.line, ent(msg.line));
}

void Directory::finish_plain_txn(LineId line, Entry& e) {
  InFlight fl = inflight_.at(line);
  inflight_.erase(line);
  const uint32_t size = sys_.lines().info(line).size_bytes;
  const uint32_t req = fl.requestor.index;

  if (fl.have_newest) {
    // dirty copy was downgraded: memory becomes current again
    sys_.memory().store(line) = fl.newest;
    Message wb;
    wb.kind = MsgKind::MemWrite;
    wb.line = line;
    wb.payload_bytes = size;
    auto body = std::make_shared<MsgBody>();
    body->data = fl.newest;
    wb.body = body;
    wb.critical = false;
    sys_.sim().send(ActorId::switch_dir(), ActorId::memory(), wb);
  }

  if (fl.want == Permission::S) {
    e.perm = Permission::S;
    e.sharers.insert(req);  // old owner stays a sharer (demoted copy)
    e.owner.reset();
  } else {
    e.perm = Permission::M;
    e.owner = req;
    e.sharers = {req};
  }

  Message grant;
  grant.kind = MsgKind::DataReply;
  grant.line = line;
  grant.want = fl.want;
  grant.critical = fl.critical;
  grant.warmup = fl.warmup;
  if (!fl.requestor_has_data) {
    auto body = std::make_shared<MsgBody>();
    // The grant relays the newest bytes: the dirty copy when one was
    // invalidated, otherwise memory's copy (current, since no M copy
    // existed). Fig. 1 shows the directory acknowledging with the data and
    // no separate memory hop; the relay is likewise not priced here.
    body->data = fl.have_newest ? fl.newest : sys_.memory().store(line);
    grant.body = body;
    grant.payload_bytes = size;
  }
  sys_.sim().send(ActorId::switch_dir(), fl.requestor, grant);

  e.busy = false;
  pump_deferred(line);
}

void Directory::pump_deferred(LineId line) {
  Entry& e = ent(line);
  while (!e.deferred.empty() && !e.busy) {
    Message m = e.deferred.front();
    e.deferred.pop_front();
    start_plain_txn(e, m);
  }
}

void Directory::fill_from_memory(LineId line, ActorId requestor,
                                 Permission want, bool critical, bool warmup) {
  Message rd;
  rd.kind = MsgKind::MemRead;
  rd.line = line;
  rd.want = want;
  rd.requestor = requestor;
  rd.critical = critical;
  rd.warmup = warmup;
  if (sys_.lines().is_lock_line(line)) {
    auto body = std::make_shared<MsgBody>();
    body->value = sys_.options().combined_data_opt ? 1 : 0;  // ship data?
    rd.body = body;
  }
  sys_.sim().send(ActorId::switch_dir(), ActorId::memory(), rd);
}

void Directory::stage_data_to(LineId line, ActorId dst) {
  Message rd;
  rd.kind = MsgKind::MemRead;
  rd.line = line;
  rd.want = Permission::I;  // data only, no permission change
  rd.requestor = dst;
  rd.critical = true;
  auto body = std::make_shared<MsgBody>();
  body->value = 1;
  rd.body = body;
  sys_.sim().send(ActorId::switch_dir(), ActorId::memory(), rd);
}

// ---------------- lock lines ----------------

void Directory::handle_acquire(const Message& msg) {
  Entry& e = ent(msg.line);
  const uint32_t req = msg.requestor.index;

  if (e.queue_holder) {
    // A listed sharer that is itself requesting has no copy left to
    // invalidate; release its ack obligation to the waiting writer so the
    // two requests cannot deadlock on each other.
    if (e.perm == Permission::S && e.sharers.erase(req) &&
        *e.queue_holder != req) {
      Message ack;
      ack.kind = MsgKind::InvAckToWriter;
      ack.line = msg.line;
      sys_.sim().send(ActorId::switch_dir(), ActorId::blade(*e.queue_holder),
                      ack);
    }
    // forward to the holder; the version counts forwarded-but-unreceived
    // requests for transfer validation
    e.dir_version++;
    Message fwd;
    fwd.kind = MsgKind::Acquire;
    fwd.line = msg.line;
    fwd.want = msg.want;
    fwd.requestor = msg.requestor;
    fwd.critical = msg.critical;
    fwd.warmup = msg.warmup;
    if (msg.want == Permission::M) sys_.note_writer_forwarded(msg.line, req);
    sys_.sim().send(ActorId::switch_dir(), ActorId::blade(*e.queue_holder),
                    fwd);
    return;
  }

  if (msg.want == Permission::S) {
    // Lock lines keep their queue-holder hint while the line stays M, so a
    // shared request here can only see an I or S line: fill from memory.
    if (e.perm == Permission::M)
      throw ProtocolError("M-permission lock line without a queue holder\n" +
                          dump());
    e.perm = Permission::S;
    e.sharers.insert(req);
    fill_from_memory(msg.line, msg.requestor, Permission::S, msg.critical,
                     msg.warmup);
    return;
  }

  // want == M
  sys_.note_writer_forwarded(msg.line, req);
  if (e.perm == Permission::I) {
    // unheld line: fill and appoint the writer queue holder
    e.perm = Permission::M;
    e.owner = req;
    e.sharers = {req};
    e.queue_holder = req;
    e.dir_version = 0;
    fill_from_memory(msg.line, msg.requestor, Permission::M, msg.critical,
                     msg.warmup);
    return;
  }
  if (e.perm == Permission::M)
    throw ProtocolError("M-permission lock line without a queue holder\n" +
                        dump());

  // writer against a shared line: the requestor becomes the queue holder and
  // every sharer is told to notify it on release
  e.queue_holder = req;
  e.dir_version = 0;
  uint32_t acks = 0;
  for (uint32_t b : e.sharers)
    if (b != req) acks++;
  Message enq;
  enq.kind = MsgKind::Enqueue;
  enq.line = msg.line;
  enq.requestor = msg.requestor;
  enq.critical = msg.critical;
  enq.warmup = msg.warmup;
  auto body = std::make_shared<MsgBody>();
  body->pending_acks = acks;
  // requestor already shares the line: its cached bytes are current
  body->value = e.sharers.count(req) ? 1 : 0;
  enq.body = body;
  sys_.sim().send(ActorId::switch_dir(), ActorId::blade(req), enq);
  for (uint32_t b : e.sharers) {
    if (b == req) continue;
    Message note;
    note.kind = MsgKind::WriterWaitNotify;
    note.line = msg.line;
    note.requestor = msg.requestor;  // the waiting writer
    note.critical = msg.critical;
    note.warmup = msg.warmup;
    sys_.sim().send(ActorId::switch_dir(), ActorId::blade(b), note);
  }
  if (sys_.options().combined_data_opt && !e.sharers.count(req))
    stage_data_to(msg.line, msg.requestor);
}

void Directory::handle_transfer_req(const Message& msg) {
  Entry& e = ent(msg.line);
  const uint32_t holder = msg.src.index;
  if (!e.queue_holder || *e.queue_holder != holder)
    throw ProtocolError("queue transfer from a non-holder blade b" +
                        std::to_string(holder) + "\n" + dump());

  if (msg.version != e.dir_version) {
    // a forwarded request is still in flight toward the holder
    Message deny;
    deny.kind = MsgKind::QTransferDeny;
    deny.line = msg.line;
    deny.critical = msg.critical;
    deny.warmup = msg.warmup;
    sys_.sim().send(ActorId::switch_dir(), msg.src, deny);
    return;
  }

  const MsgBody& b = msg.payload();
  const uint32_t size = sys_.lines().info(msg.line).size_bytes;
  const bool combined = sys_.options().combined_data_opt;
  const bool have_data = !b.data.empty() || size == 0;

  // write the dirty regions back whenever the line leaves M permission (or
  // the grant will not carry them)
  auto write_back = [&]() {
    if (size == 0) return;
    sys_.memory().store(msg.line) = b.data;
    Message wb;
    wb.kind = MsgKind::MemWrite;
    wb.line = msg.line;
    wb.payload_bytes = size;
    auto body = std::make_shared<MsgBody>();
    body->data = b.data;
    wb.body = body;
    wb.critical = false;
    sys_.sim().send(ActorId::switch_dir(), ActorId::memory(), wb);
  };

  auto grant_readers = [&](const std::vector<QueueEntry>& grants,
                           bool writer_behind, ActorId writer) {
    for (const auto& g : grants) {
      e.sharers.insert(g.blade.index);
      Message gr;
      gr.kind = MsgKind::GrantS;
      gr.line = msg.line;
      gr.critical = msg.critical;
      gr.warmup = msg.warmup;
      auto body = std::make_shared<MsgBody>();
      if (combined && have_data) {
        body->data = b.data;
        gr.payload_bytes = size;
      }
      body->has_writer = writer_behind;
      body->writer = writer;
      gr.body = body;
      sys_.sim().send(ActorId::switch_dir(), g.blade, gr);
    }
  };

  auto ack_old_holder = [&]() {
    Message ack;
    ack.kind = MsgKind::QTransferApprove;
    ack.line = msg.line;
    ack.critical = msg.critical;
    ack.warmup = msg.warmup;
    sys_.sim().send(ActorId::switch_dir(), msg.src, ack);
  };

  switch (b.dispo) {
    case Disposition::TransferToWriter: {
      ActorId next = b.grants.at(0).blade;
      e.perm = Permission::M;
      e.owner = next.index;
      e.sharers = {next.index};
      e.queue_holder = next.index;
      e.dir_version = 0;
      Message ap;
      ap.kind = MsgKind::QTransferApprove;
      ap.line = msg.line;
      ap.want = Permission::M;
      ap.critical = msg.critical;
      ap.warmup = msg.warmup;
      auto body = std::make_shared<MsgBody>();
      body->queue = b.queue;
      if (combined && have_data) {
        body->data = b.data;
        ap.payload_bytes = size;
      }
      ap.body = body;
      sys_.note_transfer_approved(msg.line);
      sys_.sim().send(ActorId::switch_dir(), next, ap);
      ack_old_holder();
      if (!combined) write_back();
      break;
    }
    case Disposition::GrantReadersThenTransfer: {
      ActorId next = b.writer;
      e.perm = Permission::S;
      e.owner.reset();
      e.sharers.clear();
      e.queue_holder = next.index;
      e.dir_version = 0;
      Message ap;
      ap.kind = MsgKind::QTransferApprove;
      ap.line = msg.line;
      ap.want = Permission::M;
      ap.critical = msg.critical;
      ap.warmup = msg.warmup;
      auto body = std::make_shared<MsgBody>();
      body->queue = b.queue;
      body->pending_acks = static_cast<uint32_t>(b.grants.size());
      if (combined && have_data) {
        body->data = b.data;
        ap.payload_bytes = size;
      }
      ap.body = body;
      sys_.note_transfer_approved(msg.line);
      sys_.sim().send(ActorId::switch_dir(), next, ap);
      grant_readers(b.grants, true, next);
      ack_old_holder();
      write_back();
      break;
    }
    case Disposition::GrantReadersThenDrop: {
      e.perm = Permission::S;
      e.owner.reset();
      e.sharers.clear();
      e.queue_holder.reset();
      e.dir_version = 0;
      grant_readers(b.grants, false, ActorId{});
      ack_old_holder();
      write_back();
      break;
    }
    case Disposition::Evict: {
      e.perm = Permission::I;
      e.owner.reset();
      e.sharers.clear();
      e.queue_holder.reset();
      e.dir_version = 0;
      ack_old_holder();
      write_back();
      break;
    }
  }
}

void Directory::handle_dir_update(const Message& msg) {
  Entry& e = ent(msg.line);
  e.perm = Permission::M;
  e.owner = msg.src.index;
  e.sharers = {msg.src.index};
  // queue holder is already the committing writer
}

void Directory::handle_release(const Message& msg) {
  Entry& e = ent(msg.line);
  e.sharers.erase(msg.src.index);
}

std::string Directory::dump() const {
  std::ostringstream os;
  os << "directory state:\n";
  for (const auto& [line, e] : entries_) {
    os << "  line " << line << ": perm=" << to_string(e.perm) << " sharers={";
    for (uint32_t b : e.sharers) os << "b" << b << ",";
    os << "}";
    if (e.owner) os << " owner=b" << *e.owner;
    if (e.queue_holder)
      os << " holder=b" << *e.queue_holder << " v=" << e.dir_version;
    if (e.busy) os << " busy(" << e.deferred.size() << " deferred)";
    os << "\n";
  }
  return os.str();
}

}  // namespace gcpsim
