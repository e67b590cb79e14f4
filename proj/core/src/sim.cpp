#include "gcpsim/sim.hpp"

#include <cmath>

namespace gcpsim {

const char* to_string(MsgKind k) {
  switch (k) {
    case MsgKind::FetchReq: return "FetchReq";
    case MsgKind::Invalidate: return "Invalidate";
    case MsgKind::InvAck: return "InvAck";
    case MsgKind::DataReply: return "DataReply";
    case MsgKind::MemRead: return "MemRead";
    case MsgKind::MemData: return "MemData";
    case MsgKind::MemWrite: return "MemWrite";
    case MsgKind::Acquire: return "Acquire";
    case MsgKind::Release: return "Release";
    case MsgKind::Enqueue: return "Enqueue";
    case MsgKind::GrantS: return "GrantS";
    case MsgKind::GrantM: return "GrantM";
    case MsgKind::WriterWaitNotify: return "WriterWaitNotify";
    case MsgKind::InvAckToWriter: return "InvAckToWriter";
    case MsgKind::QTransferReq: return "QTransferReq";
    case MsgKind::QTransferApprove: return "QTransferApprove";
    case MsgKind::QTransferDeny: return "QTransferDeny";
    case MsgKind::DirUpdate: return "DirUpdate";
    case MsgKind::LockReq: return "LockReq";
    case MsgKind::LockGrant: return "LockGrant";
    case MsgKind::LockRelease: return "LockRelease";
  }
  return "?";
}

JsonlTraceSink::JsonlTraceSink(const std::string& path) : path_(path) {
  f_ = std::fopen(path.c_str(), "w");
  if (!f_) throw ConfigError("cannot open trace file: " + path);
}

JsonlTraceSink::~JsonlTraceSink() {
  if (f_) std::fclose(f_);
}

void JsonlTraceSink::append(const TraceRecord& rec) {
  int n = std::fprintf(
      f_, "{\"t\":%llu,\"seq\":%llu,\"src\":\"%s\",\"dst\":\"%s\",\"kind\":\"%s\",\"line\":%llu}\n",
      static_cast<unsigned long long>(rec.t),
      static_cast<unsigned long long>(rec.seq), to_string(rec.src).c_str(),
      to_string(rec.dst).c_str(), to_string(rec.kind),
      static_cast<unsigned long long>(rec.line));
  if (n < 0) throw std::runtime_error("trace sink write failure: " + path_);
}

Simulator::Simulator(SimOptions opts)
    : opts_(opts), jitter_rng_(opts.seed ^ 0x9e3779b97f4a7c15ull) {
  if (opts_.profile.one_way_latency_ns == 0)
    throw ConfigError("NetworkProfile.one_way_latency_ns must be positive");
  if (!(opts_.profile.bandwidth_gbps > 0.0))
    throw ConfigError("NetworkProfile.bandwidth_gbps must be positive");
}

void Simulator::add_actor(ActorId id, Actor* actor) {
  actors_[id.packed()] = actor;
}

uint64_t Simulator::wire_delay(uint32_t payload_bytes) const {
  const double bits = 8.0 * (payload_bytes + opts_.header_bytes);
  const double tx = std::ceil(bits / opts_.profile.bandwidth_gbps);  // ns
  return opts_.profile.one_way_latency_ns + static_cast<uint64_t>(tx);
}

uint64_t Simulator::proc_delay(ActorId dst) const {
  switch (dst.role) {
    case ActorId::Role::Blade: return opts_.profile.blade_proc_ns;
    case ActorId::Role::Switch: return opts_.profile.switch_proc_ns;
    case ActorId::Role::Memory: return opts_.profile.memory_proc_ns;
  }
  return 0;
}

void Simulator::send(ActorId src, ActorId dst, Message msg) {
  if (src == dst) throw ProtocolError("send: src == dst (" + to_string(src) + ")");
  if (!actors_.count(dst.packed()))
    throw ConfigError("send: unknown destination actor " + to_string(dst));
  msg.src = src;

  uint64_t delay = wire_delay(msg.payload_bytes) + proc_delay(dst);
  if (opts_.reorder_stress && opts_.reorder_max_extra_ns > 0)
    delay += jitter_rng_() % opts_.reorder_max_extra_ns;

  SimTime at = now_ + delay;
  // The bandwidth term can make a small message overtake a large one sent
  // earlier on the same channel; clamp so per-channel order equals send order.
  const uint64_t chan = (src.packed() << 20) ^ dst.packed();
  auto it = channel_last_.find(chan);
  if (it != channel_last_.end() && at < it->second) at = it->second;
  channel_last_[chan] = at;

  messages_total_++;
  bytes_total_ += msg.payload_bytes + opts_.header_bytes;
  queue_.push(Event{at, next_seq_++, false, dst, std::move(msg), {}});
}

void Simulator::call_at(SimTime when, std::function<void()> fn) {
  if (when < now_) when = now_;
  queue_.push(Event{when, next_seq_++, true, ActorId{}, Message{}, std::move(fn)});
}

void Simulator::call_in(SimTime delay, std::function<void()> fn) {
  call_at(now_ + delay, std::move(fn));
}

void Simulator::deliver(const Event& ev) {
  const Message& m = ev.msg;
  trace_records_++;
  // hash over (time, seq, kind)
  auto fold = [this](uint64_t v) {
    trace_hash_ ^= v;
    trace_hash_ *= 1099511628211ull;
  };
  fold(ev.at);
  fold(ev.seq);
  fold(static_cast<uint64_t>(m.kind));
  if (sink_) {
    sink_->append(TraceRecord{ev.at, ev.seq, m.src, ev.dst, m.kind, m.line,
                              m.payload_bytes});
  }
  actors_.at(ev.dst.packed())->on_message(m);
  if (post_event_) post_event_(m, ev.dst);
}

SimTime Simulator::run(std::optional<SimTime> until) {
  SimTime last = now_;
  while (!queue_.empty()) {
    const Event& top = queue_.top();
    if (until && top.at > *until) break;
    Event ev = top;
    queue_.pop();
    now_ = ev.at;
    if (++events_processed_ > opts_.watchdog_events) {
      std::string diag = "event watchdog exceeded (" +
                         std::to_string(opts_.watchdog_events) + " events)";
      if (watchdog_diag_) diag += "\n" + watchdog_diag_();
      throw WatchdogError(diag);
    }
    if (ev.internal) {
      ev.fn();
    } else {
      deliver(ev);
    }
    last = ev.at;
  }
  if (until && *until > last) now_ = *until;
  return last;
}

}  // namespace gcpsim
