#include "gcpsim/system.hpp"

#include <sstream>

namespace gcpsim {

System::System(Options opts) : opts_(opts) {
  if (opts_.blades == 0) throw ConfigError("blade count must be positive");
  sim_ = std::make_unique<Simulator>(opts_.sim);
  directory_ = std::make_unique<Directory>(*this);
  memory_ = std::make_unique<MemoryActor>(*this);
  sim_->add_actor(ActorId::switch_dir(), directory_.get());
  sim_->add_actor(ActorId::memory(), memory_.get());
  for (uint32_t i = 0; i < opts_.blades; ++i) {
    blades_.push_back(std::make_unique<Blade>(*this, i));
    sim_->add_actor(ActorId::blade(i), blades_.back().get());
  }
  sim_->set_watchdog_diagnostic([this] { return state_dump(); });
  if (opts_.check_invariants) {
    sim_->set_post_event_hook(
        [this](const Message& msg, ActorId) { note_line_event(msg.line); });
  }
}

System::~System() = default;

LineId System::add_plain_line(uint32_t size_bytes, LineClass cls) {
  return lines_.add_plain(size_bytes, cls);
}

LineId System::register_lock(std::vector<Region> regions) {
  return lines_.add_lock_line(std::move(regions));
}

void System::at(SimTime when, std::function<void()> fn) {
  sim_->call_at(when, std::move(fn));
}

SimTime System::run(std::optional<SimTime> until) { return sim_->run(until); }

void System::note_line_event(LineId line) {
  if (line == 0) return;
  check_invariants_for(line);
}

void System::observe_queue_len(uint64_t n) {
  if (n > max_queue_len_) max_queue_len_ = n;
  if (opts_.check_invariants && n > opts_.blades)
    throw ProtocolError("wait queue longer than the blade count");
}

void System::note_transfer_approved(LineId line) {
  transfers_in_flight_[line]++;
}

void System::note_transfer_received(LineId line) {
  auto it = transfers_in_flight_.find(line);
  if (it == transfers_in_flight_.end() || it->second == 0)
    throw ProtocolError("queue arrived without an approved transfer");
  it->second--;
}

void System::note_writer_forwarded(LineId line, uint32_t blade) {
  if (!opts_.check_invariants) return;
  writer_forward_order_[line].push_back(blade);
}

void System::note_writer_granted(LineId line, uint32_t blade) {
  if (!opts_.check_invariants) return;
  auto& granted = writer_grant_order_[line];
  granted.push_back(blade);
  const auto& fwd = writer_forward_order_[line];
  size_t i = granted.size() - 1;
  if (i >= fwd.size() || fwd[i] != blade)
    throw ProtocolError("writer granted out of directory forwarding order");
}

void System::check_forward_target(LineId line, uint32_t blade) const {
  if (!opts_.check_invariants) return;
  const auto& e = directory_->entry(line);
  if (!e.queue_holder || *e.queue_holder != blade)
    throw ProtocolError(
        "forwarded request delivered to a blade whose queue departed");
}

void System::check_invariants_for(LineId line) const {
  if (lines_.is_lock_line(line)) {
    // SWMR over critical sections + single materialized queue
    int writers = 0, readers = 0, queues = 0;
    for (const auto& b : blades_) {
      auto v = b->lock_view(line);
      if (v.writer_cs)
        writers++;
      else
        readers += v.active_cs;
      // a queue inside an unresolved transfer request is in limbo, not
      // materialized; a denial re-materializes it at the old holder
      if (v.has_queue && !v.transfer_pending) queues++;
      if (v.queue.size() > opts_.blades)
        throw ProtocolError("wait queue longer than the blade count");
    }
    if (writers > 1)
      throw ProtocolError("two writer critical sections on line " +
                          std::to_string(line));
    if (writers == 1 && readers > 0)
      throw ProtocolError("writer and reader critical sections overlap on "
                          "line " +
                          std::to_string(line));
    auto itf = transfers_in_flight_.find(line);
    int flying = itf == transfers_in_flight_.end() ? 0 : itf->second;
    if (queues + flying > 1)
      throw ProtocolError("more than one wait queue materialized for line " +
                          std::to_string(line));
    return;
  }
  // plain lines: SWMR on permissions
  int m = 0, s = 0;
  for (const auto& b : blades_) {
    Permission p = b->perm(line);
    if (p == Permission::M) m++;
    if (p == Permission::S) s++;
  }
  if (m > 1 || (m == 1 && s > 0))
    throw ProtocolError("SWMR violated on line " + std::to_string(line));
}

void System::final_audit() const {
  for (const auto& [line, info] : lines_.all()) {
    if (info.lock_line) {
      for (const auto& b : blades_) {
        auto v = b->lock_view(line);
        if (v.active_cs != 0)
          throw ProtocolError("critical section still active at quiescence");
      }
      continue;
    }
    if (!directory_->has_entry(line)) continue;
    const auto& e = directory_->entry(line);
    std::set<uint32_t> holders;
    for (const auto& b : blades_)
      if (b->perm(line) != Permission::I) holders.insert(b->index());
    if (holders != e.sharers)
      throw ProtocolError("directory sharer list disagrees with blade state "
                          "for line " +
                          std::to_string(line));
  }
}

std::string System::state_dump() const {
  std::ostringstream os;
  os << directory_->dump();
  for (const auto& b : blades_) os << b->dump();
  return os.str();
}

}  // namespace gcpsim
