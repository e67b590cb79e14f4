#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>

#include "gcpsim/sim.hpp"
#include "gcpsim/types.hpp"

namespace gcpsim {

class System;

// Switch-resident cache directory. Plain lines follow blocking MSI: one
// invalidation transaction in flight per line, later requests deferred in
// arrival order. Lock lines route through the queue-holder machinery instead
// and are never blocked here.
class Directory : public Actor {
 public:
  explicit Directory(System& sys) : sys_(sys) {}

  void on_message(const Message& msg) override;

  struct Entry {
    Permission perm{Permission::I};
    std::set<uint32_t> sharers;           // blade indices, ordered
    std::optional<uint32_t> owner;
    // plain-line transaction in flight
    bool busy{false};
    std::deque<Message> deferred;
    // lock-line extensions
    std::optional<uint32_t> queue_holder;
    uint64_t dir_version{0};
  };

  const Entry& entry(LineId line) const;
  bool has_entry(LineId line) const { return entries_.count(line) != 0; }
  std::string dump() const;

 private:
  struct InFlight {
    ActorId requestor;
    Permission want{Permission::S};
    bool critical{true};
    bool warmup{false};
    uint32_t acks_left{0};
    bool demote{false};        // M->S (old owner keeps an S copy)
    bool requestor_has_data{false};
    Bytes newest;              // dirty bytes carried by an InvAck
    bool have_newest{false};
  };

  Entry& ent(LineId line) { return entries_[line]; }

  void handle_fetch(const Message& msg);
  void handle_inv_ack(const Message& msg);
  void start_plain_txn(Entry& e, const Message& msg);
  void finish_plain_txn(LineId line, Entry& e);
  void pump_deferred(LineId line);

  void handle_acquire(const Message& msg);
  void handle_transfer_req(const Message& msg);
  void handle_dir_update(const Message& msg);
  void handle_release(const Message& msg);
  void fill_from_memory(LineId line, ActorId requestor, Permission want,
                        bool critical, bool warmup);
  void stage_data_to(LineId line, ActorId dst);

  System& sys_;
  std::map<LineId, Entry> entries_;
  std::map<LineId, InFlight> inflight_;
};

}  // namespace gcpsim
