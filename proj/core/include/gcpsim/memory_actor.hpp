#pragma once

#include <map>

#include "gcpsim/sim.hpp"
#include "gcpsim/types.hpp"

namespace gcpsim {

class System;

// Memory blade: authoritative byte store when no blade holds M. Serves
// MemRead with a fill (MemData for plain lines, GrantS/GrantM/MemData for
// lock lines) and applies MemWrite write-backs.
class MemoryActor : public Actor {
 public:
  explicit MemoryActor(System& sys) : sys_(sys) {}

  void on_message(const Message& msg) override;

  // Model state, read by the directory when it relays a grant whose source
  // is memory (the switch relays without a priced memory hop, matching the
  // protocol's four-hop invalidation transactions).
  Bytes& store(LineId line);
  const Bytes& peek(LineId line) const;

 private:
  System& sys_;
  std::map<LineId, Bytes> data_;
};

}  // namespace gcpsim
