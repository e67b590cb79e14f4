#include "gcpsim/memory_actor.hpp"

#include "gcpsim/system.hpp"

namespace gcpsim {

Bytes& MemoryActor::store(LineId line) {
  auto it = data_.find(line);
  if (it == data_.end()) {
    Bytes zeros(sys_.lines().info(line).size_bytes, 0);
    it = data_.emplace(line, std::move(zeros)).first;
  }
  return it->second;
}

const Bytes& MemoryActor::peek(LineId line) const {
  static const Bytes empty;
  auto it = data_.find(line);
  return it == data_.end() ? empty : it->second;
}

void MemoryActor::on_message(const Message& msg) {
  switch (msg.kind) {
    case MsgKind::MemRead: {
      const bool lock_line = sys_.lines().is_lock_line(msg.line);
      const uint32_t size = sys_.lines().info(msg.line).size_bytes;
      Message reply;
      reply.line = msg.line;
      reply.critical = msg.critical;
      reply.warmup = msg.warmup;
      reply.want = msg.want;
      bool ship = true;
      if (lock_line) {
        reply.kind = msg.want == Permission::M   ? MsgKind::GrantM
                     : msg.want == Permission::S ? MsgKind::GrantS
                                                 : MsgKind::MemData;
        ship = msg.payload().value == 1;
      } else {
        reply.kind = MsgKind::MemData;
      }
      if (ship && size > 0) {
        auto body = std::make_shared<MsgBody>();
        body->data = store(msg.line);
        reply.body = body;
        reply.payload_bytes = size;
      }
      sys_.sim().send(ActorId::memory(), msg.requestor, reply);
      return;
    }
    case MsgKind::MemWrite:
      store(msg.line) = msg.payload().data;
      return;
    default:
      throw ProtocolError(std::string("memory blade: unexpected message ") +
                          to_string(msg.kind));
  }
}

}  // namespace gcpsim
