#pragma once

#include <cstdint>
#include <compare>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcpsim {

// Simulated time in nanoseconds since run start.
using SimTime = uint64_t;

// 64-bit line identifier. Plain coherence lines use their (aligned) base
// address; protocol lock lines use ids with the top bit set.
using LineId = uint64_t;

inline constexpr uint64_t kLockLineTag = 1ull << 63;

enum class Permission : uint8_t { I = 0, S = 1, M = 2 };

inline bool operator<(Permission a, Permission b) {
  return static_cast<uint8_t>(a) < static_cast<uint8_t>(b);
}
inline bool operator>=(Permission a, Permission b) { return !(a < b); }

inline const char* to_string(Permission p) {
  switch (p) {
    case Permission::I: return "I";
    case Permission::S: return "S";
    case Permission::M: return "M";
  }
  return "?";
}

struct ActorId {
  enum class Role : uint8_t { Blade = 0, Switch = 1, Memory = 2 };
  Role role{Role::Blade};
  uint32_t index{0};  // blade index; 0 for switch/memory

  static ActorId blade(uint32_t i) { return {Role::Blade, i}; }
  static ActorId switch_dir() { return {Role::Switch, 0}; }
  static ActorId memory() { return {Role::Memory, 0}; }

  bool is_blade() const { return role == Role::Blade; }
  auto operator<=>(const ActorId&) const = default;

  // Dense encoding used for channel keys and array lookups.
  uint64_t packed() const {
    return (static_cast<uint64_t>(role) << 32) | index;
  }
};

inline std::string to_string(const ActorId& a) {
  switch (a.role) {
    case ActorId::Role::Blade: return "b" + std::to_string(a.index);
    case ActorId::Role::Switch: return "sw";
    case ActorId::Role::Memory: return "mem";
  }
  return "?";
}

// Link latency/bandwidth model. Processing costs are charged at the
// receiver by role. Values are calibration knobs, not measured constants.
struct NetworkProfile {
  uint64_t one_way_latency_ns{5000};
  double bandwidth_gbps{100.0};
  uint64_t switch_proc_ns{500};
  uint64_t blade_proc_ns{2000};
  uint64_t memory_proc_ns{1000};
};

enum class MsgKind : uint8_t {
  // plain directory-based MSI
  FetchReq,
  Invalidate,
  InvAck,
  DataReply,
  MemRead,
  MemData,
  MemWrite,
  // generalized protocol (lock lines)
  Acquire,
  Release,
  Enqueue,
  GrantS,
  GrantM,
  WriterWaitNotify,
  InvAckToWriter,
  QTransferReq,
  QTransferApprove,
  QTransferDeny,
  DirUpdate,
  // standalone lock service
  LockReq,
  LockGrant,
  LockRelease,
};

const char* to_string(MsgKind k);

using Bytes = std::vector<uint8_t>;

struct QueueEntry {
  ActorId blade;
  Permission want{Permission::S};
};

// Queue-transfer dispositions a holder can request from the switch.
enum class Disposition : uint8_t {
  TransferToWriter,        // hand line+data+queue to the next writer
  GrantReadersThenTransfer,// grant a reader batch, queue to next writer
  GrantReadersThenDrop,    // grant a reader batch, no writer remains
  Evict,                   // write back and drop (locality opt disabled)
};

// Rarely-populated message payload, shared to keep Message cheap to copy.
struct MsgBody {
  std::vector<QueueEntry> queue;      // transferred wait queue
  std::vector<QueueEntry> grants;     // reader batch being granted
  Bytes data;                         // shipped bytes (line or regions)
  uint32_t pending_acks{0};           // reader acks the writer must collect
  ActorId writer{};                   // waiting writer readers must notify
  bool has_writer{false};
  Disposition dispo{Disposition::TransferToWriter};
  bool designate_holder{false};       // forwarded request also appoints holder
  uint64_t value{0};                  // small scalar (lock-service thread id)
};

struct Message {
  MsgKind kind{MsgKind::FetchReq};
  ActorId src{};
  LineId line{0};
  uint32_t payload_bytes{0};
  ActorId requestor{};
  Permission want{Permission::S};
  uint64_t version{0};
  bool critical{true};   // counts toward handover latency when it becomes a transaction
  bool warmup{false};    // issued by a warm-up operation
  std::shared_ptr<const MsgBody> body;

  const MsgBody& payload() const {
    static const MsgBody empty;
    return body ? *body : empty;
  }
};

struct TraceRecord {
  SimTime t{0};
  uint64_t seq{0};
  ActorId src{};
  ActorId dst{};
  MsgKind kind{MsgKind::FetchReq};
  LineId line{0};
  uint32_t payload_bytes{0};
};

// Configuration mistakes: bad profiles, malformed specs, unknown actors.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Violated protocol contracts. Carries a state dump for diagnosis.
class ProtocolError : public std::runtime_error {
 public:
  explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

// Event-count watchdog tripped; the run is presumed livelocked.
class WatchdogError : public std::runtime_error {
 public:
  explicit WatchdogError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gcpsim
