#pragma once

#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <unordered_map>

#include "gcpsim/types.hpp"

namespace gcpsim {

class Actor {
 public:
  virtual ~Actor() = default;
  virtual void on_message(const Message& msg) = 0;
};

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void append(const TraceRecord& rec) = 0;
};

class MemoryTraceSink : public TraceSink {
 public:
  void append(const TraceRecord& rec) override { records_.push_back(rec); }
  const std::vector<TraceRecord>& records() const { return records_; }

 private:
  std::vector<TraceRecord> records_;
};

// Writes one JSON object per processed event. Aborts the run on I/O failure.
class JsonlTraceSink : public TraceSink {
 public:
  explicit JsonlTraceSink(const std::string& path);
  ~JsonlTraceSink() override;
  void append(const TraceRecord& rec) override;

 private:
  std::FILE* f_{nullptr};
  std::string path_;
};

struct SimOptions {
  NetworkProfile profile{};
  uint32_t header_bytes{64};
  uint64_t watchdog_events{1'000'000'000};
  // Seeded extra delay per message, clamped so each (src,dst) channel stays
  // FIFO. Exists to exercise the transfer version-check denial path.
  bool reorder_stress{false};
  uint64_t reorder_max_extra_ns{20'000};
  uint64_t seed{1};
};

// Deterministic single-instance discrete-event engine. Events are processed
// in (deliver_at, seq) order; seq is a global counter so ties are stable.
class Simulator {
 public:
  explicit Simulator(SimOptions opts);

  SimTime now() const { return now_; }

  void add_actor(ActorId id, Actor* actor);

  // Prices and schedules a message. Receiver processing cost is charged by
  // destination role; per-channel delivery order is FIFO.
  void send(ActorId src, ActorId dst, Message msg);

  // Internal bookkeeping event: not a message, not traced, not counted.
  void call_at(SimTime when, std::function<void()> fn);
  void call_in(SimTime delay, std::function<void()> fn);

  // Transfer delay for a payload under the current profile, excluding the
  // receiver processing term (used by the directory to predict fill delivery).
  uint64_t wire_delay(uint32_t payload_bytes) const;
  uint64_t proc_delay(ActorId dst) const;

  // Runs until the queue empties, or through `until` when given.
  SimTime run(std::optional<SimTime> until = std::nullopt);

  void set_trace_sink(TraceSink* sink) { sink_ = sink; }
  void set_watchdog_diagnostic(std::function<std::string()> fn) {
    watchdog_diag_ = std::move(fn);
  }
  // Invoked after every delivered message (invariant monitors).
  void set_post_event_hook(std::function<void(const Message&, ActorId)> fn) {
    post_event_ = std::move(fn);
  }

  uint64_t messages_total() const { return messages_total_; }
  uint64_t bytes_total() const { return bytes_total_; }
  uint64_t events_processed() const { return events_processed_; }
  uint64_t trace_records() const { return trace_records_; }
  // FNV-1a over (time, seq, kind) of every delivered message.
  uint64_t trace_hash() const { return trace_hash_; }

  const SimOptions& options() const { return opts_; }

 private:
  struct Event {
    SimTime at;
    uint64_t seq;
    bool internal;
    ActorId dst;
    Message msg;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  void deliver(const Event& ev);

  SimOptions opts_;
  SimTime now_{0};
  uint64_t next_seq_{0};
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::unordered_map<uint64_t, Actor*> actors_;
  std::unordered_map<uint64_t, SimTime> channel_last_;  // FIFO clamp per (src,dst)
  std::mt19937_64 jitter_rng_;
  TraceSink* sink_{nullptr};
  std::function<std::string()> watchdog_diag_;
  std::function<void(const Message&, ActorId)> post_event_;

  uint64_t messages_total_{0};
  uint64_t bytes_total_{0};
  uint64_t events_processed_{0};
  uint64_t trace_records_{0};
  uint64_t trace_hash_{14695981039346656037ull};
};

}  // namespace gcpsim
