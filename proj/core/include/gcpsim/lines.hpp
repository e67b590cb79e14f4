#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

#include "gcpsim/types.hpp"

namespace gcpsim {

// What a line holds, for per-class transaction accounting.
enum class LineClass : uint8_t { LockMeta = 0, AppData = 1, LockLine = 2 };
inline constexpr int kLineClassCount = 3;

struct Region {
  uint64_t base{0};
  uint64_t size{0};
  uint64_t end() const { return base + size; }
};

struct LineInfo {
  LineId id{0};
  LineClass cls{LineClass::AppData};
  uint32_t size_bytes{0};          // total bytes moved with a data grant
  std::vector<Region> regions;     // lock lines only; may be empty
  bool lock_line{false};
};

// Allocates line ids and enforces the lock-line region rules: regions within
// one line are pairwise disjoint and never overlap another lock line's.
class LineRegistry {
 public:
  LineId add_plain(uint32_t size_bytes, LineClass cls) {
    uint64_t addr = next_addr_;
    next_addr_ += ((size_bytes + 63) / 64) * 64;
    if (size_bytes == 0) next_addr_ += 64;
    LineInfo info;
    info.id = addr;
    info.cls = cls;
    info.size_bytes = size_bytes;
    lines_.emplace(addr, std::move(info));
    return addr;
  }

  LineId add_lock_line(std::vector<Region> regions) {
    for (size_t i = 0; i < regions.size(); ++i) {
      if (regions[i].size == 0)
        throw ConfigError("lock line region with zero size");
      for (size_t j = i + 1; j < regions.size(); ++j) {
        if (overlaps(regions[i], regions[j]))
          throw ConfigError("lock line regions overlap each other");
      }
    }
    for (const auto& r : regions) {
      for (const auto& other : lock_regions_) {
        if (overlaps(r, other))
          throw ConfigError(
              "lock line region overlaps a region of another lock line");
      }
    }
    LineId id = kLockLineTag | next_lock_index_++;
    LineInfo info;
    info.id = id;
    info.cls = LineClass::LockLine;
    info.lock_line = true;
    info.size_bytes = static_cast<uint32_t>(std::accumulate(
        regions.begin(), regions.end(), uint64_t{0},
        [](uint64_t acc, const Region& r) { return acc + r.size; }));
    info.regions = regions;
    lines_.emplace(id, std::move(info));
    lock_regions_.insert(lock_regions_.end(), regions.begin(), regions.end());
    return id;
  }

  // Reserves address space so explicit region bases in tests cannot collide
  // with allocator-assigned plain lines.
  uint64_t alloc_addr(uint64_t size) {
    uint64_t addr = next_addr_;
    next_addr_ += ((size + 63) / 64) * 64;
    return addr;
  }

  const LineInfo& info(LineId id) const {
    auto it = lines_.find(id);
    if (it == lines_.end())
      throw ProtocolError("unknown line " + std::to_string(id));
    return it->second;
  }
  bool is_lock_line(LineId id) const { return (id & kLockLineTag) != 0; }
  const std::map<LineId, LineInfo>& all() const { return lines_; }

 private:
  static bool overlaps(const Region& a, const Region& b) {
    return a.base < b.end() && b.base < a.end();
  }

  std::map<LineId, LineInfo> lines_;
  std::vector<Region> lock_regions_;
  uint64_t next_addr_{0x10000};
  uint64_t next_lock_index_{0};
};

}  // namespace gcpsim
