#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "memesim/census.hpp"
#include "memesim/types.hpp"

namespace memesim {

/// Binary per-step broadcast log, little-endian.
///
///   header: "MEMLOG01" rows:u32 cols:u32 length:u32 channels:u32
///   record: step:i64 keys:u32[rows*cols]   (row-major sites)
struct MessageLogHeader {
  GridDims dims{};
  MessageShape shape{};
};

class MessageLogWriter {
 public:
  /// Truncates `path`, or appends after validating its header when `append` is set.
  MessageLogWriter(const std::string& path, const MessageLogHeader& header, bool append = false);

  void write(std::int64_t step, const std::vector<MemeKey>& keys);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  MessageLogHeader header_;
  std::string path_;
};

class MessageLogReader {
 public:
  explicit MessageLogReader(const std::string& path);

  const MessageLogHeader& header() const { return header_; }

  /// Reads the next record; false at a clean end of file. A partial trailing record throws.
  bool next(std::int64_t& step, std::vector<MemeKey>& keys);

 private:
  std::ifstream in_;
  MessageLogHeader header_;
  std::string path_;
};

/// Rebuilds the registry from a log, recomputing every census from raw keys.
MemeRegistry replay_message_log(const std::string& path, MessageLogHeader* header = nullptr);

/// Drops records with step >= `step` (used when resuming from an earlier checkpoint).
void truncate_message_log(const std::string& path, std::int64_t step);

}  // namespace memesim
