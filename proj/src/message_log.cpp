#include "memesim/message_log.hpp"

#include <array>
#include <cstring>
#include <filesystem>
#include <stdexcept>

namespace memesim {

namespace {

constexpr std::array<char, 8> kMagic{'M', 'E', 'M', 'L', 'O', 'G', '0', '1'};
constexpr std::size_t kHeaderBytes = 8 + 4 * 4;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return static_cast<std::size_t>(in.gcount()) == sizeof(T);
}

MessageLogHeader read_header(std::istream& in, const std::string& path) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != static_cast<std::streamsize>(magic.size()) || magic != kMagic) {
    throw std::runtime_error(path + ": not a message log");
  }
  std::uint32_t r = 0, c = 0, l = 0, ch = 0;
  if (!get(in, r) || !get(in, c) || !get(in, l) || !get(in, ch)) {
    throw std::runtime_error(path + ": truncated message log header");
  }
  MessageLogHeader h;
  h.dims = {static_cast<int>(r), static_cast<int>(c)};
  h.shape = {static_cast<int>(l), static_cast<int>(ch)};
  if (h.dims.size() <= 0 || h.shape.size() <= 0 || h.shape.size() > 30) {
    throw std::runtime_error(path + ": implausible message log header");
  }
  return h;
}

std::size_t record_bytes(const MessageLogHeader& h) {
  return sizeof(std::int64_t) + sizeof(std::uint32_t) * static_cast<std::size_t>(h.dims.size());
}

}  // namespace

MessageLogWriter::MessageLogWriter(const std::string& path, const MessageLogHeader& header, bool append)
    : header_(header), path_(path) {
  if (append && std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    const MessageLogHeader existing = read_header(in, path);
    if (existing.dims.rows != header.dims.rows || existing.dims.cols != header.dims.cols ||
        existing.shape.length != header.shape.length || existing.shape.channels != header.shape.channels) {
      throw std::runtime_error(path + ": message log header does not match the run");
    }
    out_.open(path, std::ios::binary | std::ios::app);
  } else {
    out_.open(path, std::ios::binary | std::ios::trunc);
    out_.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out_, static_cast<std::uint32_t>(header.dims.rows));
    put<std::uint32_t>(out_, static_cast<std::uint32_t>(header.dims.cols));
    put<std::uint32_t>(out_, static_cast<std::uint32_t>(header.shape.length));
    put<std::uint32_t>(out_, static_cast<std::uint32_t>(header.shape.channels));
  }
  if (!out_) throw std::runtime_error("cannot open message log " + path);
}

void MessageLogWriter::write(std::int64_t step, const std::vector<MemeKey>& keys) {
  if (keys.size() != static_cast<std::size_t>(header_.dims.size())) {
    throw std::invalid_argument("message log record has the wrong number of sites");
  }
  put<std::int64_t>(out_, step);
  out_.write(reinterpret_cast<const char*>(keys.data()),
             static_cast<std::streamsize>(keys.size() * sizeof(MemeKey)));
  if (!out_) throw std::runtime_error("write failed on message log " + path_);
}

MessageLogReader::MessageLogReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw std::runtime_error("cannot open message log " + path);
  header_ = read_header(in_, path);
}

bool MessageLogReader::next(std::int64_t& step, std::vector<MemeKey>& keys) {
  in_.read(reinterpret_cast<char*>(&step), sizeof(step));
  if (in_.gcount() == 0) return false;
  if (in_.gcount() != sizeof(step)) throw std::runtime_error(path_ + ": truncated record");
  keys.resize(static_cast<std::size_t>(header_.dims.size()));
  const auto bytes = static_cast<std::streamsize>(keys.size() * sizeof(MemeKey));
  in_.read(reinterpret_cast<char*>(keys.data()), bytes);
  if (in_.gcount() != bytes) throw std::runtime_error(path_ + ": truncated record");
  return true;
}

MemeRegistry replay_message_log(const std::string& path, MessageLogHeader* header) {
  MessageLogReader reader(path);
  if (header) *header = reader.header();
  MemeRegistry registry;
  std::int64_t step = 0;
  std::vector<MemeKey> keys;
  while (reader.next(step, keys)) registry.update(take_census(keys), step);
  return registry;
}

void truncate_message_log(const std::string& path, std::int64_t step) {
  std::uintmax_t keep = kHeaderBytes;
  {
    MessageLogReader reader(path);
    const std::size_t rec = record_bytes(reader.header());
    std::int64_t s = 0;
    std::vector<MemeKey> keys;
    try {
      while (reader.next(s, keys) && s < step) keep += rec;
    } catch (const std::runtime_error&) {
      // a torn final record is dropped along with everything after `step`
    }
  }
  std::filesystem::resize_file(path, keep);
}

}  // namespace memesim
