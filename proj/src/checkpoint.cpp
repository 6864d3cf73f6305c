#include "memesim/checkpoint.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <type_traits>

namespace memesim {

namespace {

constexpr std::array<char, 8> kMagic{'M', 'E', 'M', 'E', 'S', 'I', 'M', 'C'};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.append(p, sizeof(T));
  }
  void bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  void str(const std::string& s) {
    put<std::uint64_t>(s.size());
    buf_.append(s);
  }
  std::string& buffer() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(const char* data, std::size_t size) : p_(data), end_(data + size) {}

  template <typename T>
  T get() {
    T v;
    bytes(&v, sizeof(T));
    return v;
  }
  void bytes(void* out, std::size_t n) {
    if (static_cast<std::size_t>(end_ - p_) < n) throw CheckpointError("checkpoint truncated");
    std::memcpy(out, p_, n);
    p_ += n;
  }
  std::string str() {
    const auto n = get<std::uint64_t>();
    if (static_cast<std::size_t>(end_ - p_) < n) throw CheckpointError("checkpoint truncated");
    std::string s(p_, n);
    p_ += n;
    return s;
  }
  std::uint64_t count(std::uint64_t limit, const char* what) {
    const auto n = get<std::uint64_t>();
    if (n > limit) throw CheckpointError(std::string("checkpoint has implausible ") + what + " count");
    return n;
  }
  bool done() const { return p_ == end_; }

 private:
  const char* p_;
  const char* end_;
};

void put_site(Writer& w, Site s) {
  w.put<std::int32_t>(s.row);
  w.put<std::int32_t>(s.col);
}

Site get_site(Reader& r) {
  Site s;
  s.row = r.get<std::int32_t>();
  s.col = r.get<std::int32_t>();
  return s;
}

}  // namespace

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string encode_checkpoint(const World& world, const MemeRegistry& registry) {
  Writer w;
  w.bytes(kMagic.data(), kMagic.size());
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint64_t>(world.config.dynamics_hash());
  w.str(world.config.to_text());
  w.put<std::int64_t>(world.step);

  w.put<std::uint64_t>(world.agents.size());
  for (const AgentRuntime& a : world.agents) {
    w.put<std::uint64_t>(a.genome.parameter_count());
    a.genome.for_each_tensor([&](const double* p, std::size_t n) { w.bytes(p, n * sizeof(double)); });
    w.bytes(a.global.data(), sizeof(double) * kGlobalHidden);
    w.bytes(a.task.data(), sizeof(double) * kTaskHidden);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(a.buffer.size()));
    for (int i = 0; i < a.buffer.size(); ++i) {
      const auto& e = a.buffer[i];
      w.bytes(e.message.values.data(), sizeof(double) * e.message.values.size());
      put_site(w, e.message.source);
      w.put<std::int32_t>(e.slot);
    }
    w.put<std::uint64_t>(static_cast<std::uint64_t>(a.counts.slots()));
    w.bytes(a.counts.weights().data(), sizeof(double) * a.counts.weights().size());
    w.put<double>(a.fitness.mean);
    w.put<std::int64_t>(a.fitness.count);
  }

  w.put<std::uint8_t>(world.has_broadcasts ? 1 : 0);
  w.put<std::uint64_t>(world.broadcasts.size());
  for (const Message& m : world.broadcasts) {
    for (int k = 0; k < kMessageSymbols; ++k) w.put<std::int8_t>(k < m.shape().size() ? m[k] : -1);
  }

  w.put<std::uint64_t>(registry.meme_count());
  for (const MemeInfo& m : registry.memes()) {
    w.put<std::uint32_t>(m.key);
    w.put<std::uint32_t>(m.index);
    w.put<std::int64_t>(m.first_seen);
    w.put<std::uint32_t>(m.peak);
  }
  w.put<std::uint64_t>(registry.step_count());
  w.bytes(registry.steps().data(), sizeof(std::int64_t) * registry.steps().size());
  w.bytes(registry.offsets().data(), sizeof(std::uint64_t) * registry.offsets().size());
  w.put<std::uint64_t>(registry.presence().size());
  for (const auto& p : registry.presence()) {
    w.put<std::uint32_t>(p.meme);
    w.put<std::uint32_t>(p.population);
  }

  const std::uint64_t checksum = fnv1a64(w.buffer());
  w.put<std::uint64_t>(checksum);
  return std::move(w.buffer());
}

CheckpointData decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < kMagic.size() + sizeof(std::uint32_t) + sizeof(std::uint64_t)) {
    throw CheckpointError("checkpoint truncated (" + std::to_string(bytes.size()) + " bytes)");
  }
  if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw CheckpointError("not a memesim checkpoint (bad magic)");
  }
  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + kMagic.size(), sizeof(version));
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const std::size_t body = bytes.size() - sizeof(std::uint64_t);
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + body, sizeof(stored));
  const std::uint64_t actual = fnv1a64(std::string_view(bytes.data(), body));
  if (stored != actual) {
    throw CheckpointError("checkpoint checksum mismatch (stored " + hex64(stored) + ", computed " + hex64(actual) +
                          "); the file is truncated or corrupt");
  }

  Reader r(bytes.data() + kMagic.size() + sizeof(std::uint32_t), body - kMagic.size() - sizeof(std::uint32_t));
  const auto hash = r.get<std::uint64_t>();
  GridConfig config;
  try {
    config = GridConfig::from_text(r.str());
    config.validate();
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint carries an invalid config: ") + e.what());
  }
  if (config.dynamics_hash() != hash) {
    throw CheckpointError("checkpoint config hash " + hex64(hash) + " does not match its config text (" +
                          hex64(config.dynamics_hash()) + ")");
  }

  CheckpointData out;
  World& world = out.world;
  world.config = config;
  world.topology = Topology(config.dims, config.neighborhood_radius);
  world.step = r.get<std::int64_t>();

  const auto n = static_cast<std::size_t>(config.dims.size());
  if (r.get<std::uint64_t>() != n) throw CheckpointError("checkpoint agent count does not match its grid");
  world.agents.resize(n);
  const Genome blank = Genome::zeros(config.message_shape, config.task_on);
  for (AgentRuntime& a : world.agents) {
    a.genome = blank;
    if (r.get<std::uint64_t>() != blank.parameter_count()) {
      throw CheckpointError("checkpoint genome size does not match its config");
    }
    a.genome.for_each_tensor([&](double* p, std::size_t k) { r.bytes(p, k * sizeof(double)); });
    r.bytes(a.global.data(), sizeof(double) * kGlobalHidden);
    r.bytes(a.task.data(), sizeof(double) * kTaskHidden);
    a.buffer = MessageBuffer(config.buffer_capacity);
    const auto entries = r.count(static_cast<std::uint64_t>(config.buffer_capacity), "buffer entry");
    for (std::uint64_t i = 0; i < entries; ++i) {
      MessageBuffer::Entry e;
      r.bytes(e.message.values.data(), sizeof(double) * e.message.values.size());
      e.message.source = get_site(r);
      e.slot = r.get<std::int32_t>();
      if (e.slot < 0 || e.slot >= config.neighbor_count()) throw CheckpointError("checkpoint buffer slot out of range");
      a.buffer.push(std::move(e));
    }
    const auto slots = r.get<std::uint64_t>();
    if (slots != static_cast<std::uint64_t>(config.neighbor_count())) {
      throw CheckpointError("checkpoint selection counts do not match the neighborhood");
    }
    a.counts = SelectionCounts(config.neighbor_count());
    r.bytes(a.counts.weights().data(), sizeof(double) * slots);
    a.fitness.mean = r.get<double>();
    a.fitness.count = r.get<std::int64_t>();
  }

  world.has_broadcasts = r.get<std::uint8_t>() != 0;
  if (r.get<std::uint64_t>() != n) throw CheckpointError("checkpoint broadcast count does not match its grid");
  world.broadcasts.assign(n, Message(config.message_shape));
  for (Message& m : world.broadcasts) {
    for (int k = 0; k < kMessageSymbols; ++k) {
      const auto v = r.get<std::int8_t>();
      if (k < m.shape().size()) m[k] = v;
    }
  }

  const auto memes = r.count(bytes.size(), "meme");
  std::vector<MemeInfo> infos(memes);
  for (MemeInfo& m : infos) {
    m.key = r.get<std::uint32_t>();
    m.index = r.get<std::uint32_t>();
    m.first_seen = r.get<std::int64_t>();
    m.peak = r.get<std::uint32_t>();
  }
  const auto steps = r.count(bytes.size(), "step");
  std::vector<std::int64_t> step_list(steps);
  r.bytes(step_list.data(), sizeof(std::int64_t) * steps);
  std::vector<std::uint64_t> offsets(steps + 1);
  r.bytes(offsets.data(), sizeof(std::uint64_t) * offsets.size());
  const auto present = r.count(bytes.size(), "presence");
  std::vector<MemeRegistry::Presence> presence(present);
  for (auto& p : presence) {
    p.meme = r.get<std::uint32_t>();
    p.population = r.get<std::uint32_t>();
  }
  if (!r.done()) throw CheckpointError("checkpoint has trailing bytes");
  try {
    out.registry = MemeRegistry::from_parts(std::move(infos), std::move(step_list), std::move(offsets),
                                            std::move(presence));
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint registry is inconsistent: ") + e.what());
  }
  return out;
}

void save_checkpoint(const std::string& path, const World& world, const MemeRegistry& registry) {
  const std::string bytes = encode_checkpoint(world, registry);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("cannot write checkpoint " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return decode_checkpoint(ss.str());
  } catch (const CheckpointError& e) {
    throw CheckpointError(path + ": " + e.what());
  }
}

void require_matching_hash(const World& world, std::uint64_t expected) {
  const std::uint64_t actual = world.config.dynamics_hash();
  if (actual != expected) {
    throw CheckpointError("config hash mismatch: checkpoint " + hex64(actual) + ", requested " + hex64(expected));
  }
}

}  // namespace memesim
