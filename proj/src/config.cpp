#include "memesim/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace memesim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("invalid value '" + std::string(text) + "' for key '" + std::string(key) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("invalid boolean '" + std::string(text) + "' for key '" + std::string(key) + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct Field {
  const char* name;
  bool dynamics;
  std::function<std::string(const GridConfig&)> get;
  std::function<void(GridConfig&, std::string_view)> set;
};

#define MEMESIM_DOUBLE(member, dyn)                                                         \
  Field {                                                                                   \
    #member, dyn, [](const GridConfig& c) { return format_double(c.member); },              \
        [](GridConfig& c, std::string_view v) { c.member = parse_number<double>(#member, v); } \
  }
#define MEMESIM_INT(member, type, dyn)                                                     \
  Field {                                                                                  \
    #member, dyn, [](const GridConfig& c) { return std::to_string(c.member); },            \
        [](GridConfig& c, std::string_view v) { c.member = parse_number<type>(#member, v); } \
  }
#define MEMESIM_BOOL(member, dyn)                                                         \
  Field {                                                                                 \
    #member, dyn, [](const GridConfig& c) { return std::string(c.member ? "true" : "false"); }, \
        [](GridConfig& c, std::string_view v) { c.member = parse_bool(#member, v); }       \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"dims", true,
            [](const GridConfig& c) {
              return std::to_string(c.dims.rows) + "x" + std::to_string(c.dims.cols);
            },
            [](GridConfig& c, std::string_view v) { c.dims = parse_dims(v); }},
      Field{"message_shape", true,
            [](const GridConfig& c) {
              return std::to_string(c.message_shape.length) + "x" +
                     std::to_string(c.message_shape.channels);
            },
            [](GridConfig& c, std::string_view v) {
              const GridDims d = parse_dims(v);
              c.message_shape = {d.rows, d.cols};
            }},
      MEMESIM_INT(buffer_capacity, int, true),
      MEMESIM_INT(neighborhood_radius, int, true),
      MEMESIM_DOUBLE(noise_std, true),
      MEMESIM_DOUBLE(target_entropy, true),
      MEMESIM_DOUBLE(entropy_rate, true),
      MEMESIM_INT(softmax_iters, int, true),
      MEMESIM_DOUBLE(beta, true),
      Field{"promote_prob", true,
            [](const GridConfig& c) {
              return c.promote_prob ? format_double(*c.promote_prob) : std::string("auto");
            },
            [](GridConfig& c, std::string_view v) {
              if (v == "auto") {
                c.promote_prob.reset();
              } else {
                c.promote_prob = parse_number<double>("promote_prob", v);
              }
            }},
      MEMESIM_INT(top_n, int, true),
      MEMESIM_DOUBLE(mutation_fraction, true),
      MEMESIM_DOUBLE(weight_decay, true),
      MEMESIM_DOUBLE(mutation_std, true),
      MEMESIM_DOUBLE(init_gain, true),
      MEMESIM_DOUBLE(count_decay, true),
      MEMESIM_DOUBLE(gamma_s, true),
      MEMESIM_DOUBLE(gamma_f, true),
      MEMESIM_BOOL(evolution_on, true),
      MEMESIM_BOOL(mutation_on, true),
      MEMESIM_BOOL(selection_on, true),
      MEMESIM_BOOL(homogeneous_init, true),
      MEMESIM_BOOL(skip_connection_on, true),
      MEMESIM_BOOL(task_on, true),
      MEMESIM_INT(task_max_steps, int, true),
      Field{"task_env", true, [](const GridConfig& c) { return c.task_env; },
            [](GridConfig& c, std::string_view v) { c.task_env = std::string(v); }},
      MEMESIM_DOUBLE(env_timeout_s, false),
      MEMESIM_INT(seed, std::uint64_t, true),
      MEMESIM_INT(steps, std::int64_t, false),
      MEMESIM_INT(workers, int, false),
      MEMESIM_INT(checkpoint_every, std::int64_t, false),
      MEMESIM_BOOL(log_messages, false),
      MEMESIM_INT(raster_downsample, int, false),
      MEMESIM_INT(registry_dump_min_peak, int, false),
  };
  return table;
}

#undef MEMESIM_DOUBLE
#undef MEMESIM_INT
#undef MEMESIM_BOOL

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

GridDims parse_dims(std::string_view text) {
  text = trim(text);
  const auto sep = text.find_first_of("xX");
  if (sep == std::string_view::npos) {
    throw ConfigError("expected dimensions as RxC, got '" + std::string(text) + "'");
  }
  return {parse_number<int>("dims", trim(text.substr(0, sep))),
          parse_number<int>("dims", trim(text.substr(sep + 1)))};
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void GridConfig::validate() const {
  require(dims.rows >= 1 && dims.cols >= 1, "grid dimensions must be positive");
  require(neighborhood_radius >= 1, "neighborhood_radius must be >= 1");
  const int span = 2 * neighborhood_radius + 1;
  require(dims.rows >= span && dims.cols >= span,
          "grid " + std::to_string(dims.rows) + "x" + std::to_string(dims.cols) +
              " is smaller than the " + std::to_string(span) + "x" + std::to_string(span) +
              " neighborhood");
  require(dims.rows >= 3 && dims.cols >= 3, "grid must be at least 3x3 for Moore-8 replication");
  require(message_shape.length >= 1 && message_shape.channels >= 1 &&
              message_shape.size() == kMessageSymbols,
          "message_shape must have length*channels == 30");
  require(buffer_capacity >= neighbor_count(),
          "buffer_capacity must hold one delivery round (" + std::to_string(neighbor_count()) + ")");
  require(noise_std >= 0.0, "noise_std must be >= 0");
  require(target_entropy > 0.0, "target_entropy must be > 0");
  require(softmax_iters >= 0, "softmax_iters must be >= 0");
  require(!promote_prob || unit_interval(*promote_prob), "promote_prob must be in [0,1]");
  require(top_n >= 0, "top_n must be >= 0");
  require(unit_interval(mutation_fraction), "mutation_fraction must be in [0,1]");
  require(mutation_std >= 0.0, "mutation_std must be >= 0");
  require(unit_interval(count_decay), "count_decay must be in [0,1]");
  require(unit_interval(gamma_s), "gamma_s must be in [0,1]");
  require(unit_interval(gamma_f), "gamma_f must be in [0,1]");
  require(task_max_steps >= 1, "task_max_steps must be >= 1");
  require(task_env == "surrogate" || task_env.rfind("external:", 0) == 0,
          "task_env must be 'surrogate' or 'external:<command>'");
  require(steps >= 1, "steps must be >= 1");
  require(workers >= 0, "workers must be >= 0");
  require(raster_downsample >= 1, "raster_downsample must be >= 1");
}

void GridConfig::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "config_version") {
    if (parse_number<int>(key, value) != kConfigFormatVersion) {
      throw ConfigError("unsupported config_version " + std::string(value) + " (expected " +
                        std::to_string(kConfigFormatVersion) + ")");
    }
    return;
  }
  for (const Field& f : fields()) {
    if (key == f.name) {
      f.set(*this, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::string GridConfig::to_text() const {
  std::ostringstream out;
  out << "config_version = " << kConfigFormatVersion << "\n";
  for (const Field& f : fields()) out << f.name << " = " << f.get(*this) << "\n";
  return out.str();
}

GridConfig GridConfig::from_text(std::string_view text) {
  GridConfig config;
  config.apply_text(text);
  return config;
}

void GridConfig::apply_text(std::string_view text) {
  GridConfig& config = *this;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    config.set(line.substr(0, eq), line.substr(eq + 1));
  }
}

GridConfig GridConfig::from_file(const std::string& path) {
  GridConfig config;
  config.apply_file(path);
  return config;
}

void GridConfig::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  apply_text(buffer.str());
}

std::uint64_t GridConfig::dynamics_hash() const {
  std::string text;
  for (const Field& f : fields()) {
    if (!f.dynamics) continue;
    text += f.name;
    text += '=';
    text += f.get(*this);
    text += '\n';
  }
  return fnv1a64(text);
}

std::vector<std::string> GridConfig::keys() {
  std::vector<std::string> out;
  for (const Field& f : fields()) out.emplace_back(f.name);
  return out;
}

}  // namespace memesim
