#include "bpre/config.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

namespace bpre {

namespace {

using json = nlohmann::json;
using LineMap = std::map<std::string, int>;

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

json from_toml(const toml::node& node, const std::string& path, LineMap& lines,
               std::string_view source) {
  if (const auto* table = node.as_table()) {
    json out = json::object();
    for (const auto& [key, value] : *table) {
      const std::string child = join(path, key.str());
      lines[child] = static_cast<int>(value.source().begin.line);
      out[std::string(key.str())] = from_toml(value, child, lines, source);
    }
    return out;
  }
  if (const auto* array = node.as_array()) {
    json out = json::array();
    for (const auto& value : *array) out.push_back(from_toml(value, path, lines, source));
    return out;
  }
  if (const auto* v = node.as_integer()) return json(v->get());
  if (const auto* v = node.as_floating_point()) return json(v->get());
  if (const auto* v = node.as_string()) return json(v->get());
  if (const auto* v = node.as_boolean()) return json(v->get());
  std::ostringstream os;
  os << source << ":" << node.source().begin.line << ": " << path << ": unsupported value type";
  throw ConfigError(ErrorKind::ConfigParse, os.str());
}

int line_at(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// JSON keys are located textually: the first `"key" :` after the parent's key.
void json_lines(std::string_view text, const json& node, const std::string& path, std::size_t from,
                LineMap& lines) {
  if (!node.is_object()) return;
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string needle = "\"" + it.key() + "\"";
    std::size_t pos = from;
    for (;;) {
      pos = text.find(needle, pos);
      if (pos == std::string_view::npos) break;
      std::size_t after = pos + needle.size();
      while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
      if (after < text.size() && text[after] == ':') break;
      pos += needle.size();
    }
    if (pos == std::string_view::npos) continue;
    const std::string child = join(path, it.key());
    lines[child] = line_at(text, pos);
    json_lines(text, it.value(), child, pos, lines);
  }
}

class Reader {
 public:
  Reader(const LineMap& lines, std::string_view source) : lines_(lines), source_(source) {}

  [[noreturn]] void fail(ErrorKind kind, const std::string& field, const std::string& message) const {
    throw ConfigError(kind, prefix(field) + message);
  }

  std::string prefix(const std::string& field) const {
    std::string out(source_);
    if (auto it = lines_.find(field); it != lines_.end()) out += ":" + std::to_string(it->second);
    return out + ": ";
  }

  void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) const {
    if (!obj.is_object()) fail(ErrorKind::ConfigValidation, path, path + ": expected a table");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
        const std::string field = join(path, it.key());
        fail(ErrorKind::ConfigValidation, field, field + ": unknown key");
      }
    }
  }

  std::uint64_t to_u64(const json& v, const std::string& field) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      const auto i = v.get<std::int64_t>();
      if (i >= 0) return static_cast<std::uint64_t>(i);
    }
    if (v.is_string()) {
      const auto& s = v.get_ref<const std::string&>();
      std::uint64_t out = 0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty()) return out;
    }
    fail(ErrorKind::ConfigValidation, field, field + ": expected a nonnegative integer");
  }

  double to_double(const json& v, const std::string& field) const {
    if (v.is_number()) return v.get<double>();
    fail(ErrorKind::ConfigValidation, field, field + ": expected a number");
  }

  template <class T, class Convert>
  T get(const json& obj, const std::string& path, const char* key, T fallback, Convert convert) const {
    if (!obj.contains(key)) return fallback;
    return convert(obj.at(key), join(path, key));
  }

  std::uint64_t u64(const json& obj, const std::string& path, const char* key, std::uint64_t fallback) const {
    return get(obj, path, key, fallback, [this](const json& v, const std::string& f) { return to_u64(v, f); });
  }

  double real(const json& obj, const std::string& path, const char* key, double fallback) const {
    return get(obj, path, key, fallback, [this](const json& v, const std::string& f) { return to_double(v, f); });
  }

  std::string string(const json& obj, const std::string& path, const char* key, std::string fallback) const {
    return get(obj, path, key, std::move(fallback), [this](const json& v, const std::string& f) {
      if (!v.is_string()) fail(ErrorKind::ConfigValidation, f, f + ": expected a string");
      return v.get<std::string>();
    });
  }

  template <class T, class Element>
  std::vector<T> list(const json& obj, const std::string& path, const char* key, std::vector<T> fallback,
                      Element element) const {
    return get(obj, path, key, std::move(fallback), [&](const json& v, const std::string& f) {
      if (!v.is_array()) fail(ErrorKind::ConfigValidation, f, f + ": expected an array");
      std::vector<T> out;
      for (const auto& e : v) out.push_back(element(e, f));
      return out;
    });
  }

  std::vector<double> reals(const json& obj, const std::string& path, const char* key,
                            std::vector<double> fallback) const {
    return list(obj, path, key, std::move(fallback),
                [this](const json& v, const std::string& f) { return to_double(v, f); });
  }

  std::vector<std::uint64_t> u64s(const json& obj, const std::string& path, const char* key,
                                  std::vector<std::uint64_t> fallback) const {
    return list(obj, path, key, std::move(fallback),
                [this](const json& v, const std::string& f) { return to_u64(v, f); });
  }

  // Rethrows a module-level InvalidArgument ("field: message") with its line.
  template <class F>
  void validated(F&& f) const {
    try {
      f();
    } catch (const InvalidArgument& e) {
      const std::string what = e.what();
      const auto colon = what.find(':');
      const std::string field = colon == std::string::npos ? std::string() : what.substr(0, colon);
      throw ConfigError(ErrorKind::ConfigValidation, prefix(field) + what);
    }
  }

 private:
  const LineMap& lines_;
  std::string_view source_;
};

RunConfig build(const json& root, const LineMap& lines, std::string_view origin) {
  const Reader rd(lines, origin);
  rd.check_keys(root, "", {"model", "sim", "experiment", "output"});
  RunConfig cfg;

  if (!root.contains("model")) rd.fail(ErrorKind::ConfigValidation, "", "model: missing block");
  const json& model = root.at("model");
  rd.check_keys(model, "model", {"family", "kind", "parameters", "probabilities", "k"});
  if (!model.contains("family")) rd.fail(ErrorKind::ConfigValidation, "model", "model.family: missing");
  const std::string family = rd.string(model, "model", "family", "");
  const auto fam = parse_family(family);
  if (!fam) rd.fail(ErrorKind::ConfigValidation, "model.family", "model.family: unknown family '" + family + "'");
  cfg.model.family = *fam;
  const std::string kind = rd.string(model, "model", "kind", "finite");
  if (kind == "finite") {
    cfg.model.support = EnvironmentSpec::Support::Finite;
  } else if (kind == "interval") {
    cfg.model.support = EnvironmentSpec::Support::Interval;
  } else {
    rd.fail(ErrorKind::ConfigValidation, "model.kind", "model.kind: expected 'finite' or 'interval'");
  }
  cfg.model.parameters = rd.reals(model, "model", "parameters", {});
  cfg.model.probabilities = rd.reals(model, "model", "probabilities", {});
  cfg.model.two_point_k = rd.u64(model, "model", "k", 2);

  const json empty = json::object();
  const json& sim = root.contains("sim") ? root.at("sim") : empty;
  rd.check_keys(sim, "sim", {"horizon", "exact_threshold", "seed", "record_schedule"});
  cfg.sim.horizon = rd.u64(sim, "sim", "horizon", 100);
  cfg.sim.exact_threshold = rd.u64(sim, "sim", "exact_threshold", kDefaultExactThreshold);
  cfg.sim.master_seed = rd.u64(sim, "sim", "seed", 0);
  cfg.sim.record_schedule = rd.u64s(sim, "sim", "record_schedule", {});

  const json& ex = root.contains("experiment") ? root.at("experiment") : empty;
  rd.check_keys(ex, "experiment",
                {"n_grid", "paths", "delta", "orders", "q", "t_grid", "bootstrap", "source", "tolerance"});
  ExperimentBlock& e = cfg.experiment;
  e.n_grid = rd.u64s(ex, "experiment", "n_grid", e.n_grid);
  e.paths = rd.u64(ex, "experiment", "paths", e.paths);
  e.delta = rd.real(ex, "experiment", "delta", e.delta);
  e.orders = rd.reals(ex, "experiment", "orders", e.orders);
  e.q = rd.real(ex, "experiment", "q", e.q);
  e.t_grid = rd.reals(ex, "experiment", "t_grid", e.t_grid);
  e.bootstrap = rd.u64(ex, "experiment", "bootstrap", e.bootstrap);
  const std::string source_text = rd.string(ex, "experiment", "source", source_name(e.source));
  const auto source = parse_source(source_text);
  if (!source) {
    rd.fail(ErrorKind::ConfigValidation, "experiment.source",
            "experiment.source: expected bpre, gaussian_walk or associated_walk");
  }
  e.source = *source;
  e.tolerance = rd.real(ex, "experiment", "tolerance", e.tolerance);

  const json& out = root.contains("output") ? root.at("output") : empty;
  rd.check_keys(out, "output", {"directory", "format"});
  cfg.output.directory = rd.string(out, "output", "directory", cfg.output.directory);
  const std::string fmt = rd.string(out, "output", "format", std::string(format_name(cfg.output.format)));
  const auto format = parse_format(fmt);
  if (!format) rd.fail(ErrorKind::ConfigValidation, "output.format", "output.format: expected csv, json or both");
  cfg.output.format = *format;

  rd.validated([&] {
    cfg.model.validate();
    cfg.sim.validate();
    cfg.experiment_config().validate();
    if (!(e.q > 0.0 && e.q <= 3.0)) throw InvalidArgument("experiment.q: must lie in (0, 3]");
    if (!(e.tolerance > 0.0)) throw InvalidArgument("experiment.tolerance: must be positive");
    if (e.t_grid.empty()) throw InvalidArgument("experiment.t_grid: must not be empty");
    for (std::size_t i = 0; i < e.t_grid.size(); ++i) {
      if (!(e.t_grid[i] > 0.0) || (i > 0 && e.t_grid[i] <= e.t_grid[i - 1])) {
        throw InvalidArgument("experiment.t_grid: must be positive and strictly increasing");
      }
    }
    if (cfg.output.directory.empty()) throw InvalidArgument("output.directory: must not be empty");
  });
  return cfg;
}

std::string toml_double(double x) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string toml_u64(std::uint64_t x) {
  if (x > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    return "\"" + std::to_string(x) + "\"";
  }
  return std::to_string(x);
}

std::string toml_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

template <class T, class F>
std::string toml_list(const std::vector<T>& xs, F format) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += format(xs[i]);
  }
  return out + "]";
}

}  // namespace

std::string_view format_name(OutputFormat format) {
  switch (format) {
    case OutputFormat::Csv:
      return "csv";
    case OutputFormat::Json:
      return "json";
    case OutputFormat::Both:
      return "both";
  }
  return "both";
}

std::optional<OutputFormat> parse_format(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  if (name == "both") return OutputFormat::Both;
  return std::nullopt;
}

std::optional<PathSource> parse_source(std::string_view name) {
  for (auto s : {PathSource::Bpre, PathSource::GaussianWalk, PathSource::AssociatedWalk}) {
    if (name == source_name(s)) return s;
  }
  return std::nullopt;
}

ExperimentConfig RunConfig::experiment_config() const {
  ExperimentConfig cfg;
  cfg.spec = model;
  cfg.n_grid = experiment.n_grid;
  cfg.paths = experiment.paths;
  cfg.master_seed = sim.master_seed;
  cfg.delta = experiment.delta;
  cfg.orders = experiment.orders;
  cfg.exact_threshold = sim.exact_threshold;
  cfg.bootstrap = experiment.bootstrap;
  cfg.source = experiment.source;
  return cfg;
}

RunConfig parse_config_string(std::string_view text, ConfigSyntax syntax, std::string_view source_name) {
  LineMap lines;
  json root;
  if (syntax == ConfigSyntax::Toml) {
    toml::table table;
    try {
      table = toml::parse(text, source_name);
    } catch (const toml::parse_error& e) {
      std::ostringstream os;
      os << source_name << ":" << e.source().begin.line << ": " << e.description();
      throw ConfigError(ErrorKind::ConfigParse, os.str());
    }
    root = from_toml(table, "", lines, source_name);
  } else {
    try {
      root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
      std::ostringstream os;
      os << source_name << ":" << line_at(text, e.byte == 0 ? 0 : e.byte - 1) << ": " << e.what();
      throw ConfigError(ErrorKind::ConfigParse, os.str());
    }
    if (!root.is_object()) {
      throw ConfigError(ErrorKind::ConfigParse, std::string(source_name) + ":1: expected a JSON object");
    }
    json_lines(text, root, "", 0, lines);
  }
  return build(root, lines, source_name);
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto syntax = path.extension() == ".json" ? ConfigSyntax::Json : ConfigSyntax::Toml;
  return parse_config_string(buf.str(), syntax, path.string());
}

std::string to_toml(const RunConfig& cfg) {
  auto u = [](std::uint64_t x) { return toml_u64(x); };
  auto d = [](double x) { return toml_double(x); };
  std::ostringstream os;
  os << "[model]\n"
     << "family = " << toml_string(family_name(cfg.model.family)) << "\n"
     << "kind = "
     << toml_string(cfg.model.support == EnvironmentSpec::Support::Finite ? "finite" : "interval") << "\n"
     << "parameters = " << toml_list(cfg.model.parameters, d) << "\n"
     << "probabilities = " << toml_list(cfg.model.probabilities, d) << "\n"
     << "k = " << u(cfg.model.two_point_k) << "\n\n"
     << "[sim]\n"
     << "horizon = " << u(cfg.sim.horizon) << "\n"
     << "exact_threshold = " << u(cfg.sim.exact_threshold) << "\n"
     << "seed = " << u(cfg.sim.master_seed) << "\n"
     << "record_schedule = " << toml_list(cfg.sim.record_schedule, u) << "\n\n";
  const ExperimentBlock& e = cfg.experiment;
  os << "[experiment]\n"
     << "n_grid = " << toml_list(e.n_grid, u) << "\n"
     << "paths = " << u(e.paths) << "\n"
     << "delta = " << d(e.delta) << "\n"
     << "orders = " << toml_list(e.orders, d) << "\n"
     << "q = " << d(e.q) << "\n"
     << "t_grid = " << toml_list(e.t_grid, d) << "\n"
     << "bootstrap = " << u(e.bootstrap) << "\n"
     << "source = " << toml_string(source_name(e.source)) << "\n"
     << "tolerance = " << d(e.tolerance) << "\n\n"
     << "[output]\n"
     << "directory = " << toml_string(cfg.output.directory) << "\n"
     << "format = " << toml_string(format_name(cfg.output.format)) << "\n";
  return os.str();
}

std::string to_json_text(const RunConfig& cfg) {
  json j;
  j["model"] = {
      {"family", family_name(cfg.model.family)},
      {"kind", cfg.model.support == EnvironmentSpec::Support::Finite ? "finite" : "interval"},
      {"parameters", cfg.model.parameters},
      {"probabilities", cfg.model.probabilities},
      {"k", cfg.model.two_point_k},
  };
  j["sim"] = {
      {"horizon", cfg.sim.horizon},
      {"exact_threshold", cfg.sim.exact_threshold},
      {"seed", cfg.sim.master_seed},
      {"record_schedule", cfg.sim.record_schedule},
  };
  const ExperimentBlock& e = cfg.experiment;
  j["experiment"] = {
      {"n_grid", e.n_grid},   {"paths", e.paths},         {"delta", e.delta},
      {"orders", e.orders},   {"q", e.q},                 {"t_grid", e.t_grid},
      {"bootstrap", e.bootstrap}, {"source", source_name(e.source)}, {"tolerance", e.tolerance},
  };
  j["output"] = {{"directory", cfg.output.directory}, {"format", format_name(cfg.output.format)}};
  return j.dump(2) + "\n";
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  RunConfig canonical = cfg;
  canonical.output = OutputBlock{};
  return fnv1a64(to_toml(canonical));
}

}  // namespace bpre
