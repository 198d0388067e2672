#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bpre/errors.hpp"
#include "bpre/models.hpp"
#include "bpre/simulate.hpp"
#include "bpre/theorems.hpp"

namespace bpre {

// Parse and validation failures carry "<source>:<line>: " when the line is known.
class ConfigError : public Error {
 public:
  ConfigError(ErrorKind kind, const std::string& what) : Error(kind, what) {}
};

enum class OutputFormat { Csv, Json, Both };

std::string_view format_name(OutputFormat format);

struct ExperimentBlock {
  std::vector<std::uint64_t> n_grid{16, 64, 256, 1024};
  std::uint64_t paths = 1000;
  double delta = 0.9;
  std::vector<double> orders{1.0, 2.0};
  double q = 3.0;
  std::vector<double> t_grid{1.0, 10.0, 100.0, 1000.0};
  std::uint64_t bootstrap = 200;
  PathSource source = PathSource::Bpre;
  double tolerance = 0.05;

  friend bool operator==(const ExperimentBlock&, const ExperimentBlock&) = default;
};

struct OutputBlock {
  std::string directory = "out";
  OutputFormat format = OutputFormat::Both;

  friend bool operator==(const OutputBlock&, const OutputBlock&) = default;
};

struct RunConfig {
  EnvironmentSpec model;
  SimConfig sim;  // sim.master_seed seeds every command
  ExperimentBlock experiment;
  OutputBlock output;

  ExperimentConfig experiment_config() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

enum class ConfigSyntax { Toml, Json };

// Missing or unreadable files throw IoError; the syntax follows the extension
// (.json is JSON, anything else TOML).
RunConfig parse_config_file(const std::filesystem::path& path);
RunConfig parse_config_string(std::string_view text, ConfigSyntax syntax,
                              std::string_view source_name = "<config>");

std::string to_toml(const RunConfig& cfg);
std::string to_json_text(const RunConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes);
// FNV-1a of the canonical TOML form with the output block left at its defaults,
// so where and how results are written does not change the hash.
std::uint64_t config_hash(const RunConfig& cfg);

std::optional<PathSource> parse_source(std::string_view name);
std::optional<OutputFormat> parse_format(std::string_view name);

}  // namespace bpre
