#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bpre/config.hpp"
#include "bpre/distances.hpp"
#include "bpre/simulate.hpp"
#include "bpre/theorems.hpp"

namespace bpre {

// Identifies the producing run in every emitted file.
struct RunStamp {
  std::string version = BPRE_VERSION;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

RunStamp stamp_for(const RunConfig& cfg);

// Shortest text that parses back to the same double.
std::string format_real(double x);

// "# bpre_lab <version> seed=<seed> config_hash=<16 hex digits>"
std::string csv_comment(const RunStamp& stamp);

// Header "n,statistic,value,se,method"; a missing se is an empty field.
std::string report_csv(const std::vector<ReportRow>& rows, const RunStamp& stamp);

// Header "path_index,n,regime,z_exact,log_z,s,log_w"; z_exact is blank once asymptotic.
std::string paths_csv(const std::vector<std::pair<std::uint64_t, PathRecord>>& records,
                      const RunStamp& stamp);

nlohmann::json to_json(const RateFit& fit);
nlohmann::json to_json(const LlnReport& r);
nlohmann::json to_json(const LilReport& r);
nlohmann::json to_json(const InvarianceReport& r);
nlohmann::json to_json(const CltRateReport& r);
nlohmann::json to_json(const MomentReport& r);
nlohmann::json to_json(const ConditionReport& r);

// Top-level document: {"kind", "version", "seed", "config_hash", "config", "report"};
// "config" omits the output block.
nlohmann::json report_document(const std::string& kind, nlohmann::json report, const RunConfig& cfg);

// One number per line or the first column of a CSV; '#' comments, blank lines
// and a non-numeric header line are skipped. Throws IoError.
EmpiricalSample read_sample_file(const std::filesystem::path& path);

// Writes atomically enough for tests: whole-buffer write, IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace bpre
