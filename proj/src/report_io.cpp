#include "bpre/report_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bpre/errors.hpp"

namespace bpre {

using json = nlohmann::json;

RunStamp stamp_for(const RunConfig& cfg) {
  RunStamp s;
  s.seed = cfg.sim.master_seed;
  s.config_hash = config_hash(cfg);
  return s;
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string csv_comment(const RunStamp& stamp) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(stamp.config_hash));
  return "# bpre_lab " + stamp.version + " seed=" + std::to_string(stamp.seed) + " config_hash=" + hash;
}

std::string report_csv(const std::vector<ReportRow>& rows, const RunStamp& stamp) {
  std::string out = csv_comment(stamp) + "\n";
  out += "n,statistic,value,se,method\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + "," + r.statistic + "," + format_real(r.value) + ",";
    if (r.se) out += format_real(*r.se);
    out += "," + r.method + "\n";
  }
  return out;
}

std::string paths_csv(const std::vector<std::pair<std::uint64_t, PathRecord>>& records,
                      const RunStamp& stamp) {
  std::string out = csv_comment(stamp) + "\n";
  out += "path_index,n,regime,z_exact,log_z,s,log_w\n";
  for (const auto& [index, rec] : records) {
    out += std::to_string(index) + "," + std::to_string(rec.n) + "," + regime_name(rec.regime) + ",";
    if (rec.z_exact) out += std::to_string(*rec.z_exact);
    out += "," + format_real(rec.log_z) + "," + format_real(rec.s) + "," + format_real(rec.log_w) + "\n";
  }
  return out;
}

namespace {

json pair_json(const std::pair<double, double>& p) { return json::array({p.first, p.second}); }

json extremes_json(const ExtremeSummary& e) {
  return {{"running_max", e.running_max},
          {"running_min", e.running_min},
          {"max_band", pair_json(e.max_band)},
          {"min_band", pair_json(e.min_band)}};
}

json covariance_json(const CovarianceCheck& c) {
  json rows = json::array();
  for (const auto& row : c.covariance) rows.push_back(json(std::vector<double>(row.begin(), row.end())));
  return {{"covariance", rows}, {"max_abs_deviation", c.max_abs_deviation}, {"passes", c.passes}};
}

}  // namespace

json to_json(const RateFit& fit) {
  json points = json::array();
  for (const auto& p : fit.points) points.push_back(pair_json(p));
  return {{"slope", fit.slope},
          {"intercept", fit.intercept},
          {"slope_ci", pair_json(fit.slope_ci)},
          {"points", points},
          {"warnings", fit.warnings}};
}

json to_json(const LlnReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"coverage", row.coverage},
                    {"mean", row.mean},
                    {"se", row.se},
                    {"ci", pair_json(row.ci)},
                    {"mean_within_5se", row.mean_within_5se}});
  }
  return {{"source", source_name(r.source)}, {"mu", r.mu}, {"sigma", r.sigma}, {"paths", r.paths}, {"rows", rows}};
}

json to_json(const LilReport& r) {
  return {{"horizon", r.horizon},
          {"first_k", r.first_k},
          {"mu", r.mu},
          {"sigma", r.sigma},
          {"process", extremes_json(r.process)},
          {"oracle", extremes_json(r.oracle)},
          {"ks_max", {{"statistic", r.ks_max_statistic}, {"p_value", r.ks_max_p}}},
          {"ks_min", {{"statistic", r.ks_min_statistic}, {"p_value", r.ks_min_p}}},
          {"fraction_max_in_band", r.fraction_max_in_band},
          {"fraction_min_in_band", r.fraction_min_in_band},
          {"trace_k", r.trace_k},
          {"traces", r.traces}};
}

json to_json(const InvarianceReport& r) {
  return {{"horizon", r.horizon},
          {"times", std::vector<double>(r.times.begin(), r.times.end())},
          {"tolerance", r.tolerance},
          {"process", covariance_json(r.process)},
          {"oracle", covariance_json(r.oracle)},
          {"grid_max_ks", {{"statistic", r.grid_max_ks_statistic}, {"p_value", r.grid_max_ks_p}}},
          {"max_x", r.max_x},
          {"max_cdf_process", r.max_cdf_process},
          {"max_cdf_oracle", r.max_cdf_oracle},
          {"max_cdf_reflection", r.max_cdf_reflection}};
}

json to_json(const CltRateReport& r) {
  json metrics = json::array();
  for (const auto& m : r.metrics) {
    json points = json::array();
    for (const auto& p : m.points) {
      points.push_back({{"n", p.n},
                        {"raw", p.raw},
                        {"floor_mean", p.floor_mean},
                        {"floor_sd", p.floor_sd},
                        {"corrected", p.corrected},
                        {"resolved", p.resolved},
                        {"method", method_name(p.method)},
                        {"exact", p.exact}});
    }
    metrics.push_back({{"name", m.name},
                       {"order", m.order},
                       {"points", points},
                       {"noise_dominated", m.noise_dominated},
                       {"fit", m.fit ? to_json(*m.fit) : json(nullptr)},
                       {"bootstrap_used", m.bootstrap_used}});
  }
  json horizons = json::array();
  for (const auto& h : r.horizons) {
    horizons.push_back({{"n", h.n},
                        {"sample_mean", h.sample_mean},
                        {"sample_variance", h.sample_variance},
                        {"variance_se", h.variance_se},
                        {"ks", h.ks},
                        {"zeta1_minus_w1", h.zeta1_minus_w1},
                        {"zeta2_shift", pair_json(h.zeta2_shift)}});
  }
  return {{"source", source_name(r.source)},
          {"paths", r.paths},
          {"control_replicates", r.control_replicates},
          {"horizons", horizons},
          {"metrics", metrics}};
}

json to_json(const MomentReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"x", row.x},
                    {"estimate", row.estimate},
                    {"se", row.se},
                    {"mean_log_w", row.mean_log_w},
                    {"mean_log_w_se", row.mean_log_w_se}});
  }
  json out = {{"kind", r.kind},
              {"q", r.q},
              {"horizon", r.horizon},
              {"paths", r.paths},
              {"rows", rows},
              {"trend_slope", r.trend_slope},
              {"trend_ci", pair_json(r.trend_ci)},
              {"truncated_t", r.truncated_t},
              {"fit", r.fit ? to_json(*r.fit) : json(nullptr)}};
  if (r.a_hat) {
    out["a_hat"] = *r.a_hat;
    out["a_hat_ci"] = pair_json(r.a_hat_ci);
  }
  return out;
}

json to_json(const ConditionReport& r) {
  return {{"assumption_1_1", r.assumption_1_1},
          {"assumption_2_2", r.assumption_2_2},
          {"condition1", r.condition1},
          {"condition2", r.condition2},
          {"delta", r.delta},
          {"p", r.p},
          {"c", r.c},
          {"mu", r.moments.mu},
          {"sigma2", r.moments.sigma2},
          {"abs_moment_2_delta", r.moments.abs_moment_2_delta},
          {"all", r.all()},
          {"diagnostics", r.diagnostics}};
}

json report_document(const std::string& kind, json report, const RunConfig& cfg) {
  const RunStamp stamp = stamp_for(cfg);
  json config_json = json::parse(to_json_text(cfg));
  config_json.erase("output");
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(stamp.config_hash));
  return {{"kind", kind},
          {"version", stamp.version},
          {"seed", stamp.seed},
          {"config_hash", hash},
          {"config", config_json},
          {"report", std::move(report)}};
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

EmpiricalSample read_sample_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::string field = line.substr(first, line.find(',', first) - first);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.pop_back();
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      if (values.empty() && !header_seen) {
        header_seen = true;
        continue;
      }
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + field + "'");
    }
    values.push_back(x);
  }
  if (values.empty()) throw IoError(path.string() + ": no values");
  try {
    return EmpiricalSample(std::move(values));
  } catch (const InvalidArgument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace bpre
