#include "bpre/cli.hpp"

#include <filesystem>
#include <optional>

#include <CLI11.hpp>

#include "bpre/config.hpp"
#include "bpre/errors.hpp"
#include "bpre/parallel.hpp"
#include "bpre/plot.hpp"
#include "bpre/report_io.hpp"
#include "bpre/theorems.hpp"

namespace bpre {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> paths;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  std::string experiment;
  std::vector<std::string> sample_files;
  std::vector<std::string> report_files;
  std::vector<double> orders;
};

RunConfig load(const Options& o) {
  if (o.config.empty()) throw ConfigError(ErrorKind::ConfigParse, "--config is required for this command");
  RunConfig cfg = parse_config_file(o.config);
  if (o.seed) cfg.sim.master_seed = *o.seed;
  if (o.paths) cfg.experiment.paths = *o.paths;
  if (o.out_dir) cfg.output.directory = *o.out_dir;
  if (o.format) cfg.output.format = *parse_format(*o.format);
  try {
    cfg.experiment_config().validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(ErrorKind::ConfigValidation, std::string("command line override: ") + e.what());
  }
  return cfg;
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

void emit(const RunConfig& cfg, const std::string& kind, const json& report, const std::vector<ReportRow>& rows,
          std::ostream& out) {
  const fs::path dir = ensure_dir(cfg.output.directory);
  if (cfg.output.format != OutputFormat::Csv) {
    const fs::path p = dir / (kind + ".json");
    write_text_file(p, report_document(kind, report, cfg).dump(2) + "\n");
    out << "wrote " << p.string() << "\n";
  }
  if (cfg.output.format != OutputFormat::Json) {
    const fs::path p = dir / (kind + ".csv");
    write_text_file(p, report_csv(rows, stamp_for(cfg)));
    out << "wrote " << p.string() << "\n";
  }
}

int cmd_validate(const Options& o, std::ostream& out) {
  const RunConfig cfg = load(o);
  const ConditionReport r = validate_conditions(cfg.model, cfg.experiment.delta);
  auto flag = [](bool b) { return b ? "true" : "false"; };
  out << "model: " << family_name(cfg.model.family) << "\n"
      << "mu = " << format_real(r.moments.mu) << "\n"
      << "sigma2 = " << format_real(r.moments.sigma2) << "\n"
      << "assumption_1_1 = " << flag(r.assumption_1_1) << "\n"
      << "assumption_2_2 = " << flag(r.assumption_2_2) << "\n"
      << "condition1 (delta = " << format_real(r.delta) << ") = " << flag(r.condition1) << "\n"
      << "condition2 (p = " << format_real(r.p) << ", c = " << format_real(r.c) << ") = " << flag(r.condition2)
      << "\n";
  for (const auto& d : r.diagnostics) out << "diagnostic: " << d << "\n";
  return r.all() ? 0 : static_cast<int>(ErrorKind::ConfigValidation);
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const RunConfig cfg = load(o);
  const std::uint64_t paths = cfg.experiment.paths;
  std::vector<std::vector<PathRecord>> per_path(paths);
  parallel_for(paths, [&](std::size_t i) { per_path[i] = simulate_path(cfg.model, cfg.sim, i); });
  std::vector<std::pair<std::uint64_t, PathRecord>> records;
  for (std::size_t i = 0; i < paths; ++i) {
    for (const auto& r : per_path[i]) records.emplace_back(i, r);
  }
  const fs::path dir = ensure_dir(cfg.output.directory);
  const fs::path p = dir / "paths.csv";
  write_text_file(p, paths_csv(records, stamp_for(cfg)));
  out << "wrote " << p.string() << " (" << paths << " paths, horizon " << cfg.sim.horizon << ")\n";
  return 0;
}

int cmd_distance(const Options& o, std::ostream& out) {
  const EmpiricalSample a = read_sample_file(o.sample_files.at(0));
  const EmpiricalSample b = read_sample_file(o.sample_files.at(1));
  std::vector<double> orders = o.orders;
  std::optional<RunConfig> cfg;
  if (!o.config.empty()) {
    cfg = load(o);
    if (orders.empty()) orders = cfg->experiment.orders;
  }
  if (orders.empty()) orders = {1.0, 2.0};

  std::vector<std::pair<std::string, DistanceEstimate>> results;
  for (double r : orders) {
    std::ostringstream name;
    name << "W" << r;
    results.emplace_back(name.str(), wasserstein(a, b, r, SizeMismatch::Interpolate));
  }
  results.emplace_back("zeta1", zolotarev_1(a, b));
  results.emplace_back("zeta2", zolotarev_2_equal_mean(a, b, true));

  std::string csv = "statistic,value,method,exact\n";
  json doc = json::array();
  for (const auto& [name, est] : results) {
    csv += name + "," + format_real(est.value) + "," + std::string(method_name(est.method)) + "," +
           (est.exact ? "true" : "false") + "\n";
    doc.push_back({{"statistic", name},
                   {"value", est.value},
                   {"method", method_name(est.method)},
                   {"exact", est.exact}});
  }
  out << csv;
  if (o.out_dir || cfg) {
    RunStamp stamp;
    if (cfg) {
      stamp = stamp_for(*cfg);
    } else {
      stamp.config_hash = fnv1a64(read_text_file(o.sample_files[0]) + read_text_file(o.sample_files[1]));
    }
    const fs::path dir = ensure_dir(o.out_dir ? *o.out_dir : cfg->output.directory);
    const OutputFormat format = o.format ? *parse_format(*o.format)
                                         : (cfg ? cfg->output.format : OutputFormat::Both);
    if (format != OutputFormat::Json) write_text_file(dir / "distance.csv", csv_comment(stamp) + "\n" + csv);
    if (format != OutputFormat::Csv) {
      json full = {{"kind", "distance"},
                   {"version", stamp.version},
                   {"sizes", {a.size(), b.size()}},
                   {"distances", doc}};
      write_text_file(dir / "distance.json", full.dump(2) + "\n");
    }
  }
  return 0;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const RunConfig cfg = load(o);
  const ExperimentConfig ex = cfg.experiment_config();
  const std::string& which = o.experiment;
  if (which == "lln") {
    const auto r = run_lln(ex);
    for (const auto& row : r.rows) {
      out << "lln n=" << row.n << " coverage=" << format_real(row.coverage) << " mean=" << format_real(row.mean)
          << " se=" << format_real(row.se) << " mu=" << format_real(r.mu) << "\n";
    }
    emit(cfg, "lln", to_json(r), to_rows(r), out);
  } else if (which == "lil") {
    const auto r = run_lil(ex);
    out << "lil horizon=" << r.horizon << " ks_p_max=" << format_real(r.ks_max_p)
        << " ks_p_min=" << format_real(r.ks_min_p) << "\n";
    emit(cfg, "lil", to_json(r), to_rows(r), out);
  } else if (which == "invariance") {
    const auto r = run_invariance(ex, cfg.experiment.tolerance);
    out << "invariance horizon=" << r.horizon << " max_dev=" << format_real(r.process.max_abs_deviation)
        << " passes=" << (r.process.passes ? "true" : "false")
        << " oracle_passes=" << (r.oracle.passes ? "true" : "false") << "\n";
    emit(cfg, "invariance", to_json(r), to_rows(r), out);
  } else if (which == "clt-rate") {
    const auto r = run_clt_rate(ex);
    for (const auto& m : r.metrics) {
      out << "clt-rate " << m.name << ": ";
      if (m.fit) {
        out << "slope=" << format_real(m.fit->slope) << " ci=[" << format_real(m.fit->slope_ci.first) << ", "
            << format_real(m.fit->slope_ci.second) << "]\n";
      } else {
        out << "noise-dominated\n";
      }
    }
    emit(cfg, "clt_rate", to_json(r), to_rows(r), out);
  } else if (which == "moments") {
    const auto r = run_logw_moments(ex, cfg.experiment.q);
    out << "moments q=" << format_real(r.q) << " trend_slope=" << format_real(r.trend_slope) << " ci=["
        << format_real(r.trend_ci.first) << ", " << format_real(r.trend_ci.second) << "]\n";
    emit(cfg, "logw_moments", to_json(r), to_rows(r), out);
  } else if (which == "laplace") {
    const auto r = run_laplace_tail(ex, cfg.experiment.t_grid);
    out << "laplace n*=" << r.horizon;
    if (r.a_hat) {
      out << " a_hat=" << format_real(*r.a_hat) << " ci=[" << format_real(r.a_hat_ci.first) << ", "
          << format_real(r.a_hat_ci.second) << "]";
    } else {
      out << " no fit (fewer than 3 resolved tail points)";
    }
    out << "\n";
    emit(cfg, "laplace_tail", to_json(r), to_rows(r), out);
  } else {
    throw InvalidArgument("verify: unknown experiment '" + which + "'");
  }
  return 0;
}

int cmd_plot(const Options& o, std::ostream& out) {
  std::string dir = "out";
  if (o.out_dir) {
    dir = *o.out_dir;
  } else if (!o.config.empty()) {
    dir = load(o).output.directory;
  }
  const fs::path target = ensure_dir(dir);
  for (const auto& file : o.report_files) {
    json doc;
    try {
      doc = json::parse(read_text_file(file));
      for (const auto& rendered : render_document(doc)) {
        const fs::path p = target / (fs::path(file).stem().string() + ".svg");
        write_text_file(p, rendered.second);
        out << "wrote " << p.string() << "\n";
      }
    } catch (const json::exception& e) {
      throw IoError(file + ": malformed report: " + e.what());
    }
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo laboratory for branching processes in random environment", "bpre"};
  app.set_version_flag("--version", std::string(BPRE_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--config", o.config, "TOML or JSON run configuration");
  app.add_option("--seed", o.seed, "master seed (overrides sim.seed)");
  app.add_option("--paths", o.paths, "paths per horizon (overrides experiment.paths)");
  app.add_option("--out", o.out_dir, "output directory (overrides output.directory)");
  app.add_option("--format", o.format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));

  auto* validate = app.add_subcommand("validate", "print the model's condition report");
  auto* simulate = app.add_subcommand("simulate", "write path snapshots to paths.csv");
  auto* distance = app.add_subcommand("distance", "distances between two sample files");
  distance->add_option("samples", o.sample_files, "two sample files")->required()->expected(2);
  distance->add_option("--order", o.orders, "Wasserstein orders (default: config or 1 2)");
  auto* verify = app.add_subcommand("verify", "run one experiment and write JSON and CSV");
  verify->add_option("experiment", o.experiment, "lln, lil, invariance, clt-rate, moments or laplace")
      ->required()
      ->check(CLI::IsMember({"lln", "lil", "invariance", "clt-rate", "moments", "laplace"}));
  auto* plot = app.add_subcommand("plot", "render SVG plots from report JSON files");
  plot->add_option("reports", o.report_files, "report JSON files")->required();

  std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << BPRE_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*validate) return cmd_validate(o, out);
    if (*simulate) return cmd_simulate(o, out);
    if (*distance) return cmd_distance(o, out);
    if (*verify) return cmd_verify(o, out);
    if (*plot) return cmd_plot(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::Io);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace bpre
