#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "bpre/cli.hpp"
#include "bpre/report_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "bpre");
  std::ostringstream out;
  std::ostringstream err;
  const int code = bpre::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("bpre_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string read(const std::string& path) { return bpre::read_text_file(path); }

const char* kReference = R"([model]
family = "shifted_poisson"
parameters = [0.5, 1.5]
probabilities = [0.5, 0.5]

[sim]
horizon = 60
seed = 99

[experiment]
n_grid = [16, 64, 256, 1024]
paths = 2000
bootstrap = 20
)";

const char* kDoubling = R"([model]
family = "two_point"
k = 2
parameters = [1.0]
probabilities = [1.0]

[experiment]
n_grid = [10, 100]
paths = 100
)";

// One line per structural element of a rate plot.
std::string rate_plot_structure(const std::string& svg) {
  std::ostringstream os;
  if (svg.find("class=\"title\"") != std::string::npos) os << "title\n";
  if (svg.find("class=\"axes\"") != std::string::npos) os << "axes\n";
  const std::regex group(R"re(<g class="series" data-metric="([^"]+)"[^>]*>([\s\S]*?)</g>)re");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), group); it != std::sregex_iterator(); ++it) {
    const std::string body = (*it)[2];
    os << "series " << (*it)[1];
    if (body.find("class=\"fit\"") != std::string::npos) os << " fit";
    if (std::regex_search(body, std::regex(R"re(class="slope"[^>]*>[^<]*slope = -?[0-9]+\.[0-9]{2}<)re"))) os << " slope";
    if (body.find("class=\"noise\"") != std::string::npos) os << " noise";
    os << "\n";
  }
  return os.str();
}

}  // namespace

TEST_CASE("verify lln on deterministic doubling reports mu = ln 2") {
  TempDir dir("lln");
  write(dir / "d.toml", kDoubling);
  const auto r = run({"--config", dir / "d.toml", "verify", "lln", "--out", dir / "out"});
  REQUIRE(r.code == 0);
  const json doc = json::parse(read(dir / "out/lln.json"));
  CHECK(doc.at("kind") == "lln");
  CHECK(doc.at("report").at("mu").get<double>() == std::log(2.0));
  for (const auto& row : doc.at("report").at("rows")) CHECK(row.at("coverage").get<double>() == 1.0);
  const std::string csv = read(dir / "out/lln.csv");
  CHECK(csv.rfind("# bpre_lab ", 0) == 0);
  CHECK(csv.find("config_hash=") != std::string::npos);
  CHECK(csv.find("\nn,statistic,value,se,method\n") != std::string::npos);
}

TEST_CASE("verify clt-rate then plot gives one fitted line per order") {
  TempDir dir("plot");
  write(dir / "r.toml", kReference);
  const auto v = run({"--config", dir / "r.toml", "--out", dir / "out", "verify", "clt-rate"});
  REQUIRE(v.code == 0);
  const auto p = run({"plot", dir / "out/clt_rate.json", "--out", dir / "svg"});
  REQUIRE(p.code == 0);
  const std::string svg = read(dir / "svg/clt_rate.svg");
  CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
  const std::string golden = read(std::string(BPRE_TEST_DATA) + "/golden/clt_rate_plot.structure");
  CHECK(rate_plot_structure(svg) == golden);
}

TEST_CASE("lil and invariance plots") {
  TempDir dir("plots2");
  write(dir / "r.toml", std::string(kReference) + "\n[output]\nformat = \"json\"\n");
  REQUIRE(run({"--config", dir / "r.toml", "--paths", "200", "--out", dir / "o", "verify", "lil"}).code == 0);
  REQUIRE(run({"--config", dir / "r.toml", "--paths", "500", "--out", dir / "o", "verify", "invariance"}).code == 0);
  CHECK_FALSE(fs::exists(dir / "o/lil.csv"));
  REQUIRE(run({"plot", dir / "o/lil.json", dir / "o/invariance.json", "--out", dir / "o"}).code == 0);
  const std::string lil = read(dir / "o/lil.svg");
  CHECK(std::count(lil.begin(), lil.end(), '\n') > 5);
  CHECK(lil.find("class=\"reference\"") != std::string::npos);
  CHECK(lil.find("class=\"trace\"") != std::string::npos);
  const std::string heat = read(dir / "o/invariance.svg");
  std::size_t cells = 0;
  for (auto pos = heat.find("class=\"cell\""); pos != std::string::npos; pos = heat.find("class=\"cell\"", pos + 1)) {
    ++cells;
  }
  CHECK(cells == 27);
}

TEST_CASE("distance between identical files is zero") {
  TempDir dir("distance");
  write(dir / "a.txt", "# sample\n0.5\n-1.25\n3\n2\n");
  const auto r = run({"distance", dir / "a.txt", dir / "a.txt"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "statistic,value,method,exact");
  int rows = 0;
  while (std::getline(lines, line)) {
    const auto first = line.find(',');
    const auto second = line.find(',', first + 1);
    CHECK(line.substr(first + 1, second - first - 1) == "0");
    ++rows;
  }
  CHECK(rows == 4);

  write(dir / "b.txt", "value\n1\n2\n");
  const auto mixed = run({"distance", dir / "a.txt", dir / "b.txt", "--order", "1", "--out", dir / "o"});
  CHECK(mixed.code == 0);
  CHECK(fs::exists(dir / "o/distance.csv"));
  CHECK(fs::exists(dir / "o/distance.json"));

  write(dir / "bad.txt", "1\nx\n");
  CHECK(run({"distance", dir / "a.txt", dir / "bad.txt"}).code == 5);
}

TEST_CASE("simulate writes the path schema") {
  TempDir dir("simulate");
  write(dir / "r.toml", kReference);
  const auto r = run({"--config", dir / "r.toml", "--paths", "100", "--out", dir / "o", "simulate"});
  REQUIRE(r.code == 0);
  const std::string csv = read(dir / "o/paths.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line.rfind("# bpre_lab", 0) == 0);
  std::getline(lines, line);
  CHECK(line == "path_index,n,regime,z_exact,log_z,s,log_w");
  int rows = 0;
  bool saw_blank = false;
  while (std::getline(lines, line)) {
    ++rows;
    if (line.find(",asymptotic,,") != std::string::npos) saw_blank = true;
  }
  CHECK(rows == 100);
  CHECK(saw_blank);
}

TEST_CASE("failure classes map to exit codes") {
  TempDir dir("codes");
  CHECK(run({"--config", dir / "missing.toml", "validate"}).code == 5);
  write(dir / "syntax.toml", "[model\n");
  CHECK(run({"--config", dir / "syntax.toml", "validate"}).code == 2);
  write(dir / "bad.toml", "[model]\nfamily = \"shifted_poisson\"\nparameters = [1.0]\nprobabilities = [0.9]\n");
  const auto bad = run({"--config", dir / "bad.toml", "validate"});
  CHECK(bad.code == 6);
  CHECK(bad.err.find("model.probabilities") != std::string::npos);
  write(dir / "ok.toml", kReference);
  CHECK(run({"--config", dir / "ok.toml", "validate"}).code == 0);
  CHECK(run({"--config", dir / "ok.toml", "--paths", "5", "validate"}).code == 6);
  CHECK(run({"--config", dir / "ok.toml", "verify", "nonsense"}).code == 1);
  CHECK(run({"validate"}).code == 2);
  write(dir / "doubling.toml", kDoubling);
  CHECK(run({"--config", dir / "doubling.toml", "verify", "lil", "--out", dir / "o"}).code == 4);
  write(dir / "report.json", "{\"kind\": \"lln\", \"report\": {}}");
  CHECK(run({"plot", dir / "report.json", "--out", dir / "o"}).code == 7);
  write(dir / "broken.json", "{");
  CHECK(run({"plot", dir / "broken.json", "--out", dir / "o"}).code == 5);
}

TEST_CASE("outputs are identical across thread settings") {
  TempDir dir("threads");
  write(dir / "r.toml", kReference);
  ::setenv("BPRE_THREADS", "1", 1);
  REQUIRE(run({"--config", dir / "r.toml", "--paths", "400", "--out", dir / "a", "verify", "clt-rate"}).code == 0);
  ::setenv("BPRE_THREADS", "4", 1);
  REQUIRE(run({"--config", dir / "r.toml", "--paths", "400", "--out", dir / "b", "verify", "clt-rate"}).code == 0);
  ::unsetenv("BPRE_THREADS");
  CHECK(read(dir / "a/clt_rate.csv") == read(dir / "b/clt_rate.csv"));
  CHECK(read(dir / "a/clt_rate.json") == read(dir / "b/clt_rate.json"));
}
