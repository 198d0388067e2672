#include "bpre/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "bpre/errors.hpp"

namespace bpre {

using json = nlohmann::json;

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

Frame padded(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0)) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double dx = 0.05 * (x1 - x0);
  const double dy = 0.08 * (y1 - y0);
  return Frame{x0 - dx, x1 + dx, y0 - dy, y1 + dy};
}

void open_svg(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text class=\"title\" x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(title) << "</text>\n";
}

void axes(std::ostringstream& os, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  const double xa = kLeft;
  const double xb = kWidth - kRight;
  const double ya = kTop;
  const double yb = kHeight - kBottom;
  os << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  os << "<line x1=\"" << num(xa) << "\" y1=\"" << num(yb) << "\" x2=\"" << num(xb) << "\" y2=\"" << num(yb) << "\"/>\n";
  os << "<line x1=\"" << num(xa) << "\" y1=\"" << num(ya) << "\" x2=\"" << num(xa) << "\" y2=\"" << num(yb) << "\"/>\n";
  os << "</g>\n";
  os << "<g class=\"ticks\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    os << "<text x=\"" << num(f.px(x)) << "\" y=\"" << num(yb + 16) << "\" text-anchor=\"middle\">" << num(x)
       << "</text>\n";
    os << "<text x=\"" << num(xa - 6) << "\" y=\"" << num(f.py(y) + 4) << "\" text-anchor=\"end\">" << num(y)
       << "</text>\n";
  }
  os << "</g>\n";
  os << "<text class=\"xlabel\" x=\"" << num((xa + xb) / 2) << "\" y=\"" << num(kHeight - 12)
     << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(xlabel) << "</text>\n";
  os << "<text class=\"ylabel\" x=\"16\" y=\"" << num((ya + yb) / 2) << "\" text-anchor=\"middle\" font-size=\"12\" "
     << "transform=\"rotate(-90 16 " << num((ya + yb) / 2) << ")\">" << escape(ylabel) << "</text>\n";
}

}  // namespace

std::string render_rate_plot(const json& report) {
  const double ln10 = std::log(10.0);
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  for (const auto& m : report.at("metrics")) {
    for (const auto& p : m.at("points")) {
      const double c = p.at("corrected").get<double>();
      const double lx = std::log10(p.at("n").get<double>());
      x0 = std::min(x0, lx);
      x1 = std::max(x1, lx);
      if (c > 0.0) {
        y0 = std::min(y0, std::log10(c));
        y1 = std::max(y1, std::log10(c));
      }
    }
  }
  if (!std::isfinite(y0)) {
    y0 = -3.0;
    y1 = 0.0;
  }
  if (!std::isfinite(x0)) {
    x0 = 0.0;
    x1 = 1.0;
  }
  const Frame f = padded(x0, x1, y0, y1);

  std::ostringstream os;
  open_svg(os, "Noise-corrected distance to N(0,1) against n");
  axes(os, f, "log10 n", "log10 corrected distance");
  std::size_t index = 0;
  for (const auto& m : report.at("metrics")) {
    const std::string name = m.at("name").get<std::string>();
    const char* colour = kPalette[index % std::size(kPalette)];
    os << "<g class=\"series\" data-metric=\"" << escape(name) << "\" stroke=\"" << colour << "\" fill=\"" << colour
       << "\">\n";
    for (const auto& p : m.at("points")) {
      const double c = p.at("corrected").get<double>();
      if (!(c > 0.0)) continue;
      const bool resolved = p.at("resolved").get<bool>();
      os << "<circle class=\"" << (resolved ? "point" : "point unresolved") << "\" cx=\""
         << num(f.px(std::log10(p.at("n").get<double>()))) << "\" cy=\"" << num(f.py(std::log10(c)))
         << "\" r=\"3.5\"" << (resolved ? "" : " fill=\"none\"") << "/>\n";
    }
    const double label_y = kTop + 14.0 + 16.0 * static_cast<double>(index);
    if (!m.at("fit").is_null()) {
      const auto& fit = m.at("fit");
      const double slope = fit.at("slope").get<double>();
      const double intercept = fit.at("intercept").get<double>();
      const auto& pts = fit.at("points");
      const double la = pts.front().at(0).get<double>();
      const double lb = pts.back().at(0).get<double>();
      os << "<line class=\"fit\" x1=\"" << num(f.px(la / ln10)) << "\" y1=\""
         << num(f.py((intercept + slope * la) / ln10)) << "\" x2=\"" << num(f.px(lb / ln10)) << "\" y2=\""
         << num(f.py((intercept + slope * lb) / ln10)) << "\" stroke-width=\"1.5\"/>\n";
      os << "<text class=\"slope\" x=\"" << num(kWidth - kRight - 6) << "\" y=\"" << num(label_y)
         << "\" text-anchor=\"end\" font-size=\"12\" stroke=\"none\">" << escape(name) << ": slope = " << num(slope)
         << "</text>\n";
    } else {
      os << "<text class=\"noise\" x=\"" << num(kWidth - kRight - 6) << "\" y=\"" << num(label_y)
         << "\" text-anchor=\"end\" font-size=\"12\" stroke=\"none\">" << escape(name) << ": noise-dominated</text>\n";
    }
    os << "</g>\n";
    ++index;
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_lil_plot(const json& report) {
  const auto trace_k = report.at("trace_k").get<std::vector<double>>();
  const auto traces = report.at("traces").get<std::vector<std::vector<double>>>();
  const double band = std::sqrt(2.0) * report.at("sigma").get<double>();
  double y0 = -band;
  double y1 = band;
  for (const auto& t : traces) {
    for (double v : t) {
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  }
  const double x0 = trace_k.empty() ? 1.0 : std::log10(trace_k.front());
  const double x1 = trace_k.empty() ? 2.0 : std::log10(trace_k.back());
  const Frame f = padded(x0, x1, y0, y1);

  std::ostringstream os;
  open_svg(os, "(log Z_k - k mu) / sqrt(k log log k)");
  axes(os, f, "log10 k", "normalized deviation");
  for (double level : {band, -band}) {
    os << "<line class=\"reference\" x1=\"" << num(f.px(f.x0)) << "\" y1=\"" << num(f.py(level)) << "\" x2=\""
       << num(f.px(f.x1)) << "\" y2=\"" << num(f.py(level)) << "\" stroke=\"black\" stroke-dasharray=\"6 4\"/>\n";
  }
  os << "<text class=\"reference-label\" x=\"" << num(kWidth - kRight - 6) << "\" y=\"" << num(f.py(band) - 6)
     << "\" text-anchor=\"end\" font-size=\"12\">+sqrt(2) sigma = " << num(band) << "</text>\n";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    os << "<polyline class=\"trace\" fill=\"none\" stroke-width=\"1\" stroke=\"" << kPalette[i % std::size(kPalette)]
       << "\" points=\"";
    for (std::size_t j = 0; j < traces[i].size() && j < trace_k.size(); ++j) {
      if (j) os << ' ';
      os << num(f.px(std::log10(trace_k[j]))) << ',' << num(f.py(traces[i][j]));
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_covariance_heatmap(const json& report) {
  const auto times = report.at("times").get<std::vector<double>>();
  std::ostringstream os;
  open_svg(os, "Covariance of normalized log Z at s, t vs min(s, t)");
  const double cell = 52.0;
  auto panel = [&](const std::string& label, const std::vector<std::vector<double>>& cov, double left) {
    os << "<g class=\"panel\" data-panel=\"" << escape(label) << "\">\n";
    os << "<text x=\"" << num(left + 1.5 * cell) << "\" y=\"" << num(kTop + 22) << "\" text-anchor=\"middle\" "
       << "font-size=\"13\">" << escape(label) << "</text>\n";
    for (std::size_t a = 0; a < cov.size(); ++a) {
      for (std::size_t b = 0; b < cov[a].size(); ++b) {
        const double v = std::clamp(cov[a][b], 0.0, 1.0);
        const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
        char fill[16];
        std::snprintf(fill, sizeof fill, "#ff%02x%02x", shade, shade);
        const double x = left + cell * static_cast<double>(b);
        const double y = kTop + 40.0 + cell * static_cast<double>(a);
        os << "<rect class=\"cell\" x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(cell)
           << "\" height=\"" << num(cell) << "\" fill=\"" << fill << "\" stroke=\"#444\"/>\n";
        os << "<text x=\"" << num(x + cell / 2) << "\" y=\"" << num(y + cell / 2 + 4)
           << "\" text-anchor=\"middle\" font-size=\"11\">" << num(cov[a][b]) << "</text>\n";
      }
    }
    for (std::size_t j = 0; j < times.size(); ++j) {
      os << "<text x=\"" << num(left + cell * (static_cast<double>(j) + 0.5)) << "\" y=\""
         << num(kTop + 40.0 + cell * 3 + 16) << "\" text-anchor=\"middle\" font-size=\"11\">t=" << num(times[j])
         << "</text>\n";
    }
    os << "</g>\n";
  };
  std::vector<std::vector<double>> target(times.size(), std::vector<double>(times.size()));
  for (std::size_t a = 0; a < times.size(); ++a) {
    for (std::size_t b = 0; b < times.size(); ++b) target[a][b] = std::min(times[a], times[b]);
  }
  panel("process", report.at("process").at("covariance").get<std::vector<std::vector<double>>>(), 30.0);
  panel("gaussian walk", report.at("oracle").at("covariance").get<std::vector<std::vector<double>>>(), 230.0);
  panel("min(s, t)", target, 430.0);
  os << "</svg>\n";
  return os.str();
}

std::vector<std::pair<std::string, std::string>> render_document(const json& document) {
  const std::string kind = document.at("kind").get<std::string>();
  const json& report = document.at("report");
  if (kind == "clt_rate") return {{"clt_rate", render_rate_plot(report)}};
  if (kind == "lil") return {{"lil_trace", render_lil_plot(report)}};
  if (kind == "invariance") return {{"covariance", render_covariance_heatmap(report)}};
  throw InvalidArgument("plot: no plot for report kind '" + kind + "'");
}

}  // namespace bpre
