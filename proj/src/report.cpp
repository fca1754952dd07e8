#include "hardylab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

namespace hardylab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string CsvTable::to_string() const {
  std::ostringstream os;
  auto emit = [&os](const std::vector<std::string>& row) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << csv_field(row[i]);
    }
    os << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return os.str();
}

CsvTable sweep_table(const std::string& scenario, const SweepResult& sweep) {
  CsvTable t;
  t.header = {"scenario",    "epsilon", "numerator",   "num_err", "denominator",
              "den_err",     "quotient", "lower_bound", "upper_bracket", "verdict"};
  for (const auto& row : sweep.rows) {
    const auto& r = row.report;
    t.rows.push_back({scenario, format_double(row.epsilon),
                      format_double(r.numerator.value),
                      format_double(r.numerator.abs_error_est),
                      format_double(r.denominator.value),
                      format_double(r.denominator.abs_error_est),
                      format_double(r.quotient), format_double(row.lower),
                      format_double(row.upper),
                      row.in_bracket ? "verified" : "violated"});
  }
  return t;
}

CsvTable verify_table(const std::string& scenario,
                      const std::vector<HardyReport>& reports) {
  CsvTable t;
  t.header = {"scenario",  "test",     "numerator", "num_err",        "denominator",
              "den_err",   "quotient", "sharp_constant", "slack", "verdict"};
  for (const auto& r : reports) {
    t.rows.push_back({scenario, r.test_label, format_double(r.numerator.value),
                      format_double(r.numerator.abs_error_est),
                      format_double(r.denominator.value),
                      format_double(r.denominator.abs_error_est),
                      format_double(r.quotient), format_double(r.sharp_constant),
                      format_double(r.slack), to_string(r.verdict)});
  }
  return t;
}

CsvTable minimize_table(const std::string& scenario,
                        const std::vector<MinimizationResult>& results) {
  CsvTable t;
  t.header = {"scenario", "dof",           "min_quotient", "eigen_residual",
              "mass_fraction", "iterations", "converged"};
  for (const auto& r : results) {
    t.rows.push_back({scenario, std::to_string(r.dof), format_double(r.min_quotient),
                      format_double(r.eigen_residual), format_double(r.mass_fraction),
                      std::to_string(r.iterations), r.converged ? "true" : "false"});
  }
  return t;
}

namespace {

std::string svg_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string sweep_svg(const std::string& scenario, const SweepResult& sweep) {
  if (sweep.rows.size() < 2)
    throw config_error("sweep_svg: need at least 2 rows to plot");
  const double W = 800, H = 500, ml = 80, mr = 30, mt = 40, mb = 60;

  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const auto& r : sweep.rows) {
    const double x = std::log10(r.epsilon);
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
    for (double y : {r.report.quotient, r.lower, r.upper}) {
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  const double pad = 0.08 * (y_hi - y_lo + 1e-12);
  y_lo -= pad;
  y_hi += pad;

  auto px = [&](double eps) {
    const double x = std::log10(eps);
    return ml + (x - x_lo) / std::max(x_hi - x_lo, 1e-12) * (W - ml - mr);
  };
  auto py = [&](double y) {
    return H - mb - (y - y_lo) / std::max(y_hi - y_lo, 1e-12) * (H - mt - mb);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
     << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H
     << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"monospace\" font-size=\"16\">"
     << scenario << ": quotient vs epsilon (log x)</text>\n";
  // Axes.
  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
     << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
     << H - mb << "\" stroke=\"black\"/>\n";

  const struct {
    const char* name;
    const char* color;
  } series[3] = {{"quotient", "#c03030"}, {"lower_bound", "#3060c0"},
                 {"upper_bracket", "#30a050"}};
  for (int s = 0; s < 3; ++s) {
    os << "<polyline fill=\"none\" stroke=\"" << series[s].color
       << "\" stroke-width=\"2\" points=\"";
    for (const auto& r : sweep.rows) {
      const double y =
          s == 0 ? r.report.quotient : (s == 1 ? r.lower : r.upper);
      os << svg_coord(px(r.epsilon)) << "," << svg_coord(py(y)) << " ";
    }
    os << "\"/>\n";
    os << "<text x=\"" << W - mr - 160 << "\" y=\"" << mt + 18 * (s + 1)
       << "\" font-family=\"monospace\" font-size=\"13\" fill=\"" << series[s].color
       << "\">" << series[s].name << "</text>\n";
  }
  // Tick labels: epsilons on x, min/max on y.
  for (const auto& r : sweep.rows) {
    os << "<text x=\"" << svg_coord(px(r.epsilon)) << "\" y=\"" << H - mb + 18
       << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">"
       << svg_coord(r.epsilon) << "</text>\n";
  }
  os << "<text x=\"" << ml - 8 << "\" y=\"" << py(y_lo + pad)
     << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">"
     << svg_coord(y_lo + pad) << "</text>\n";
  os << "<text x=\"" << ml - 8 << "\" y=\"" << py(y_hi - pad)
     << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">"
     << svg_coord(y_hi - pad) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot open for writing: " + path);
  f << content;
}

namespace {
LogLevel current_log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("HARDYLAB_LOG");
    if (!env) return LogLevel::warn;
    const std::string s(env);
    if (s == "error") return LogLevel::error;
    if (s == "warn") return LogLevel::warn;
    if (s == "info") return LogLevel::info;
    if (s == "debug") return LogLevel::debug;
    return LogLevel::warn;
  }();
  return level;
}
std::mutex log_mutex;
}  // namespace

void log_message(LogLevel level, const std::string& msg) {
  if (level > current_log_level()) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << "[hardylab:" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

}  // namespace hardylab
