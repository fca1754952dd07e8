#pragma once

#include <string>
#include <vector>

#include "hardylab/hardy.hpp"
#include "hardylab/minimize.hpp"

namespace hardylab {

// Floats are serialized with 17 significant digits so reports are bit-stable
// for a fixed config and seed.
std::string format_double(double v);

// RFC-4180 field quoting (quotes applied only when needed; LF line ends).
std::string csv_field(const std::string& s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string to_string() const;
};

CsvTable sweep_table(const std::string& scenario, const SweepResult& sweep);
CsvTable verify_table(const std::string& scenario, const std::vector<HardyReport>& reports);
CsvTable minimize_table(const std::string& scenario,
                        const std::vector<MinimizationResult>& results);

// Log-x plot of quotient, lower bound, and upper bracket against epsilon as a
// deterministic standalone SVG. Requires >= 2 rows.
std::string sweep_svg(const std::string& scenario, const SweepResult& sweep);

void write_text_file(const std::string& path, const std::string& content);

// Minimal leveled logger driven by the HARDYLAB_LOG environment variable
// (error, warn, info, debug); messages go to stderr.
enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };
void log_message(LogLevel level, const std::string& msg);

}  // namespace hardylab
