#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lsaboot/experiment.hpp"

namespace lsaboot {

/// Header plus string cells; numbers are formatted before they get here.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

CsvTable normal_approx_table(const std::vector<NormalApproxRow>& rows);
CsvTable normal_approx_timing(const std::vector<NormalApproxRow>& rows);
CsvTable coverage_table(const std::vector<CoverageRow>& rows);
CsvTable coverage_runs_table(const std::vector<CoverageRunRow>& rows);
CsvTable certify_table(const std::vector<CertifyRow>& rows);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  bool log_x = true;
};

/// Standalone SVG; the output is a pure function of the chart.
std::string render_svg(const LineChart& chart);

/// delta_n and delta_n * n^{1/4} against n, one series per gamma.
std::vector<std::pair<std::string, LineChart>> normal_approx_charts(const std::vector<NormalApproxRow>& rows);
LineChart coverage_chart(const std::vector<CoverageRow>& rows);

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace lsaboot
