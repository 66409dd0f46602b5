#include "lsaboot/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "lsaboot/error.hpp"
#include "lsaboot/text.hpp"

namespace lsaboot {

namespace {

std::string quote_cell(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(std::int64_t v) { return std::to_string(v); }

}  // namespace

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += quote_cell(cells[i]);
    }
    out += '\n';
  };
  emit(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw ValidationError("csv row width does not match the header");
    emit(row);
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      record.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n') {
      record.push_back(std::move(cell));
      cell.clear();
      records.push_back(std::move(record));
      record.clear();
    } else {
      cell += c;
    }
  }
  if (quoted) throw ValidationError("csv: unterminated quote");
  if (!cell.empty() || !record.empty()) {
    record.push_back(std::move(cell));
    records.push_back(std::move(record));
  }
  if (records.empty()) throw ValidationError("csv: missing header");
  table.header = std::move(records.front());
  table.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
  return table;
}

CsvTable normal_approx_table(const std::vector<NormalApproxRow>& rows) {
  CsvTable t{{"gamma", "n", "c0", "delta_n", "delta_n_scaled", "mean_scaled_error"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({format_double(r.gamma), fmt(r.n), format_double(r.c0), format_double(r.delta_n),
                      format_double(r.delta_n_scaled), format_double(r.mean_scaled_error)});
  }
  return t;
}

CsvTable normal_approx_timing(const std::vector<NormalApproxRow>& rows) {
  CsvTable t{{"gamma", "n", "runtime_seconds"}, {}};
  for (const auto& r : rows) t.rows.push_back({format_double(r.gamma), fmt(r.n), format_double(r.runtime_seconds)});
  return t;
}

CsvTable coverage_table(const std::vector<CoverageRow>& rows) {
  CsvTable t{{"level", "n", "B", "coverage", "binomial_lo", "binomial_hi"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({format_double(r.level), fmt(r.n), fmt(r.b_count), format_double(r.coverage),
                      format_double(r.binomial_lo), format_double(r.binomial_hi)});
  }
  return t;
}

CsvTable coverage_runs_table(const std::vector<CoverageRunRow>& rows) {
  CsvTable t{{"run_id", "n", "B", "level", "radius", "covered"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({fmt(static_cast<std::int64_t>(r.run_id)), fmt(r.n), fmt(r.b_count), format_double(r.level),
                      format_double(r.radius), r.covered ? "1" : "0"});
  }
  return t;
}

CsvTable certify_table(const std::vector<CertifyRow>& rows) {
  CsvTable t{{"gamma", "c0", "n", "schedule_ok", "sample_size_ok", "lhs", "threshold", "minimal_n"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({format_double(r.gamma), format_double(r.c0), fmt(r.n), r.schedule_ok ? "1" : "0",
                      r.sample_size_ok ? "1" : "0", format_double(r.lhs), format_double(r.threshold),
                      fmt(r.minimal_n)});
  }
  return t;
}

std::string render_svg(const LineChart& chart) {
  constexpr double width = 640, height = 420;
  constexpr double left = 70, right = 150, top = 40, bottom = 60;
  constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
  static const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

  auto tx = [&](double x) { return chart.log_x ? std::log10(x) : x; };
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = 0.0, y_hi = -INFINITY;
  for (const auto& s : chart.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (chart.log_x && !(s.x[i] > 0.0)) continue;
      x_lo = std::min(x_lo, tx(s.x[i]));
      x_hi = std::max(x_hi, tx(s.x[i]));
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (!std::isfinite(x_lo)) {
    x_lo = 0.0;
    x_hi = 1.0;
  }
  if (!std::isfinite(y_hi)) y_hi = 1.0;
  if (x_hi - x_lo < 1e-12) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi - y_lo < 1e-12) y_hi = y_lo + 1.0;
  y_hi += 0.05 * (y_hi - y_lo);

  auto px = [&](double x) { return left + (tx(x) - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << fixed(left + plot_w / 2, 1) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
     << escape_xml(chart.title) << "</text>\n"
     << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double y = y_lo + (y_hi - y_lo) * i / 4.0;
    os << "<line x1=\"" << left - 4 << "\" y1=\"" << fixed(py(y), 2) << "\" x2=\"" << left << "\" y2=\""
       << fixed(py(y), 2) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << left - 8 << "\" y=\"" << fixed(py(y) + 4, 2) << "\" text-anchor=\"end\">" << fixed(y, 3)
       << "</text>\n";
  }
  std::vector<double> ticks;
  for (const auto& s : chart.series) ticks.insert(ticks.end(), s.x.begin(), s.x.end());
  std::sort(ticks.begin(), ticks.end());
  ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
  for (double x : ticks) {
    if (chart.log_x && !(x > 0.0)) continue;
    os << "<line x1=\"" << fixed(px(x), 2) << "\" y1=\"" << top + plot_h << "\" x2=\"" << fixed(px(x), 2)
       << "\" y2=\"" << top + plot_h + 4 << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << fixed(px(x), 2) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">"
       << format_double(x) << "</text>\n";
  }
  os << "<text x=\"" << fixed(left + plot_w / 2, 1) << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">"
     << escape_xml(chart.x_label) << (chart.log_x ? " (log scale)" : "") << "</text>\n"
     << "<text transform=\"translate(18 " << fixed(top + plot_h / 2, 1)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(chart.y_label) << "</text>\n";

  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const Series& s = chart.series[k];
    const char* color = palette[k % std::size(palette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (chart.log_x && !(s.x[i] > 0.0)) continue;
      os << (first ? "" : " ") << fixed(px(s.x[i]), 2) << ',' << fixed(py(s.y[i]), 2);
      first = false;
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (chart.log_x && !(s.x[i] > 0.0)) continue;
      os << "<circle cx=\"" << fixed(px(s.x[i]), 2) << "\" cy=\"" << fixed(py(s.y[i]), 2) << "\" r=\"3\" fill=\""
         << color << "\"/>\n";
    }
    const double ly = top + 16 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << left + plot_w + 12 << "\" y1=\"" << fixed(ly, 1) << "\" x2=\"" << left + plot_w + 32
       << "\" y2=\"" << fixed(ly, 1) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << left + plot_w + 38 << "\" y=\"" << fixed(ly + 4, 1) << "\">" << escape_xml(s.name)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::pair<std::string, LineChart>> normal_approx_charts(const std::vector<NormalApproxRow>& rows) {
  std::map<double, Series> raw, scaled;
  for (const auto& r : rows) {
    for (auto* m : {&raw, &scaled}) {
      Series& s = (*m)[r.gamma];
      s.name = "gamma = " + format_double(r.gamma);
      s.x.push_back(static_cast<double>(r.n));
    }
    raw[r.gamma].y.push_back(r.delta_n);
    scaled[r.gamma].y.push_back(r.delta_n_scaled);
  }
  LineChart a{"Kolmogorov distance to the Gaussian limit", "n", "delta_n", {}, true};
  LineChart b{"Rescaled distance", "n", "delta_n * n^(1/4)", {}, true};
  for (auto& [g, s] : raw) a.series.push_back(std::move(s));
  for (auto& [g, s] : scaled) b.series.push_back(std::move(s));
  return {{"delta_n.svg", std::move(a)}, {"delta_n_scaled.svg", std::move(b)}};
}

LineChart coverage_chart(const std::vector<CoverageRow>& rows) {
  std::map<double, Series> by_level;
  for (const auto& r : rows) {
    Series& s = by_level[r.level];
    s.name = "level " + format_double(r.level);
    s.x.push_back(static_cast<double>(r.n));
    s.y.push_back(r.coverage);
  }
  LineChart chart{"Bootstrap coverage", "n", "coverage", {}, true};
  for (auto& [l, s] : by_level) chart.series.push_back(std::move(s));
  return chart;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace lsaboot
