#include "geotomo/artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "geotomo/errors.hpp"

namespace geotomo {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows, const nlohmann::json& json_header) {
  std::ostringstream ss;
  if (!json_header.is_null()) ss << "# " << json_header.dump() << "\n";
  for (std::size_t c = 0; c < columns.size(); ++c) ss << (c ? "," : "") << columns[c];
  ss << "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) ss << (c ? "," : "") << format_number(row[c]);
    ss << "\n";
  }
  write_text(path, ss.str());
}

nlohmann::json rate_json(const RateReport& r) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& [tau, v] : r.samples) samples.push_back({tau, v});
  return {{"quantity", r.quantity}, {"samples", samples}, {"slope", r.slope},
          {"band", r.band},         {"target", r.target},  {"slack", r.slack},
          {"monotone", r.monotone}, {"vanishing", r.vanishing}, {"pass", r.pass},
          {"note", r.note}};
}

void write_rate_json(const std::string& path, const std::vector<RateReport>& rates) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rates) arr.push_back(rate_json(r));
  write_text(path, arr.dump(2) + "\n");
}

void write_gnuplot(const std::string& path, const std::string& csv_name, const std::string& title,
                   const std::vector<std::string>& columns, bool loglog) {
  std::ostringstream ss;
  ss << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set title '" << title << "'\n"
     << "set xlabel '" << (columns.empty() ? "x" : columns[0]) << "'\n";
  if (loglog) ss << "set logscale xy\n";
  ss << "set terminal pngcairo size 900,600\n"
     << "set output '" << csv_name << ".png'\n"
     << "plot";
  for (std::size_t c = 1; c < columns.size(); ++c)
    ss << (c > 1 ? "," : "") << " '" << csv_name << "' using 1:" << c + 1 << " with linespoints";
  ss << "\n";
  write_text(path, ss.str());
}

}  // namespace geotomo
