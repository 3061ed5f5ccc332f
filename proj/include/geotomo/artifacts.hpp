#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "geotomo/rates.hpp"

namespace geotomo {

/// Shortest round-trip decimal form of a double ("%.17g").
std::string format_number(double v);

/// CSV with a header row; when json_header is non-empty it goes first as
/// a single "# {...}" line.
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows, const nlohmann::json& json_header = nlohmann::json());

nlohmann::json rate_json(const RateReport& r);
void write_rate_json(const std::string& path, const std::vector<RateReport>& rates);

/// Gnuplot script plotting columns of a CSV against its first column; the
/// script is only written, never run.
void write_gnuplot(const std::string& path, const std::string& csv_name, const std::string& title,
                   const std::vector<std::string>& columns, bool loglog);

void write_text(const std::string& path, const std::string& text);

}  // namespace geotomo
