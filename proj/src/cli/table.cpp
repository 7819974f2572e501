#include <cmath>
#include <regex>
#include <string>
#include <ostream>

#include <json.hpp>

#include "cascade/cli.hpp"
#include "cascade/format.hpp"

namespace cascade::cli {
namespace {

// Finite numbers travel through the document as marked strings and are
// unquoted after dumping, so JSON shows exactly the CSV digits.
constexpr char kNumberMark = '\x01';

nlohmann::ordered_json to_json(const Cell& cell) {
  if (const double* x = std::get_if<double>(&cell)) {
    if (!std::isfinite(*x)) return format_number(*x);
    return kNumberMark + format_number(*x);
  }
  return std::get<std::string>(cell);
}

std::string unquote_numbers(const std::string& text) {
  static const std::regex marked(R"re("\\u0001([^"]*)")re");
  return std::regex_replace(text, marked, "$1");
}

}  // namespace

void Table::render_csv(std::ostream& os) const {
  for (const auto& [k, v] : provenance) os << "# " << k << '=' << v << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      if (const double* x = std::get_if<double>(&row[i])) {
        os << format_number(*x);
      } else {
        os << std::get<std::string>(row[i]);
      }
    }
    os << '\n';
  }
}

void Table::render_json(std::ostream& os) const {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json prov = nlohmann::ordered_json::object();
  for (const auto& [k, v] : provenance) {
    if (!prov.contains(k)) {
      prov[k] = v;
    } else {
      if (!prov[k].is_array()) prov[k] = nlohmann::ordered_json::array({prov[k]});
      prov[k].push_back(v);
    }
  }
  doc["provenance"] = prov;
  doc["columns"] = columns;
  nlohmann::ordered_json rows_json = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size() && i < columns.size(); ++i) r[columns[i]] = to_json(row[i]);
    rows_json.push_back(std::move(r));
  }
  doc["rows"] = rows_json;
  os << unquote_numbers(doc.dump(2)) << '\n';
}

}  // namespace cascade::cli
