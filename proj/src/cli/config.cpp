#include <istream>
#include <string>

#include "cascade/cli.hpp"
#include "cascade/errors.hpp"

namespace cascade::cli {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValues parse_config(std::istream& in) {
  KeyValues kv;
  std::string line;
  while (std::getline(in, line)) {
    std::string body = trim(line);
    if (!body.empty() && body.front() == '#') body = trim(body.substr(1));
    const auto eq = body.find('=');
    if (body.empty() || eq == std::string::npos) continue;
    std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw DomainError("config line without a key: '" + line + "'");
    kv.emplace_back(std::move(key), trim(body.substr(eq + 1)));
  }
  return kv;
}

}  // namespace cascade::cli
