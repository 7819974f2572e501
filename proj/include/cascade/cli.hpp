#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cascade::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInvalidInput = 2,
  kAboveThreshold = 3,
  kUnconverged = 4,
};

inline constexpr const char* kSchema = "cascade-output/1";
inline constexpr const char* kOutputDirEnv = "CASCADE_OUTPUT_DIR";

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Flat key=value config text. Blank lines are skipped; a leading '#' is
/// stripped so an emitted provenance header reads back as a config file.
/// Lines without '=' are ignored.
KeyValues parse_config(std::istream& in);

/// One output cell: a number (printed with 12 significant digits) or a token.
using Cell = std::variant<double, std::string>;

/// Tabular command output with its provenance header.
struct Table {
  KeyValues provenance;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void render_csv(std::ostream& os) const;
  void render_json(std::ostream& os) const;
};

/// Runs one command line (args excludes the program name). Writes results to
/// `out` (or the --output file) and diagnostics to `err`; returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cascade::cli
