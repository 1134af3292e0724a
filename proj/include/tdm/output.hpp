#pragma once

#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tdm/lanczos.hpp"

namespace tdm::cli {

using Cell = std::variant<double, long long, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// What a command produces: the dataset table plus a small summary that is
/// echoed into the provenance header and printed to standard output.
struct Dataset {
  Table table;
  nlohmann::json summary = nlohmann::json::object();
};

/// Shortest text of `x` with 17 significant digits ("%.17g"), locale-free.
std::string format_double(double x);

/// CSV with a single "# {json}" provenance line before the header row.
void write_csv(std::ostream& out, const Table& table, const nlohmann::json& provenance);

/// {"provenance": ..., "columns": [...], "rows": [{...}, ...]}
void write_json(std::ostream& out, const Table& table, const nlohmann::json& provenance);

/// Coordinate-format text ("row col value", 0-based, every stored entry).
void write_coordinate(std::ostream& out, const SparseMatrix& matrix);

/// Writes `text` to `path`, throwing IoError on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace tdm::cli
