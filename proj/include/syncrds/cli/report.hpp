#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "syncrds/cli/config.hpp"

namespace syncrds::cli {

/// Column-oriented result table. Cells are numbers, strings, or null.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;

  void add(std::vector<Json> row);
};

/// Doubles with 17 significant digits, integers verbatim, null as empty.
std::string format_cell(const Json& v);
std::string to_csv(const Table& t);
Json rows_as_json(const Table& t);

/// Line chart of y_column against x_column, one series; empty when the
/// table has fewer than two finite points.
std::string to_svg(const Table& t, const std::string& x_column, const std::string& y_column,
                   const std::string& title);

std::string sha256_hex(const std::string& bytes);

/// Writes `bytes` to dir/name and returns the manifest entry for it.
Json write_artifact(const std::filesystem::path& dir, const std::string& name,
                    const std::string& bytes);

/// Stable, indented JSON text with a trailing newline.
std::string dump_json(const Json& j);

}  // namespace syncrds::cli
