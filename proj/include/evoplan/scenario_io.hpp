#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "evoplan/scenario.hpp"

namespace evoplan {

/// Malformed scenario file. what() names the file and, when known, the line
/// and field.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, std::size_t line, std::string field, const std::string& message);

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }  ///< 1-based; 0 when not line-specific
  const std::string& field() const noexcept { return field_; }

 private:
  std::string file_;
  std::size_t line_;
  std::string field_;
};

/// Scenario directory layout:
///   meta.json     horizon, change_rate, h_max, phi, operators, off_type, types
///   stations.csv  id,x,y,initial_type,owner,allowed_types   (types ';'-separated)
///   clusters.csv  id,x,y
///   demand.csv    cluster,period,operator,traffic           (every cell present)
///   costs.csv     station,type,cost                         (optional overrides)
/// Coverage and distances are derived on load.
Scenario load_scenario(const std::filesystem::path& dir);

/// Writes the layout above; output is a pure function of the scenario.
void save_scenario(const Scenario& sc, const std::filesystem::path& dir);

/// Type table from JSON text of the form used in meta.json ("types" plus
/// optional "off_type", default "off"). Used for --config.
TypeTable parse_type_table(const std::string& json_text, const std::string& source = "config");

}  // namespace evoplan
