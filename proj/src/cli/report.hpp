#pragma once

// Deterministic report serialization. Numbers use %.17g so that values read
// back bit-identical; non-finite values are written as the strings "nan",
// "inf" and "-inf". The "run" entry (timestamp, wall time) always occupies a
// single line so reports can be compared with that line removed.

#include <iosfwd>
#include <string>

#include "json.hpp"

namespace minrel::cli {

using Document = nlohmann::ordered_json;

std::string format_number(double v);

/// JSON with the top-level "run" entry on one line.
void write_json(const Document& doc, std::ostream& os);
/// "# run: ..." line followed by one "field,value" row per leaf.
void write_flat_csv(const Document& doc, std::ostream& os);
/// "# run: ..." line, a header row and one row per entry of doc["rows"].
void write_table_csv(const Document& doc, const std::vector<std::string>& columns, std::ostream& os);

}  // namespace minrel::cli
