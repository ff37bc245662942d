#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace minrel::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

bool is_scalar(const Document& v) { return !v.is_object() && !v.is_array(); }

std::string scalar_json(const Document& v) {
  if (v.is_number_float()) {
    const double d = v.get<double>();
    return std::isfinite(d) ? format_number(d) : "\"" + format_number(d) + "\"";
  }
  return v.dump();
}

std::string scalar_text(const Document& v) {
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

std::string compact(const Document& v) {
  if (is_scalar(v)) return scalar_json(v);
  std::string out;
  if (v.is_array()) {
    out = "[";
    bool first = true;
    for (const auto& e : v) {
      out += (first ? "" : ", ") + compact(e);
      first = false;
    }
    return out + "]";
  }
  out = "{";
  bool first = true;
  for (auto it = v.begin(); it != v.end(); ++it) {
    out += (first ? "" : ", ") + Document(it.key()).dump() + ": " + compact(it.value());
    first = false;
  }
  return out + "}";
}

void pretty(const Document& v, int indent, std::ostream& os) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (is_scalar(v)) {
    os << scalar_json(v);
    return;
  }
  if (v.is_array()) {
    bool flat = true;
    for (const auto& e : v) flat = flat && is_scalar(e);
    if (flat || v.empty()) {
      os << compact(v);
      return;
    }
    os << "[\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
      os << pad << "  ";
      pretty(v[i], indent + 2, os);
      os << (i + 1 < v.size() ? ",\n" : "\n");
    }
    os << pad << "]";
    return;
  }
  if (v.empty()) {
    os << "{}";
    return;
  }
  os << "{\n";
  std::size_t i = 0;
  for (auto it = v.begin(); it != v.end(); ++it, ++i) {
    os << pad << "  " << Document(it.key()).dump() << ": ";
    if (indent == 0 && it.key() == "run") {
      os << compact(it.value());
    } else {
      pretty(it.value(), indent + 2, os);
    }
    os << (i + 1 < v.size() ? ",\n" : "\n");
  }
  os << pad << "}";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

void flatten(const Document& v, const std::string& path, std::ostream& os) {
  if (is_scalar(v)) {
    os << csv_field(path) << "," << csv_field(scalar_text(v)) << "\n";
    return;
  }
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], path + "[" + std::to_string(i) + "]", os);
    return;
  }
  for (auto it = v.begin(); it != v.end(); ++it) flatten(it.value(), path.empty() ? it.key() : path + "." + it.key(), os);
}

void run_line(const Document& doc, std::ostream& os) {
  os << "# run:";
  if (doc.contains("run")) {
    for (auto it = doc["run"].begin(); it != doc["run"].end(); ++it) os << " " << it.key() << "=" << scalar_text(it.value());
  }
  os << "\n";
}

}  // namespace

void write_json(const Document& doc, std::ostream& os) {
  pretty(doc, 0, os);
  os << "\n";
}

void write_flat_csv(const Document& doc, std::ostream& os) {
  run_line(doc, os);
  os << "field,value\n";
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() != "run") flatten(it.value(), it.key(), os);
  }
}

void write_table_csv(const Document& doc, const std::vector<std::string>& columns, std::ostream& os) {
  run_line(doc, os);
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() == "run" || it.key() == "rows") continue;
    if (is_scalar(it.value())) os << "# " << it.key() << ": " << scalar_text(it.value()) << "\n";
  }
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << csv_field(columns[c]);
  os << "\n";
  for (const auto& row : doc["rows"]) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      os << (c ? "," : "");
      if (row.contains(columns[c])) os << csv_field(scalar_text(row[columns[c]]));
    }
    os << "\n";
  }
}

}  // namespace minrel::cli
