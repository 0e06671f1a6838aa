#include "output.hpp"

#include <cmath>

#include "json.hpp"

namespace ionlag::app {

namespace {

// Scheduling and destination do not change any row.
bool echoed(const std::string& key) { return key != "threads" && key != "out"; }

std::string cell_text(const Cell& c) {
  struct V {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double d) const { return format_double(d); }
    std::string operator()(long l) const { return std::to_string(l); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const { return csv_field(s); }
  };
  return std::visit(V{}, c);
}

nlohmann::ordered_json cell_json(const Cell& c) {
  struct V {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(double d) const {
      if (std::isfinite(d)) return d;
      return nullptr;
    }
    nlohmann::ordered_json operator()(long l) const { return l; }
    nlohmann::ordered_json operator()(bool b) const { return b; }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
  };
  return std::visit(V{}, c);
}

}  // namespace

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

void write_table(std::ostream& os, const Table& t, Format f, const std::string& command, const Settings& effective) {
  if (f == Format::Jsonl) {
    nlohmann::ordered_json head;
    head["command"] = command;
    head["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : effective) {
      if (echoed(k)) head["config"][k] = v;
    }
    head["columns"] = t.columns;
    os << head.dump() << '\n';
    for (const auto& row : t.rows) {
      nlohmann::ordered_json o = nlohmann::ordered_json::object();
      for (std::size_t i = 0; i < row.size(); ++i) o[t.columns[i]] = cell_json(row[i]);
      os << o.dump() << '\n';
    }
    return;
  }
  os << "# ionlag " << command << "\r\n";
  for (const auto& [k, v] : effective) {
    if (echoed(k)) os << "# " << k << " = " << v << "\r\n";
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_field(t.columns[i]);
  os << "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << "\r\n";
  }
}

}  // namespace ionlag::app
