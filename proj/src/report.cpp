#include "limitflow/report.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace limitflow {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

void Table::add(std::vector<double> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("table row width mismatch");
  rows.push_back(std::move(row));
}

std::vector<double> Table::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] != name) continue;
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
  throw std::out_of_range("no column " + name);
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out += ',';
    out += columns[c];
  }
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out += ',';
      out += format_double(r[c]);
    }
    out += '\n';
  }
  return out;
}

namespace {

json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

json Table::to_json() const {
  json rows_json = json::array();
  for (const auto& r : rows) {
    json obj = json::object();
    for (std::size_t c = 0; c < r.size(); ++c) obj[columns[c]] = number(r[c]);
    rows_json.push_back(obj);
  }
  return rows_json;
}

double Report::value(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw std::out_of_range(name + ": no value " + key);
  return it->second;
}

const Table& Report::table(const std::string& key) const {
  auto it = tables.find(key);
  if (it == tables.end()) throw std::out_of_range(name + ": no table " + key);
  return it->second;
}

const Report& Report::child(const std::string& child_name) const {
  for (const auto& c : children)
    if (c.name == child_name) return c;
  throw std::out_of_range(name + ": no child " + child_name);
}

bool Report::all_pass() const {
  if (!pass) return false;
  for (const auto& c : children)
    if (!c.all_pass()) return false;
  return true;
}

bool Report::children_pass() const {
  for (const auto& c : children)
    if (!c.all_pass()) return false;
  return true;
}

json Report::to_json() const {
  json j = json::object();
  j["name"] = name;
  j["pass"] = pass;
  j["verdict"] = verdict;
  json vals = json::object();
  for (const auto& [k, v] : values) vals[k] = number(v);
  j["values"] = vals;
  j["notes"] = notes;
  json tabs = json::object();
  for (const auto& [k, t] : tables) tabs[k] = t.to_json();
  j["tables"] = tabs;
  json kids = json::array();
  for (const auto& c : children) kids.push_back(c.to_json());
  j["children"] = kids;
  return j;
}

std::map<std::string, std::string> Report::csv_files() const {
  std::map<std::string, std::string> out;
  for (const auto& [k, t] : tables) out[name + "." + k + ".csv"] = t.to_csv();
  for (const auto& c : children)
    for (auto& [k, v] : c.csv_files()) out[name + "__" + k] = std::move(v);
  return out;
}

}  // namespace limitflow
