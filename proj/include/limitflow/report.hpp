#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace limitflow {

using json = nlohmann::json;

// A named numeric table; exported as CSV with one row per entry.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
  std::vector<double> column(const std::string& name) const;
  std::string to_csv() const;
  json to_json() const;
};

// Generic diagnostic report: pass flag, verdict text, scalar values, tables,
// notes and nested sub-reports. Serialization is deterministic.
struct Report {
  std::string name;
  bool pass = false;
  std::string verdict;
  std::map<std::string, double> values;
  std::map<std::string, std::string> notes;
  std::map<std::string, Table> tables;
  std::vector<Report> children;

  double value(const std::string& key) const;
  const Table& table(const std::string& key) const;
  const Report& child(const std::string& child_name) const;
  bool all_pass() const;
  bool children_pass() const;

  json to_json() const;
  // All tables of this report and its children, keyed by a path-like name.
  std::map<std::string, std::string> csv_files() const;
};

std::string format_double(double v);
std::string fnv1a_hex(const std::string& bytes);

}  // namespace limitflow
