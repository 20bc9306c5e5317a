#include "congruence_kit/report.hpp"

#include "congruence_kit/algebra.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace ck {

const Check& RunReport::at_most(const std::string& name, double value, double threshold) {
  checks.push_back({name, value, threshold, false, value <= threshold});
  return checks.back();
}

const Check& RunReport::at_least(const std::string& name, double value, double threshold) {
  checks.push_back({name, value, threshold, true, value >= threshold});
  return checks.back();
}

const Check& RunReport::flag(const std::string& name, bool ok) {
  checks.push_back({name, ok ? 1.0 : 0.0, 1.0, true, ok});
  return checks.back();
}

void RunReport::skip(const std::string& name, const std::string& reason) { skipped.push_back(name + ": " + reason); }

bool RunReport::pass() const {
  if (!error.empty()) return false;
  for (const Check& c : checks)
    if (!c.pass) return false;
  return true;
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

nlohmann::json RunReport::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config;
  nlohmann::json cs = nlohmann::json::array();
  for (const Check& c : checks) {
    cs.push_back({{"name", c.name},
                  {"value", number(c.value)},
                  {"threshold", c.threshold},
                  {"relation", c.at_least ? ">=" : "<="},
                  {"pass", c.pass}});
  }
  j["checks"] = cs;
  j["metrics"] = metrics;
  j["skipped"] = skipped;
  j["artifacts"] = artifacts;
  if (!error.empty()) j["error"] = error;
  j["pass"] = pass();
  return j;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  row(cells);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size()) throw Error("CsvWriter: row width does not match the header");
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  rows_.push_back(std::move(line));
}

void CsvWriter::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  for (std::size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
  out << '\n';
  for (const std::string& r : rows_) out << r << '\n';
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace ck
