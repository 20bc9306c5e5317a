#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace ck {

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool at_least = false;  // pass iff value >= threshold instead of value <= threshold
  bool pass = false;
};

struct RunReport {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<Check> checks;
  nlohmann::json metrics = nlohmann::json::object();  // reported values without a gate
  std::vector<std::string> skipped;                    // "name: reason"
  std::vector<std::string> artifacts;
  std::string error;                                   // set when the run stopped early

  const Check& at_most(const std::string& name, double value, double threshold);
  const Check& at_least(const std::string& name, double value, double threshold);
  const Check& flag(const std::string& name, bool ok);
  void skip(const std::string& name, const std::string& reason);
  bool pass() const;
  nlohmann::json to_json() const;
};

// Shortest round-trip decimal form, '.' as decimal point; nan and inf spelled out.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);
  std::size_t rows() const { return rows_.size(); }
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace ck
