#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vss/model.hpp"

namespace vss::pipeline {

// Malformed or inconsistent configuration; the message is the diagnostic shown to the user.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum ExitCode { Stable = 0, Error = 1, Unstable = 2, Indeterminate = 3 };

struct RunOptions {
  unsigned seed = 1;
  int threads = 1;
  std::string tolerance_profile = "default";  // "default" or "strict"
};

// Defaults for every section; user values are merged over them and echoed into the report.
json default_config();
json load_config(const std::string& path);            // throws ConfigError with the parse diagnostic
json merge_config(const json& user, const RunOptions& opt);  // applies defaults and the tolerance profile

struct Output {
  json report;
  int exit_code = Indeterminate;
  std::map<std::string, std::string> csv;  // file name -> contents
};

const std::vector<std::string>& subcommands();

// Runs one subcommand on a merged configuration. Numerical failures are recorded in the report and
// mapped to Indeterminate; configuration problems throw ConfigError.
Output run(const std::string& subcommand, const json& config, const RunOptions& opt);

// Writes report.json and the CSV files into dir (created if needed).
void write_output(const Output& out, const std::string& dir);

}  // namespace vss::pipeline
