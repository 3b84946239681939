#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "manin/config.hpp"

namespace manin {

enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitBudget = 3, kExitNumeric = 4 };

struct Artifact {
  std::string name;     // file name inside the output directory
  std::string content;
};

struct RunResult {
  std::string primary;  // written to stdout: JSON, or CSV for count
  std::string summary;  // human-readable lines, written to the log stream
  std::vector<Artifact> files;
};

// Runs one validated experiment. Throws the library errors.
RunResult execute(const ExperimentConfig& c);

// execute + error mapping + artifact files; returns the exit code.
int run(const ExperimentConfig& c, std::ostream& out, std::ostream& log);

// Full command line: positional command (and "model describe <id>"), --config FILE, one flag per
// config key. Flags override the file.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& log);

}  // namespace manin
