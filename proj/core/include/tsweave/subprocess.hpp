#pragma once

#include <chrono>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsweave {

// The program could not be started at all (missing executable, bad working
// directory). Distinct from the program running and exiting nonzero.
class SpawnError : public std::runtime_error {
  public:
    explicit SpawnError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ProcessResult {
    int exitCode = -1;
    bool timedOut = false;
    std::string output;
    std::string error;
};

// Runs argv[0] with the given arguments, capturing stdout and stderr
// separately. A zero timeout means wait forever. On timeout the process is
// killed and the partial output kept.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::filesystem::path& workingDir,
                          std::chrono::seconds timeout = std::chrono::seconds(0));

}  // namespace tsweave
