#pragma once

#include <string>
#include <vector>

namespace abom {

struct CapturedOutput {
    int exit_code = 0;
    std::string out;
};

/// Runs argv (PATH lookup on argv[0]) with inherited standard streams and
/// returns its exit status; a signal death maps to 128 + signal and a failed
/// exec to 127.
int run_process(const std::vector<std::string>& argv);

/// Same, but collects standard output. Standard error is inherited unless
/// `quiet_stderr` routes it to /dev/null.
CapturedOutput run_capture(const std::vector<std::string>& argv, bool quiet_stderr = false);

}  // namespace abom
