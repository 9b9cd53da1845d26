#pragma once
// CLI entry points: execute a configured run into an output directory, check
// a finished run against the documented growth laws, plot series columns,
// and materialize the bundled demo configurations.

#include <string>

#include "vp/config.hpp"

namespace vp {

// Exit codes: 0 success, 1 gating check failures, 2 bad input, 3 aborted run.
int cmd_run(const std::string& config_path, const std::string& out_dir);
int cmd_check(const std::string& run_dir, const std::string& theorems);
int cmd_plot(const std::string& run_dir, const std::string& quantity, const std::string& out);
int cmd_demo(const std::string& name, const std::string& out);

}  // namespace vp
