#pragma once

#include <map>
#include <string>

namespace iclv {

// Executes one tool command described by a flat key=value configuration
// (the "command" key selects estimate | simulate | weights | validate; see
// the README for the per-command keys).  Prints progress to stdout, errors
// to stderr, and returns a process exit code:
//   0  success
//   2  configuration problems (missing/unknown keys, bad values)
//   3  input files that do not match their schema
//   4  numerical conditioning failures
//   1  anything else
int run_command(const std::map<std::string, std::string>& cfg);

}  // namespace iclv
