/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tgs {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  /// Invalid input data, failed validation, or a configuration problem.
  kExitDomain = 1,
  /// A backend was unreachable, timed out, or answered with a malformed message.
  kExitTransport = 2,
  /// Bad flags or missing arguments.
  kExitUsage = 3,
};

/// Runs one command line. `args[0]` is the program name. Human-readable
/// output goes to `out` (machine-readable with --json), logs and errors to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tgs
