/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <iostream>
#include <string>
#include <vector>

#include "tgs/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return tgs::run_cli(args, std::cout, std::cerr);
}
