// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "mae4d/cli/cli.hpp"

int main(int argc, char** argv) { return mae4d::cli::cli_main(argc, argv, std::cout, std::cerr); }
