// SPDX-License-Identifier: Apache-2.0
#include "acap/cli.hpp"

int main(int argc, char** argv) { return acap::cli::run_command(argc, argv); }
