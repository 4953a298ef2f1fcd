// SPDX-License-Identifier: Apache-2.0

#include "hapris/cli.hpp"

int main(int argc, char** argv) { return hapris::cli::run(argc, argv); }
