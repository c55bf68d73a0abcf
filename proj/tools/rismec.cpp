// SPDX-License-Identifier: Apache-2.0
#include "rismec/cli.hpp"

int main(int argc, char** argv) { return rismec::cli::main(argc, argv); }
