// SPDX-License-Identifier: Apache-2.0
#include "mmadoa/harness.hpp"

int main(int argc, char** argv) { return mmadoa::cli_main(argc, argv); }
