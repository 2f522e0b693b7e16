//
// rigid-embed - Copyright 2026 The rigid-embed Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "rse/cli.hpp"

int main(int argc, char **argv) {
  return rse::cli::run(argc, argv);
}
