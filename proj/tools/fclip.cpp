// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include "fclip/cli.hpp"

int main(int argc, char** argv) { return fclip::run_cli(argc, argv); }
