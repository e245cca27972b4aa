// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#include "natalign/cli/app.hpp"

int main(int argc, char** argv) { return natalign::cli::run(argc, argv); }
