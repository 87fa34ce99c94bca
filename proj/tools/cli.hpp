// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cdiag::cli {

/// Exit codes: 0 success, 1 the run finished without the expected result
/// (incomplete benchmark, drill without a verdict), 2 usage or startup error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cdiag::cli
