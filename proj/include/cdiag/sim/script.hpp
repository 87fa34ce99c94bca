// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Operator script language. One statement per line (or separated by ';'),
// '#' starts a comment, $1..$9 are replaced by inputs at compile time.
//
//   read <metric> <target>              -> "<device> <metric> <value>" per device
//   find <metric> <op> <value|nominal> [target]
//                                       -> matching device ids, or "none"
//   count <metric> <op> <value|nominal> [target]
//                                       -> number of matching devices
//   echo <text...>
//   wait <seconds>                      advances the simulated clock
//   set_frequency <mhz> [gpu|server|all]   target defaults to all
//   clear_fault <fault-id|device>
//   restart_job <job-id>
//
// <target> is "all", a gpu id, or a server id; ops are < <= > >= == !=.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cdiag/common/error.hpp"
#include "cdiag/sim/cluster.hpp"

namespace cdiag::sim {

enum class Verb { Read, Find, Count, Echo, Wait, SetFrequency, ClearFault, RestartJob };

std::string_view to_string(Verb verb);
bool is_mutating(Verb verb);

struct Statement {
  Verb verb;
  std::vector<std::string> args;
  std::size_t line = 0;
};

struct ScriptProgram {
  std::vector<Statement> statements;
  bool mutating() const;
};

struct ScriptLimits {
  std::size_t max_statements = 256;
  double max_wait_s = 600;  // total simulated time a program may wait
};

/// Throws ParseError (line, column) for unknown verbs, metrics, operators,
/// arity, malformed numbers, or missing inputs.
ScriptProgram compile_script(std::string_view source, std::span<const std::string> inputs = {},
                             const ScriptLimits& limits = {});

enum class ScriptStatus { Ok, Timeout, RuntimeError };

std::string_view to_string(ScriptStatus status);

struct ScriptOutcome {
  ScriptStatus status = ScriptStatus::Ok;
  std::string output;
  std::string error;  // "line N: ..." on runtime errors
  double waited_s = 0;
};

ScriptOutcome run_script(Cluster& cluster, const ScriptProgram& program,
                         const ScriptLimits& limits = {});

}  // namespace cdiag::sim
