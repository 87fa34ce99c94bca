// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "cdiag/common/error.hpp"
#include "cdiag/sim/script.hpp"

namespace cdiag::sim {
namespace {

ClusterConfig quiet() {
  ClusterConfig c;
  c.noise_amplitude = 0;
  return c;
}

ScriptOutcome run(Cluster& c, std::string_view src, std::vector<std::string> inputs = {}) {
  return run_script(c, compile_script(src, inputs));
}

TEST(ScriptCompile, ReportsLineAndColumn) {
  try {
    compile_script("read freq_mhz all\n  frobnicate gpu-1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 3u);
    EXPECT_NE(e.message().find("frobnicate"), std::string::npos);
  }
  try {
    compile_script("find freq_mhz => 3");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.column(), 15u);
  }
  EXPECT_THROW(compile_script("read temperature all"), ParseError);
  EXPECT_THROW(compile_script("read freq_mhz"), ParseError);
  EXPECT_THROW(compile_script("wait soon"), ParseError);
  EXPECT_THROW(compile_script("wait -3"), ParseError);
  EXPECT_THROW(compile_script("set_frequency fast gpu-1"), ParseError);
  EXPECT_THROW(compile_script("read freq_mhz $2", std::vector<std::string>{"gpu-1"}), ParseError);
}

TEST(ScriptCompile, StatementLimit) {
  std::string src;
  for (int i = 0; i < 5; ++i) src += "echo hi\n";
  ScriptLimits lim;
  lim.max_statements = 4;
  EXPECT_THROW(compile_script(src, {}, lim), ParseError);
  lim.max_statements = 5;
  EXPECT_EQ(compile_script(src, {}, lim).statements.size(), 5u);
}

TEST(ScriptCompile, CommentsSeparatorsAndInputs) {
  const std::vector<std::string> in = {"gpu-3", "1000"};
  const auto p = compile_script("# header\nread freq_mhz $1 ; set_frequency $2 $1  # tail\n\n", in);
  ASSERT_EQ(p.statements.size(), 2u);
  EXPECT_EQ(p.statements[0].args, (std::vector<std::string>{"freq_mhz", "gpu-3"}));
  EXPECT_EQ(p.statements[1].verb, Verb::SetFrequency);
  EXPECT_EQ(p.statements[1].line, 2u);
  EXPECT_TRUE(p.mutating());
  EXPECT_FALSE(compile_script("read freq_mhz all").mutating());
}

TEST(ScriptRun, ReadFindCount) {
  Cluster c(uniform_topology(1, 4), quiet());
  c.inject_fault({FaultKind::GpuFrequencyThrottle, "gpu-2", 200, 0});
  c.inject_fault({FaultKind::LinkDegrade, "node-0", 0.5, 0});
  EXPECT_EQ(run(c, "read freq_mhz gpu-2").output, "gpu-2 freq_mhz 200\n");
  EXPECT_EQ(run(c, "find freq_mhz < nominal").output, "gpu-2\n");
  EXPECT_EQ(run(c, "find freq_mhz < 100").output, "none\n");
  EXPECT_EQ(run(c, "count freq_mhz == 1410").output, "3\n");
  EXPECT_EQ(run(c, "read link_bw gpu-1").output, "node-0 link_bw 50000000000\n");
  EXPECT_EQ(run(c, "find link_bw < nominal all").output, "node-0\n");
  EXPECT_EQ(run(c, "echo checked $1", {"gpu-2"}).output, "checked gpu-2\n");
}

TEST(ScriptRun, MutationsAndRestart) {
  Cluster c(uniform_topology(1, 4), quiet());
  const auto fid = c.inject_fault({FaultKind::GpuFrequencyThrottle, "gpu-1", 300, 0});
  auto out = run(c, "set_frequency 1410 gpu-1\nread freq_mhz gpu-1");
  EXPECT_EQ(out.status, ScriptStatus::Ok);
  EXPECT_EQ(out.output, "set gpu-1 freq_mhz 1410\ngpu-1 freq_mhz 1410\n");
  EXPECT_EQ(run(c, "clear_fault " + fid).output, "cleared " + fid + "\n");
  EXPECT_EQ(run(c, "set_frequency 1200").output,
            "set gpu-0 freq_mhz 1200\nset gpu-1 freq_mhz 1200\nset gpu-2 freq_mhz 1200\n"
            "set gpu-3 freq_mhz 1200\n");
  run(c, "set_frequency 1410");

  c.inject_fault({FaultKind::EccBurst, "gpu-0", 4, 0});
  EXPECT_EQ(run(c, "clear_fault gpu-0").output, "cleared 1 faults on gpu-0\n");

  perf::WorkloadMix mix({{perf::TaskDemand::only(perf::ResourceKind::Compute, 312e12), 1.0}});
  c.run_job({"train", mix, {"gpu-0"}, 3, std::nullopt});
  const double t = c.now();
  out = run(c, "restart_job train");
  EXPECT_EQ(out.output, "job train restarted: 3 iterations, mean rate 1 per s\n");
  EXPECT_DOUBLE_EQ(c.now(), t + 3);
}

TEST(ScriptRun, WaitBudgetTimesOut) {
  Cluster c(uniform_topology(1, 1), quiet());
  auto out = run(c, "wait 100\necho mid\nwait 600\necho never");
  EXPECT_EQ(out.status, ScriptStatus::Timeout);
  EXPECT_EQ(out.output, "mid\n");
  EXPECT_EQ(out.error, "line 3: wait budget of 600 s exceeded");
  EXPECT_EQ(c.now(), 100);
}

TEST(ScriptRun, RuntimeErrorsStopExecution) {
  Cluster c(uniform_topology(1, 1), quiet());
  auto out = run(c, "echo a\nread freq_mhz gpu-9\necho b");
  EXPECT_EQ(out.status, ScriptStatus::RuntimeError);
  EXPECT_EQ(out.output, "a\n");
  EXPECT_EQ(out.error.rfind("line 2: ", 0), 0u) << out.error;
  EXPECT_EQ(run(c, "set_frequency 2000 gpu-0").status, ScriptStatus::RuntimeError);
  EXPECT_EQ(run(c, "restart_job nope").status, ScriptStatus::RuntimeError);
  EXPECT_EQ(run(c, "clear_fault f-12").status, ScriptStatus::RuntimeError);
}

}  // namespace
}  // namespace cdiag::sim
