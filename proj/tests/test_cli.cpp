#include <cstdlib>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "forge/jsonl.hpp"
#include "support.hpp"

namespace forge {
namespace {

using testing::TempDir;

int run(const std::string& args) {
  const std::string cmd = std::string(FORGE_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

TEST(Cli, HelpAndBadArguments) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run("ingest --kind statements"), 2);
}

TEST(Cli, IngestExitCodes) {
  TempDir dir;
  write_text_file(dir / "ok.jsonl", R"({"id":"s1","speaker_id":"L1","topic":"T","text":"x"})" "\n");
  write_text_file(dir / "bad.jsonl", "{\"id\":\n");
  EXPECT_EQ(run("ingest --kind statements --in " + q(dir / "ok.jsonl") + " --out " + q(dir / "o.jsonl")), 0);
  EXPECT_EQ(read_json_lines(dir / "o.jsonl").size(), 1u);
  EXPECT_EQ(run("ingest --kind statements --in " + q(dir / "bad.jsonl") + " --out " + q(dir / "o.jsonl")), 2);
  EXPECT_EQ(run("ingest --kind statements --in " + q(dir / "absent.jsonl") + " --out " + q(dir / "o.jsonl")), 3);
}

TEST(Cli, SynthThenStagedRun) {
  TempDir dir;
  ASSERT_EQ(run("synth --out-dir " + q(dir.path()) + " --legislators 10 --sponsorships 100 --topics 2"), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "config.json"));
  EXPECT_EQ(run("run --config " + q(dir / "config.json") + " --stages ingest,matrix,score"), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "run" / "ideology.jsonl"));
  EXPECT_EQ(run("run --config " + q(dir / "config.json") + " --stages quintuplets"), 2);
  EXPECT_EQ(run("run --config " + q(dir / "config.json") + " --stages bogus"), 2);
}

TEST(Cli, PrecomputeAgainstDeadEndpointIsRuntimeError) {
  TempDir dir;
  write_text_file(dir / "pairs.jsonl",
                  R"({"a_id":"a","a_text":"x","b_id":"b","b_text":"y"})" "\n");
  EXPECT_EQ(run("oracle precompute --pairs " + q(dir / "pairs.jsonl") + " --endpoint http://127.0.0.1:1 --retries 0 --timeout-ms 300 --out " +
                q(dir / "c.cache")),
            3);
}

TEST(Cli, PlanRequiresDatasets) {
  TempDir dir;
  EXPECT_EQ(run("plan --out-dir " + q(dir.path())), 0);
  EXPECT_EQ(run("plan --out-dir " + q(dir.path()) + " --ranking ''"), 2);
}

}  // namespace
}  // namespace forge
