#include <cstdlib>
#include <fstream>

#include <gtest/gtest.h>

#include "forge/error.hpp"
#include "forge/pipeline.hpp"
#include "forge/synth.hpp"
#include "support.hpp"

namespace forge {
namespace {

using testing::TempDir;

PipelineConfig synth_config(const TempDir& dir, std::size_t legislators = 25, std::size_t topics = 4) {
  SynthSpec spec;
  spec.legislators = legislators;
  spec.sponsorships = legislators * 10;
  spec.topics = topics;
  const SynthCorpus corpus = make_synth_corpus(spec);
  const auto files = write_synth_corpus(corpus, dir / "data");
  PipelineConfig cfg;
  cfg.out_dir = dir / "run";
  cfg.inputs = {files.at("sponsorships"), files.at("statements"), files.at("embeddings"),
                files.at("bills"),        files.at("scores"),     files.at("qa"),
                files.at("cloze"),        files.at("votes")};
  cfg.oracle.cache_path = files.at("cache");
  cfg.anchors = corpus.anchors;
  cfg.seeds = {{"map", 1}, {"quintuplets", 2}, {"emit-training", 3}};
  return cfg;
}

std::vector<std::string> all_stages() { return {kStages.begin(), kStages.end()}; }

TEST(Synth, CorpusShape) {
  const SynthCorpus c = make_synth_corpus();
  EXPECT_EQ(c.truth.size(), 50u);
  EXPECT_EQ(c.sponsorships.size(), 500u);
  EXPECT_EQ(c.statements.size(), 200u);
  EXPECT_EQ(c.embeddings.size(), 200u);
  EXPECT_EQ(c.cache.pair_count(), 10u * (20u * 19u / 2u));
  EXPECT_FORGE_ERROR(make_synth_corpus({.legislators = 12}), ErrorCode::InvalidArgument);
}

TEST(StageList, CanonicalOrderAndUnknownNames) {
  EXPECT_EQ(parse_stage_list("eval,ingest,map"), (std::vector<std::string>{"ingest", "map", "eval"}));
  EXPECT_TRUE(parse_stage_list("").empty());
  EXPECT_FORGE_ERROR(parse_stage_list("ingest,bogus"), ErrorCode::InvalidArgument);
}

TEST(Config, JsonRoundTripAndRelativePaths) {
  const Json doc = {{"out_dir", "run"},
                    {"inputs",
                     {{"sponsorships", "sp.jsonl"}, {"statements", "st.jsonl"}, {"embeddings", "e.jsonl"},
                      {"bills", "b.jsonl"}, {"scores", "sc.jsonl"}, {"qa", "qa.jsonl"}, {"cloze", "c.jsonl"}}},
                    {"oracle", {{"backend", "cache_file"}, {"cache_path", "c.cache"}}},
                    {"seeds", {{"map", 1}, {"quintuplets", 2}, {"emit-training", 3}}},
                    {"thresholds", {{"hac", 0.6}}}};
  const PipelineConfig cfg = config_from_json(doc, "/base");
  EXPECT_EQ(cfg.out_dir, std::filesystem::path("/base/run"));
  EXPECT_EQ(cfg.inputs.qa, std::filesystem::path("/base/qa.jsonl"));
  EXPECT_EQ(cfg.hac_threshold, 0.6);
  EXPECT_FALSE(cfg.inputs.votes);
  EXPECT_NO_THROW(validate(cfg));
  const PipelineConfig again = config_from_json(to_json(cfg), "/elsewhere");
  EXPECT_EQ(to_json(again), to_json(cfg));

  Json no_seed = doc;
  no_seed["seeds"].erase("map");
  EXPECT_FORGE_ERROR(validate(config_from_json(no_seed, "/base")), ErrorCode::InvalidArgument);
  Json unknown = doc;
  unknown["extra"] = 1;
  EXPECT_FORGE_ERROR(config_from_json(unknown, "/base"), ErrorCode::SchemaViolation);
}

TEST(Config, EnvOverrideOnlyForHttp) {
  TempDir dir;
  PipelineConfig cfg = synth_config(dir, 10, 1);
  ::setenv("FORGE_ORACLE_ENDPOINT", "http://127.0.0.1:9", 1);
  apply_env_overrides(cfg);
  EXPECT_FALSE(cfg.oracle.endpoint);
  cfg.oracle.backend = OracleBackend::Http;
  apply_env_overrides(cfg);
  EXPECT_EQ(cfg.oracle.endpoint, "http://127.0.0.1:9");
  ::unsetenv("FORGE_ORACLE_ENDPOINT");
}

TEST(Run, EmptyStageListWritesManifestOnly) {
  TempDir dir;
  const PipelineConfig cfg = synth_config(dir, 10, 1);
  const RunManifest m = run_pipeline(cfg, {});
  EXPECT_TRUE(m.stages.empty());
  EXPECT_TRUE(std::filesystem::exists(cfg.out_dir / "manifest.json"));
}

TEST(Run, MissingUpstreamOutputs) {
  TempDir dir;
  const PipelineConfig cfg = synth_config(dir, 10, 1);
  EXPECT_FORGE_ERROR(run_pipeline(cfg, {"quintuplets"}), ErrorCode::MissingDependency);
  PipelineConfig missing_input = cfg;
  missing_input.inputs.bills = dir / "nope.jsonl";
  EXPECT_FORGE_ERROR(run_pipeline(missing_input, {"ingest"}), ErrorCode::MissingDependency);
}

TEST(Run, FullPipelineThenCacheHitsThenTamper) {
  TempDir dir;
  const PipelineConfig cfg = synth_config(dir);
  const RunManifest first = run_pipeline(cfg, all_stages());
  ASSERT_EQ(first.stages.size(), kStages.size());
  for (const auto& s : first.stages) EXPECT_EQ(s.status, "ran") << s.name;

  for (const char* f : {"matrix.csv", "ideology.jsonl", "mapping.jsonl", "clusters.jsonl",
                        "quintuplets.jsonl", "ranked.jsonl", "training/qa.jsonl",
                        "training/plan.json", "eval/rank_agreement.jsonl", "eval/positioning.jsonl",
                        "eval/voting.jsonl"}) {
    EXPECT_TRUE(std::filesystem::exists(cfg.out_dir / f)) << f;
  }
  const Json manifest = Json::parse(read_text_file(cfg.out_dir / "manifest.json"));
  EXPECT_EQ(manifest["version"], std::string(kForgeVersion));
  EXPECT_EQ(manifest["stages"].size(), kStages.size());
  EXPECT_EQ(manifest["stages"][3]["seed"], 1);
  for (const auto& [path, digest] : first.stages[1].outputs) {
    EXPECT_EQ(digest, file_sha256(path));
  }

  const RunManifest second = run_pipeline(cfg, all_stages());
  for (const auto& s : second.stages) EXPECT_EQ(s.status, "cache_hit") << s.name;

  const RunManifest forced = run_pipeline(cfg, {"matrix"}, {.force = true});
  EXPECT_EQ(forced.stages[0].status, "ran");

  {
    std::ofstream out(cfg.out_dir / "ideology.jsonl", std::ios::app);
    out << "{\"legislator_id\":\"X\",\"raw\":0,\"normalized\":0}\n";
  }
  EXPECT_FORGE_ERROR(run_pipeline(cfg, {"score"}), ErrorCode::DigestMismatch);
}

TEST(Run, SeedChangeReexecutesOnlySeededStage) {
  TempDir dir;
  PipelineConfig cfg = synth_config(dir, 10, 2);
  run_pipeline(cfg, {"ingest", "matrix", "score", "map"});
  cfg.seeds["map"] = 99;
  const RunManifest m = run_pipeline(cfg, {"ingest", "matrix", "score", "map"});
  EXPECT_EQ(m.stages[0].status, "cache_hit");
  EXPECT_EQ(m.stages[2].status, "cache_hit");
  EXPECT_EQ(m.stages[3].status, "ran");
}

TEST(Digest, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace forge
