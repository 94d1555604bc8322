#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/cosponsor.hpp"
#include "forge/ideology.hpp"
#include "forge/jsonl.hpp"
#include "forge/oracle.hpp"
#include "forge/quintuplet.hpp"

namespace forge {

inline constexpr std::string_view kForgeVersion = "1.0.0";

inline constexpr std::array<std::string_view, 9> kStages = {
    "ingest", "matrix", "score", "map", "cluster", "quintuplets", "rankset", "emit-training", "eval"};

/// Stages that draw random numbers; each needs an entry in `seeds`.
inline constexpr std::array<std::string_view, 3> kSeededStages = {"map", "quintuplets", "emit-training"};

struct PipelineInputs {
  std::filesystem::path sponsorships;
  std::filesystem::path statements;
  std::filesystem::path embeddings;
  std::filesystem::path bills;
  std::filesystem::path scores;
  std::filesystem::path qa;     // {"question","answer","position"} lines
  std::filesystem::path cloze;  // {"sentence","leaning"} lines
  std::optional<std::filesystem::path> votes;
};

struct PipelineConfig {
  std::filesystem::path out_dir;
  PipelineInputs inputs;
  OracleConfig oracle;
  std::optional<Anchors> anchors;
  std::map<std::string, std::uint64_t> seeds;
  double hac_threshold = 0.7;
  std::size_t k = 5;
  double ratio = 0.8;
  OptimizerConfig optimizer;
  std::vector<std::string> report_formats = {"jsonl"};  // "jsonl", "csv"
};

/// Relative paths in the document resolve against `base_dir`.
PipelineConfig config_from_json(const Json& doc, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);
Json to_json(const PipelineConfig& cfg);

/// Every referenced path nonempty, seeds for every seeded stage, thresholds
/// in range. Throws InvalidArgument.
void validate(const PipelineConfig& cfg);

/// FORGE_ORACLE_ENDPOINT, when set, replaces the oracle endpoint.
void apply_env_overrides(PipelineConfig& cfg);

/// Parses "a,b,c"; unknown names throw InvalidArgument. Order is canonical
/// regardless of the order given.
std::vector<std::string> parse_stage_list(std::string_view text);

struct StageRecord {
  std::string name;
  std::string status;  // "ran" or "cache_hit"
  std::optional<std::uint64_t> seed;
  Json params;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path -> sha256
  std::int64_t wall_clock_ms = 0;
};

struct RunManifest {
  std::string version{kForgeVersion};
  std::string config_digest;
  std::vector<StageRecord> stages;
  std::string started_at;
  std::string finished_at;
};

struct RunOptions {
  bool force = false;  // re-execute even when outputs are current
};

/// Runs `stages` in canonical order and writes `out_dir/manifest.json`. A
/// stage whose inputs and parameters match its last recorded run and whose
/// outputs are unchanged is skipped as a cache hit; an output edited since
/// that run raises DigestMismatch. A stage whose inputs do not exist raises
/// MissingDependency.
RunManifest run_pipeline(const PipelineConfig& cfg, const std::vector<std::string>& stages,
                         const RunOptions& opts = {});

Json to_json(const RunManifest& m);

/// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

/// Scores an agent's votes against the mapped legislators: the agent is
/// folded into the matrix and compared with each position's distribution.
std::vector<AgentComparison> score_agent(const CosponsorMatrix& matrix,
                                         std::span<const Bill> bills,
                                         std::span<const VoteRecord> votes,
                                         const std::string& agent_id,
                                         const std::optional<Anchors>& anchors,
                                         const std::map<std::string, Position>& positions);

Json to_json(const AgentComparison& c, const std::string& agent_id);

}  // namespace forge
