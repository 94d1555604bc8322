#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "forge/corpus.hpp"
#include "forge/ideology.hpp"
#include "forge/oracle.hpp"
#include "forge/semantic_cluster.hpp"

namespace forge {

/// Sizes of a generated corpus. Legislators are spread evenly over the five
/// positions; statements evenly over topics and positions.
struct SynthSpec {
  std::size_t legislators = 50;
  std::size_t sponsorships = 500;
  std::size_t topics = 10;
  std::size_t statements_per_position = 4;  // per topic
  std::size_t embedding_dim = 16;
  std::size_t score_samples = 3;  // per position, test and axis
  std::uint64_t seed = 7;
};

struct SynthCorpus {
  std::map<std::string, Position> truth;  // legislator id -> planted position
  Anchors anchors;
  std::vector<SponsorshipRecord> sponsorships;
  std::vector<Bill> bills;
  std::vector<Statement> statements;  // no position; it comes from the speaker mapping
  std::vector<EmbeddingVector> embeddings;
  ContradictionMatrix cache;  // every within-topic pair
  std::vector<ScoreSample> scores;
  std::vector<VoteRecord> votes;  // one agent, "agent"
  std::vector<Json> qa;           // {"question","answer","position"}
  std::vector<Json> cloze;        // {"sentence","leaning"}
};

SynthCorpus make_synth_corpus(const SynthSpec& spec = {});

/// Writes the corpus under `dir` with fixed file names and returns them keyed
/// by role (sponsorships, bills, statements, embeddings, cache, scores,
/// votes, qa, cloze, truth).
std::map<std::string, std::filesystem::path> write_synth_corpus(const SynthCorpus& corpus,
                                                                const std::filesystem::path& dir);

}  // namespace forge
