#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "forge/jsonl.hpp"
#include "forge/position.hpp"

namespace forge {

struct Statement {
  std::string id;
  std::string speaker_id;
  std::string topic;
  std::string text;
  std::optional<Position> position;

  bool operator==(const Statement&) const = default;
};

struct Bill {
  std::string id;
  std::string title;
  std::string text;
  std::string policy_area;
  std::vector<std::string> legislative_subjects;
  std::string sponsor_id;
  std::string sponsor_party;

  bool operator==(const Bill&) const = default;
};

/// One co-sponsorship. A row with cosponsor_id == sponsor_id records that the
/// legislator introduced the bill.
struct SponsorshipRecord {
  std::string cosponsor_id;
  std::string sponsor_id;
  std::string bill_id;

  bool is_introduction() const { return cosponsor_id == sponsor_id; }
  bool operator==(const SponsorshipRecord&) const = default;
};

enum class VoteDecision { Cosponsor, Decline };

struct VoteRecord {
  std::string agent_id;
  std::string bill_id;
  VoteDecision decision = VoteDecision::Decline;

  bool operator==(const VoteRecord&) const = default;
};

enum class PositioningTest { PComp, PCoord, Nolan, WSPQ };
enum class Axis { Economic, Social };

struct ScoreSample {
  PositioningTest test_name = PositioningTest::PComp;
  Axis axis = Axis::Economic;
  Position position = Position::C;
  std::string model_tag;
  double value = 0.0;

  bool operator==(const ScoreSample&) const = default;
};

std::string_view to_string(PositioningTest t) noexcept;
std::string_view to_string(Axis a) noexcept;
std::string_view to_string(VoteDecision d) noexcept;

/// Inclusive value range per positioning test.
struct TestRanges {
  std::map<PositioningTest, std::pair<double, double>> bounds = {
      {PositioningTest::PComp, {-10.0, 10.0}},
      {PositioningTest::PCoord, {-100.0, 100.0}},
      {PositioningTest::Nolan, {-100.0, 100.0}},
      {PositioningTest::WSPQ, {-100.0, 100.0}},
  };
};

enum class RecordKind { Statements, Bills, Sponsorships, Votes, Scores };

std::optional<RecordKind> parse_record_kind(std::string_view text) noexcept;

// JSON codecs. Field order on output is fixed; unknown fields on input are
// rejected. `line_no` is used for diagnostics only.
Json to_json(const Statement& s);
Json to_json(const Bill& b);
Json to_json(const SponsorshipRecord& r);
Json to_json(const VoteRecord& v);
Json to_json(const ScoreSample& s);

Statement statement_from_json(const Json& obj, std::size_t line_no = 0);
Bill bill_from_json(const Json& obj, std::size_t line_no = 0);
SponsorshipRecord sponsorship_from_json(const Json& obj, std::size_t line_no = 0);
VoteRecord vote_from_json(const Json& obj, std::size_t line_no = 0);
ScoreSample score_from_json(const Json& obj, std::size_t line_no = 0,
                            const TestRanges& ranges = {});

std::vector<Statement> load_statements(const std::filesystem::path& path);
std::vector<Bill> load_bills(const std::filesystem::path& path);
std::vector<SponsorshipRecord> load_sponsorships(const std::filesystem::path& path);
std::vector<VoteRecord> load_votes(const std::filesystem::path& path);
std::vector<ScoreSample> load_scores(const std::filesystem::path& path,
                                     const TestRanges& ranges = {});

template <typename Record>
void write_jsonl(std::span<const Record> records, const std::filesystem::path& path) {
  std::vector<Json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json(r));
  write_json_lines(path, lines);
}

template <typename Record>
void write_jsonl(const std::vector<Record>& records, const std::filesystem::path& path) {
  write_jsonl(std::span<const Record>(records), path);
}

/// Validates and normalizes a file of the given kind, returning its records
/// re-encoded in canonical field order.
std::vector<Json> ingest(RecordKind kind, const std::filesystem::path& path);

// Sampling. Both operate on per-item stratum keys and return indices into the
// input, in ascending (input) order.

/// Picks `target` items so every stratum keeps its share, rounded by largest
/// remainder (ties go to the lexicographically smaller key).
std::vector<std::size_t> stratified_sample_indices(std::span<const std::string> keys,
                                                   std::size_t target, std::uint64_t seed);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;
};

/// Per stratum, round(ratio * size) items go to train and the rest to eval.
SplitIndices split_indices(std::span<const std::string> keys, double ratio, std::uint64_t seed);

template <typename T, typename KeyFn>
std::vector<T> stratified_sample(std::span<const T> items, std::size_t target, KeyFn&& key,
                                 std::uint64_t seed) {
  std::vector<std::string> keys;
  keys.reserve(items.size());
  for (const auto& item : items) keys.emplace_back(key(item));
  std::vector<T> out;
  for (std::size_t i : stratified_sample_indices(keys, target, seed)) out.push_back(items[i]);
  return out;
}

template <typename T, typename KeyFn>
std::pair<std::vector<T>, std::vector<T>> split_train_eval(std::span<const T> items, double ratio,
                                                           KeyFn&& key, std::uint64_t seed) {
  std::vector<std::string> keys;
  keys.reserve(items.size());
  for (const auto& item : items) keys.emplace_back(key(item));
  const SplitIndices idx = split_indices(keys, ratio, seed);
  std::pair<std::vector<T>, std::vector<T>> out;
  for (std::size_t i : idx.train) out.first.push_back(items[i]);
  for (std::size_t i : idx.eval) out.second.push_back(items[i]);
  return out;
}

/// Stratum key of a JSON record: the string value of `field`, or "" if absent.
std::string json_field_key(const Json& obj, std::string_view field);

}  // namespace forge
