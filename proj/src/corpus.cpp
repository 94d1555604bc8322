#include "forge/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

#include "forge/error.hpp"

namespace forge {
namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string nonblank(const FieldReader& r, std::string_view field) {
  std::string v = r.string(field);
  if (blank(v)) r.fail(field, "empty");
  return v;
}

std::optional<PositioningTest> parse_test(std::string_view s) {
  if (s == "PComp") return PositioningTest::PComp;
  if (s == "PCoord") return PositioningTest::PCoord;
  if (s == "Nolan") return PositioningTest::Nolan;
  if (s == "WSPQ") return PositioningTest::WSPQ;
  return std::nullopt;
}

template <typename Record, typename Decode, typename Key>
std::vector<Record> load_unique(const std::filesystem::path& path, Decode decode, Key key) {
  std::vector<Record> out;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  for (const Json& obj : read_json_lines(path)) {
    ++line_no;
    Record rec = decode(obj, line_no);
    if constexpr (!std::is_same_v<Key, std::nullptr_t>) {
      std::string k = key(rec);
      if (!seen.insert(k).second) throw LineError(ErrorCode::DuplicateId, line_no, k);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

std::string_view to_string(PositioningTest t) noexcept {
  switch (t) {
    case PositioningTest::PComp: return "PComp";
    case PositioningTest::PCoord: return "PCoord";
    case PositioningTest::Nolan: return "Nolan";
    case PositioningTest::WSPQ: return "WSPQ";
  }
  return "?";
}

std::string_view to_string(Axis a) noexcept {
  return a == Axis::Economic ? "Economic" : "Social";
}

std::string_view to_string(VoteDecision d) noexcept {
  return d == VoteDecision::Cosponsor ? "COSPONSOR" : "DECLINE";
}

std::optional<RecordKind> parse_record_kind(std::string_view text) noexcept {
  if (text == "statements") return RecordKind::Statements;
  if (text == "bills") return RecordKind::Bills;
  if (text == "sponsorships") return RecordKind::Sponsorships;
  if (text == "votes") return RecordKind::Votes;
  if (text == "scores") return RecordKind::Scores;
  return std::nullopt;
}

Json to_json(const Statement& s) {
  Json j;
  j["id"] = s.id;
  j["speaker_id"] = s.speaker_id;
  j["topic"] = s.topic;
  j["text"] = s.text;
  if (s.position) j["position"] = std::string(to_string(*s.position));
  return j;
}

Json to_json(const Bill& b) {
  Json j;
  j["id"] = b.id;
  j["title"] = b.title;
  j["text"] = b.text;
  j["policy_area"] = b.policy_area;
  j["legislative_subjects"] = b.legislative_subjects;
  j["sponsor_id"] = b.sponsor_id;
  j["sponsor_party"] = b.sponsor_party;
  return j;
}

Json to_json(const SponsorshipRecord& r) {
  Json j;
  j["cosponsor_id"] = r.cosponsor_id;
  j["sponsor_id"] = r.sponsor_id;
  j["bill_id"] = r.bill_id;
  return j;
}

Json to_json(const VoteRecord& v) {
  Json j;
  j["agent_id"] = v.agent_id;
  j["bill_id"] = v.bill_id;
  j["decision"] = std::string(to_string(v.decision));
  return j;
}

Json to_json(const ScoreSample& s) {
  Json j;
  j["test_name"] = std::string(to_string(s.test_name));
  j["axis"] = std::string(to_string(s.axis));
  j["position"] = std::string(to_string(s.position));
  j["model_tag"] = s.model_tag;
  j["value"] = s.value;
  return j;
}

Statement statement_from_json(const Json& obj, std::size_t line_no) {
  FieldReader r(obj, line_no);
  r.only({"id", "speaker_id", "topic", "text", "position"});
  Statement s;
  s.id = nonblank(r, "id");
  s.speaker_id = r.string("speaker_id");
  s.topic = r.string("topic");
  s.text = nonblank(r, "text");
  if (auto pos = r.optional_string("position")) {
    s.position = parse_position(*pos);
    if (!s.position) r.fail("position", "unknown position label");
  }
  return s;
}

Bill bill_from_json(const Json& obj, std::size_t line_no) {
  FieldReader r(obj, line_no);
  r.only({"id", "title", "text", "policy_area", "legislative_subjects", "sponsor_id",
          "sponsor_party"});
  Bill b;
  b.id = nonblank(r, "id");
  b.title = r.string("title");
  b.text = r.string("text");
  b.policy_area = nonblank(r, "policy_area");
  b.legislative_subjects = r.string_list("legislative_subjects");
  b.sponsor_id = nonblank(r, "sponsor_id");
  b.sponsor_party = r.string("sponsor_party");
  return b;
}

SponsorshipRecord sponsorship_from_json(const Json& obj, std::size_t line_no) {
  FieldReader r(obj, line_no);
  r.only({"cosponsor_id", "sponsor_id", "bill_id"});
  return {nonblank(r, "cosponsor_id"), nonblank(r, "sponsor_id"), nonblank(r, "bill_id")};
}

VoteRecord vote_from_json(const Json& obj, std::size_t line_no) {
  FieldReader r(obj, line_no);
  r.only({"agent_id", "bill_id", "decision"});
  VoteRecord v;
  v.agent_id = nonblank(r, "agent_id");
  v.bill_id = nonblank(r, "bill_id");
  const std::string d = r.string("decision");
  if (d == "COSPONSOR") {
    v.decision = VoteDecision::Cosponsor;
  } else if (d == "DECLINE") {
    v.decision = VoteDecision::Decline;
  } else {
    r.fail("decision", "expected COSPONSOR or DECLINE");
  }
  return v;
}

ScoreSample score_from_json(const Json& obj, std::size_t line_no, const TestRanges& ranges) {
  FieldReader r(obj, line_no);
  r.only({"test_name", "axis", "position", "model_tag", "value"});
  ScoreSample s;
  auto test = parse_test(r.string("test_name"));
  if (!test) r.fail("test_name", "unknown test");
  s.test_name = *test;
  const std::string axis = r.string("axis");
  if (axis == "Economic") {
    s.axis = Axis::Economic;
  } else if (axis == "Social") {
    s.axis = Axis::Social;
  } else {
    r.fail("axis", "expected Economic or Social");
  }
  auto pos = parse_position(r.string("position"));
  if (!pos) r.fail("position", "unknown position label");
  s.position = *pos;
  s.model_tag = r.string("model_tag");
  s.value = r.number("value");
  auto it = ranges.bounds.find(s.test_name);
  if (it != ranges.bounds.end() && (s.value < it->second.first || s.value > it->second.second)) {
    r.fail("value", "outside the declared test range");
  }
  return s;
}

std::vector<Statement> load_statements(const std::filesystem::path& path) {
  return load_unique<Statement>(path, statement_from_json,
                                [](const Statement& s) { return s.id; });
}

std::vector<Bill> load_bills(const std::filesystem::path& path) {
  return load_unique<Bill>(path, bill_from_json, [](const Bill& b) { return b.id; });
}

std::vector<SponsorshipRecord> load_sponsorships(const std::filesystem::path& path) {
  // Duplicate rows are legitimate repeated co-sponsorships and are counted.
  return load_unique<SponsorshipRecord>(path, sponsorship_from_json, nullptr);
}

std::vector<VoteRecord> load_votes(const std::filesystem::path& path) {
  return load_unique<VoteRecord>(path, vote_from_json, [](const VoteRecord& v) {
    return v.agent_id + "|" + v.bill_id;
  });
}

std::vector<ScoreSample> load_scores(const std::filesystem::path& path, const TestRanges& ranges) {
  return load_unique<ScoreSample>(
      path, [&](const Json& obj, std::size_t line) { return score_from_json(obj, line, ranges); },
      nullptr);
}

std::vector<Json> ingest(RecordKind kind, const std::filesystem::path& path) {
  std::vector<Json> out;
  auto encode = [&out](const auto& records) {
    for (const auto& r : records) out.push_back(to_json(r));
  };
  switch (kind) {
    case RecordKind::Statements: encode(load_statements(path)); break;
    case RecordKind::Bills: encode(load_bills(path)); break;
    case RecordKind::Sponsorships: encode(load_sponsorships(path)); break;
    case RecordKind::Votes: encode(load_votes(path)); break;
    case RecordKind::Scores: encode(load_scores(path)); break;
  }
  return out;
}

std::vector<std::size_t> stratified_sample_indices(std::span<const std::string> keys,
                                                   std::size_t target, std::uint64_t seed) {
  const std::size_t n = keys.size();
  if (target > n) {
    throw Error(ErrorCode::TargetTooLarge,
                std::to_string(target) + " > " + std::to_string(n));
  }
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < n; ++i) strata[keys[i]].push_back(i);

  struct Quota {
    std::string key;
    std::size_t take;
    std::size_t remainder;
  };
  std::vector<Quota> quotas;
  std::size_t assigned = 0;
  for (const auto& [key, members] : strata) {
    const std::size_t scaled = target * members.size();
    quotas.push_back({key, scaled / n, scaled % n});
    assigned += scaled / n;
  }
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quotas[a].remainder > quotas[b].remainder;
  });
  for (std::size_t k = 0; assigned < target; ++k, ++assigned) ++quotas[order[k]].take;

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> picked;
  picked.reserve(target);
  for (const Quota& q : quotas) {
    std::vector<std::size_t> members = strata[q.key];
    std::shuffle(members.begin(), members.end(), rng);
    picked.insert(picked.end(), members.begin(),
                  members.begin() + static_cast<std::ptrdiff_t>(q.take));
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

SplitIndices split_indices(std::span<const std::string> keys, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "ratio must lie in (0, 1)");
  }
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keys[i].empty()) throw Error(ErrorCode::EmptyStratum, "item " + std::to_string(i));
    strata[keys[i]].push_back(i);
  }
  std::mt19937_64 rng(seed);
  SplitIndices out;
  for (auto& [key, members] : strata) {
    const auto n_train = static_cast<std::size_t>(
        std::llround(ratio * static_cast<double>(members.size())));
    std::shuffle(members.begin(), members.end(), rng);
    out.train.insert(out.train.end(), members.begin(),
                     members.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.eval.insert(out.eval.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train),
                    members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.eval.begin(), out.eval.end());
  return out;
}

std::string json_field_key(const Json& obj, std::string_view field) {
  auto it = obj.find(std::string(field));
  if (it == obj.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

}  // namespace forge
