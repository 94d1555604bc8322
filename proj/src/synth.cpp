#include "forge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "forge/error.hpp"
#include "forge/prompts.hpp"

namespace forge {
namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
  double normal() {
    // Box-Muller; the platform's normal_distribution is not portable.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 gen_;
};

std::string padded(std::size_t v, int width) {
  std::string s = std::to_string(v);
  return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

Eigen::VectorXd random_unit(Rng& rng, std::size_t dim) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  return v.normalized();
}

constexpr std::array<std::string_view, 5> kViewpoints = {
    "progressive", "left-wing", "centrist", "right-wing", "conservative"};

const std::array<std::string_view, 6> kClozeVerbs = {
    "support", "oppose", "will protect", "strongly believe in", "must defend", "firmly reject"};
const std::array<std::string_view, 6> kClozeObjects = {
    "lower taxes for working families", "stronger environmental rules",
    "a balanced federal budget",        "expanded access to health care",
    "secure borders and legal immigration", "public investment in education"};

}  // namespace

SynthCorpus make_synth_corpus(const SynthSpec& spec) {
  if (spec.legislators < 10 || spec.legislators % 5 != 0) {
    throw Error(ErrorCode::InvalidArgument, "legislators must be a multiple of 5, at least 10");
  }
  if (spec.topics < 1 || spec.topics > kPolicyList.size() || spec.statements_per_position < 1 ||
      spec.embedding_dim < 2 || spec.score_samples < 2) {
    throw Error(ErrorCode::InvalidArgument, "synthetic corpus sizes out of range");
  }
  Rng rng(spec.seed);
  SynthCorpus out;

  const std::size_t per_position = spec.legislators / 5;
  std::vector<std::string> ids;
  std::vector<double> latent;
  std::vector<std::string> party;
  std::map<Position, std::vector<std::string>> by_position;
  for (std::size_t i = 0; i < spec.legislators; ++i) {
    const Position p = *position_from_ordinal(static_cast<int>(i / per_position) + 1);
    const std::string id = "L" + padded(i + 1, 2);
    ids.push_back(id);
    latent.push_back(0.25 * (ordinal(p) - 1) + rng.uniform(-0.05, 0.05));
    if (p == Position::C) {
      party.push_back(i % 2 == 0 ? "D" : "R");
    } else {
      party.push_back(ordinal(p) < 3 ? "D" : "R");
    }
    out.truth[id] = p;
    by_position[p].push_back(id);
  }
  const auto [lo, hi] = std::minmax_element(latent.begin(), latent.end());
  out.anchors = {ids[static_cast<std::size_t>(lo - latent.begin())],
                 ids[static_cast<std::size_t>(hi - latent.begin())]};

  // Bills and co-sponsorships: sponsors rotate with a stride coprime to the
  // chamber size; cosponsors are drawn with a probability that decays with
  // ideological distance from the sponsor.
  std::size_t stride = 7;
  while (std::gcd(stride, ids.size()) != 1) ++stride;
  std::size_t bill_no = 0;
  while (out.sponsorships.size() < spec.sponsorships) {
    const std::size_t s = (bill_no * stride) % ids.size();
    Bill b;
    b.id = "B" + padded(++bill_no, 4);
    const std::string_view policy = kPolicyList[rng.index(kPolicyList.size())];
    b.title = "Synthetic " + std::string(policy) + " Act No. " + std::to_string(bill_no);
    b.text = "A bill concerning " + std::string(policy) + ", introduced by " + ids[s] + ".";
    b.policy_area = std::string(policy);
    b.legislative_subjects = {std::string(policy), "Congressional oversight"};
    b.sponsor_id = ids[s];
    b.sponsor_party = party[s];
    out.bills.push_back(b);
    out.sponsorships.push_back({ids[s], ids[s], b.id});
    for (std::size_t j = 0; j < ids.size() && out.sponsorships.size() < spec.sponsorships; ++j) {
      if (j == s) continue;
      const double d = latent[j] - latent[s];
      if (rng.uniform() < 0.9 * std::exp(-d * d / (2.0 * 0.3 * 0.3))) {
        out.sponsorships.push_back({ids[j], ids[s], b.id});
      }
    }
  }

  // Statements, one block per topic, with embeddings close to a topic direction.
  out.cache.model_tag = "synthetic";
  out.cache.dim = static_cast<std::int64_t>(spec.embedding_dim);
  for (std::size_t t = 0; t < spec.topics; ++t) {
    const std::string topic(kPolicyList[t]);
    const Eigen::VectorXd base = random_unit(rng, spec.embedding_dim);
    std::vector<std::pair<std::string, Position>> block;
    for (Position p : kAllPositions) {
      const auto& speakers = by_position[p];
      for (std::size_t k = 0; k < spec.statements_per_position; ++k) {
        Statement st;
        st.id = "s" + padded(t + 1, 2) + "-" + std::string(to_string(p)) + "-" + std::to_string(k + 1);
        st.speaker_id = speakers[(t + k) % speakers.size()];
        st.topic = topic;
        st.text = "On " + topic + ", I hold the " + std::string(kViewpoints[static_cast<std::size_t>(ordinal(p) - 1)]) +
                  " view number " + std::to_string(k + 1) + ".";
        out.statements.push_back(st);
        out.embeddings.push_back({st.id, base + 0.3 * random_unit(rng, spec.embedding_dim)});
        out.qa.push_back({{"question", "What is your stance on " + topic + "?"},
                          {"answer", st.text},
                          {"position", std::string(to_string(p))}});
        block.emplace_back(st.id, p);
      }
    }
    for (std::size_t a = 0; a < block.size(); ++a) {
      for (std::size_t b = a + 1; b < block.size(); ++b) {
        const double c = 0.05 + 0.2 * distance(block[a].second, block[b].second) + rng.uniform(0.0, 0.02);
        out.cache.set(block[a].first, block[b].first, std::min(c, 1.0));
      }
    }
  }

  // Positioning-test samples spread evenly from left to right.
  const TestRanges ranges;
  for (const auto& [test, range] : ranges.bounds) {
    const double width = range.second - range.first;
    for (Axis axis : {Axis::Economic, Axis::Social}) {
      for (Position p : kAllPositions) {
        for (std::size_t m = 0; m < spec.score_samples; ++m) {
          const double center = range.first + width * (0.1 + 0.2 * (ordinal(p) - 1));
          out.scores.push_back({test, axis, p, "m" + std::to_string(m + 1),
                                center + width * rng.uniform(-0.03, 0.03)});
        }
      }
    }
  }

  // A left-leaning agent voting on the first bills.
  const std::size_t voted = std::min<std::size_t>(60, out.bills.size());
  std::map<std::string, double> latent_of;
  for (std::size_t i = 0; i < ids.size(); ++i) latent_of[ids[i]] = latent[i];
  for (std::size_t i = 0; i < voted; ++i) {
    const Bill& b = out.bills[i];
    out.votes.push_back({"agent", b.id,
                         latent_of[b.sponsor_id] < 0.3 ? VoteDecision::Cosponsor : VoteDecision::Decline});
  }

  for (std::size_t i = 0; i < 30; ++i) {
    static constexpr std::array<std::string_view, 3> kSubjects = {"We", "Our members", "I"};
    const std::size_t v = rng.index(kClozeVerbs.size());
    const std::string sentence = std::string(kSubjects[i % kSubjects.size()]) + " " +
                                 std::string(kClozeVerbs[v]) + " " +
                                 std::string(kClozeObjects[rng.index(kClozeObjects.size())]) + ".";
    const char* leaning = v % 3 == 0 ? "Left" : (v % 3 == 1 ? "Right" : "Center");
    out.cloze.push_back({{"sentence", sentence}, {"leaning", leaning}});
  }
  return out;
}

std::map<std::string, std::filesystem::path> write_synth_corpus(const SynthCorpus& corpus,
                                                                const std::filesystem::path& dir) {
  std::map<std::string, std::filesystem::path> files = {
      {"sponsorships", dir / "sponsorships.jsonl"}, {"bills", dir / "bills.jsonl"},
      {"statements", dir / "statements.jsonl"},     {"embeddings", dir / "embeddings.jsonl"},
      {"cache", dir / "contradiction.cache"},       {"scores", dir / "scores.jsonl"},
      {"votes", dir / "votes.jsonl"},               {"qa", dir / "qa.jsonl"},
      {"cloze", dir / "cloze.jsonl"},               {"truth", dir / "truth.jsonl"},
  };
  write_jsonl(corpus.sponsorships, files["sponsorships"]);
  write_jsonl(corpus.bills, files["bills"]);
  write_jsonl(corpus.statements, files["statements"]);
  write_jsonl(corpus.embeddings, files["embeddings"]);
  write_cache(corpus.cache, files["cache"]);
  write_jsonl(corpus.scores, files["scores"]);
  write_jsonl(corpus.votes, files["votes"]);
  write_json_lines(files["qa"], corpus.qa);
  write_json_lines(files["cloze"], corpus.cloze);
  std::vector<Json> truth;
  for (const auto& [id, p] : corpus.truth) {
    truth.push_back({{"legislator_id", id}, {"position", std::string(to_string(p))},
                     {"anchor", id == corpus.anchors.left_id    ? "left"
                                : id == corpus.anchors.right_id ? "right"
                                                                : ""}});
  }
  write_json_lines(files["truth"], truth);
  return files;
}

}  // namespace forge
