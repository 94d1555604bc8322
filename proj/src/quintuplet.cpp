#include "forge/quintuplet.hpp"

#include <algorithm>
#include <random>

#include "forge/error.hpp"

namespace forge {

int pair_weight(int i, int j) {
  if (i < 1 || j > 5 || i >= j) {
    throw Error(ErrorCode::BadOrdinals, std::to_string(i) + "," + std::to_string(j));
  }
  return j - i == 1 ? -1 : j - i;
}

double pair_rank(double c, int i, int j) {
  if (!(c >= 0.0 && c <= 1.0)) throw Error(ErrorCode::InvalidArgument, "contradiction outside [0,1]");
  return c * pair_weight(i, j);
}

double quintuplet_score(const std::array<std::string, 5>& members, const ContradictionMatrix& c) {
  double total = 0.0;
  for (int i = 1; i <= 4; ++i) {
    for (int j = i + 1; j <= 5; ++j) {
      total += pair_rank(c.at(members[static_cast<std::size_t>(i - 1)],
                              members[static_cast<std::size_t>(j - 1)]),
                         i, j);
    }
  }
  return total;
}

double quintuplet_score(const Quintuplet& q, const ContradictionMatrix& c) {
  return quintuplet_score(q.members, c);
}

bool has_all_positions(const SemanticCluster& cluster) {
  for (Position p : kAllPositions) {
    auto it = cluster.per_position_members.find(p);
    if (it == cluster.per_position_members.end() || it->second.empty()) return false;
  }
  return true;
}

Quintuplet optimize(const SemanticCluster& cluster, const ContradictionMatrix& c,
                    const OptimizerConfig& cfg, OptimizeTrace* trace) {
  if (cfg.max_iterations < 1 || cfg.patience < 1) {
    throw Error(ErrorCode::InvalidArgument, "max_iterations and patience must be >= 1");
  }
  std::array<const std::vector<std::string>*, 5> pools{};
  for (Position p : kAllPositions) {
    auto it = cluster.per_position_members.find(p);
    if (it == cluster.per_position_members.end() || it->second.empty()) {
      throw Error(ErrorCode::MissingPosition, cluster.cluster_id + ":" + std::string(to_string(p)));
    }
    pools[static_cast<std::size_t>(ordinal(p) - 1)] = &it->second;
  }

  std::mt19937_64 rng(cfg.seed);
  auto draw = [&rng](std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  };

  std::array<std::size_t, 5> pick{};
  std::array<std::string, 5> members;
  auto restart = [&] {
    for (std::size_t k = 0; k < 5; ++k) {
      pick[k] = draw(pools[k]->size());
      members[k] = (*pools[k])[pick[k]];
    }
    return quintuplet_score(members, c);
  };
  double score = restart();
  std::array<std::string, 5> best = members;
  double best_score = score;
  if (trace) {
    *trace = {};
    trace->initial_score = score;
  }

  // Untried swaps around the current quintuplet, as (position, candidate).
  std::vector<std::pair<std::size_t, std::size_t>> untried;
  auto reset_moves = [&] {
    untried.clear();
    for (std::size_t k = 0; k < 5; ++k) {
      for (std::size_t alt = 0; alt < pools[k]->size(); ++alt) {
        if (alt != pick[k]) untried.emplace_back(k, alt);
      }
    }
  };
  reset_moves();
  if (untried.empty()) return {cluster.cluster_id, std::move(members), score};

  // A climb restarts from a fresh random quintuplet once every swap has been
  // rejected (a local optimum) or after `patience` consecutive rejections;
  // the best quintuplet seen within the iteration budget is returned.
  std::size_t stale = 0;
  std::size_t iter = 0;
  while (iter < cfg.max_iterations) {
    if (untried.empty() || stale == cfg.patience) {
      score = restart();
      stale = 0;
      reset_moves();
      if (score > best_score) {
        best = members;
        best_score = score;
        if (trace) trace->accepted_scores.push_back(best_score);
      }
    }
    ++iter;
    const std::size_t m = draw(untried.size());
    const auto [k, alt] = untried[m];
    untried[m] = untried.back();
    untried.pop_back();
    std::array<std::string, 5> candidate = members;
    candidate[k] = (*pools[k])[alt];
    const double next = quintuplet_score(candidate, c);
    if (next > score) {
      members = std::move(candidate);
      pick[k] = alt;
      score = next;
      stale = 0;
      reset_moves();
      if (score > best_score) {
        best = members;
        best_score = score;
        if (trace) trace->accepted_scores.push_back(best_score);
      }
    } else {
      ++stale;
    }
  }
  if (trace) trace->iterations = iter;
  return {cluster.cluster_id, std::move(best), best_score};
}

std::array<std::string, 5> position_rerank(const Quintuplet& q, const ContradictionMatrix& c,
                                           Position p) {
  const int k = ordinal(p);
  struct Entry {
    double rank;
    int dist;
    std::string id;
  };
  std::vector<Entry> rest;
  for (int j = 1; j <= 5; ++j) {
    if (j == k) continue;
    const std::string& id = q.members[static_cast<std::size_t>(j - 1)];
    const double cij = c.at(q.at(p), id);
    rest.push_back({pair_rank(cij, std::min(k, j), std::max(k, j)), std::abs(k - j), id});
  }
  std::sort(rest.begin(), rest.end(), [](const Entry& a, const Entry& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.id < b.id;
  });
  std::array<std::string, 5> out;
  out[0] = q.at(p);
  for (std::size_t i = 0; i < rest.size(); ++i) out[i + 1] = rest[i].id;
  return out;
}

ForgeSummary optimize_all(std::span<const SemanticCluster> clusters, const ContradictionMatrix& c,
                          const OptimizerConfig& cfg) {
  ForgeSummary out;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (!has_all_positions(clusters[i])) {
      out.skipped_clusters.push_back(clusters[i].cluster_id);
      continue;
    }
    OptimizerConfig run = cfg;
    run.seed = cfg.seed + i;
    out.quintuplets.push_back(optimize(clusters[i], c, run));
  }
  return out;
}

std::vector<RankedSet> rankset(std::span<const Quintuplet> quintuplets, const ContradictionMatrix& c) {
  std::vector<RankedSet> out;
  for (const auto& q : quintuplets) {
    for (Position p : kAllPositions) out.push_back({q.cluster_id, p, position_rerank(q, c, p)});
  }
  return out;
}

Json to_json(const Quintuplet& q) {
  Json j;
  j["cluster_id"] = q.cluster_id;
  Json members;
  for (Position p : kAllPositions) members[std::string(to_string(p))] = q.at(p);
  j["members"] = members;
  j["score"] = q.score;
  return j;
}

Quintuplet quintuplet_from_json(const Json& obj, std::size_t line_no) {
  FieldReader r(obj, line_no);
  r.only({"cluster_id", "members", "score"});
  Quintuplet q;
  q.cluster_id = r.string("cluster_id");
  const Json& members = r.raw("members");
  if (!members.is_object()) r.fail("members", "expected object");
  FieldReader m(members, line_no);
  m.only({"PL", "LW", "C", "RW", "CR"});
  for (Position p : kAllPositions) {
    q.members[static_cast<std::size_t>(ordinal(p) - 1)] = m.string(to_string(p));
  }
  q.score = r.number("score");
  return q;
}

std::vector<Quintuplet> load_quintuplets(const std::filesystem::path& path) {
  std::vector<Quintuplet> out;
  std::size_t line_no = 0;
  for (const Json& obj : read_json_lines(path)) out.push_back(quintuplet_from_json(obj, ++line_no));
  return out;
}

Json to_json(const RankedSet& r) {
  Json j;
  j["quintuplet_id"] = r.quintuplet_id;
  j["position"] = std::string(to_string(r.position));
  j["order"] = r.order;
  return j;
}

RankedSet ranked_set_from_json(const Json& obj, std::size_t line_no) {
  FieldReader r(obj, line_no);
  r.only({"quintuplet_id", "position", "order"});
  RankedSet s;
  s.quintuplet_id = r.string("quintuplet_id");
  auto pos = parse_position(r.string("position"));
  if (!pos) r.fail("position", "unknown position label");
  s.position = *pos;
  const auto order = r.string_list("order");
  if (order.size() != 5) r.fail("order", "expected 5 statement ids");
  std::copy(order.begin(), order.end(), s.order.begin());
  return s;
}

std::vector<RankedSet> load_ranked_sets(const std::filesystem::path& path) {
  std::vector<RankedSet> out;
  std::size_t line_no = 0;
  for (const Json& obj : read_json_lines(path)) out.push_back(ranked_set_from_json(obj, ++line_no));
  return out;
}

}  // namespace forge
