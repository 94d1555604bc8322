#include "forge/semantic_cluster.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "forge/error.hpp"

namespace forge {

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimMismatch, std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  const double na = a.values.norm();
  const double nb = b.values.norm();
  if (na == 0.0) throw Error(ErrorCode::ZeroVector, a.statement_id);
  if (nb == 0.0) throw Error(ErrorCode::ZeroVector, b.statement_id);
  return std::clamp(a.values.dot(b.values) / (na * nb), -1.0, 1.0);
}

namespace {

struct HacRun {
  std::vector<Merge> merges;
  std::vector<std::vector<std::string>> clusters;
};

HacRun run_hac(std::span<const EmbeddingVector> vectors, double threshold, Linkage linkage) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "threshold must lie in (0, 1)");
  }
  const auto n = static_cast<Eigen::Index>(vectors.size());
  HacRun run;
  if (n == 0) return run;

  // Index order == id order, so the smallest index of a cluster is its
  // lexicographically smallest id.
  std::vector<std::size_t> order(vectors.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return vectors[a].statement_id < vectors[b].statement_id;
  });
  const Eigen::Index dim = vectors[order[0]].dim();
  Eigen::MatrixXd x(n, dim);
  std::vector<std::string> ids;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& v = vectors[order[static_cast<std::size_t>(r)]];
    if (v.dim() != dim) throw Error(ErrorCode::DimMismatch, v.statement_id);
    const double norm = v.values.norm();
    if (norm == 0.0) throw Error(ErrorCode::ZeroVector, v.statement_id);
    if (!ids.empty() && ids.back() == v.statement_id) {
      throw Error(ErrorCode::DuplicateId, v.statement_id);
    }
    ids.push_back(v.statement_id);
    x.row(r) = v.values.transpose() / norm;
  }
  Eigen::MatrixXd sim = x * x.transpose();

  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) members[static_cast<std::size_t>(i)] = {i};
  std::vector<bool> active(static_cast<std::size_t>(n), true);
  std::vector<Eigen::Index> best(static_cast<std::size_t>(n), -1);

  // Candidate (i, j) beats (k, l) on higher similarity, then smaller key pair.
  auto better = [&](Eigen::Index i, Eigen::Index j, Eigen::Index k, Eigen::Index l) {
    const double a = sim(i, j), b = sim(k, l);
    if (a != b) return a > b;
    return std::minmax(i, j) < std::minmax(k, l);
  };
  auto rescan = [&](Eigen::Index i) {
    Eigen::Index arg = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i || !active[static_cast<std::size_t>(j)]) continue;
      if (arg < 0 || better(i, j, i, arg)) arg = j;
    }
    best[static_cast<std::size_t>(i)] = arg;
  };
  for (Eigen::Index i = 0; i < n; ++i) rescan(i);

  auto members_of = [&](Eigen::Index c) {
    std::vector<std::string> out;
    for (Eigen::Index m : members[static_cast<std::size_t>(c)]) out.push_back(ids[static_cast<std::size_t>(m)]);
    std::sort(out.begin(), out.end());
    return out;
  };

  for (Eigen::Index step = 0; step + 1 < n; ++step) {
    Eigen::Index bi = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index j = best[static_cast<std::size_t>(i)];
      if (!active[static_cast<std::size_t>(i)] || j < 0) continue;
      if (bi < 0 || better(i, j, bi, best[static_cast<std::size_t>(bi)])) bi = i;
    }
    if (bi < 0) break;
    Eigen::Index keep = std::min(bi, best[static_cast<std::size_t>(bi)]);
    Eigen::Index gone = std::max(bi, best[static_cast<std::size_t>(bi)]);
    const double s = sim(keep, gone);
    if (s < threshold) break;

    run.merges.push_back({members_of(keep), members_of(gone), s});
    const double wk = static_cast<double>(members[static_cast<std::size_t>(keep)].size());
    const double wg = static_cast<double>(members[static_cast<std::size_t>(gone)].size());
    for (Eigen::Index k = 0; k < n; ++k) {
      if (!active[static_cast<std::size_t>(k)] || k == keep || k == gone) continue;
      const double merged = linkage == Linkage::Average
                                ? (wk * sim(keep, k) + wg * sim(gone, k)) / (wk + wg)
                                : std::min(sim(keep, k), sim(gone, k));
      sim(keep, k) = merged;
      sim(k, keep) = merged;
    }
    auto& into = members[static_cast<std::size_t>(keep)];
    auto& from = members[static_cast<std::size_t>(gone)];
    into.insert(into.end(), from.begin(), from.end());
    from.clear();
    active[static_cast<std::size_t>(gone)] = false;

    for (Eigen::Index k = 0; k < n; ++k) {
      if (!active[static_cast<std::size_t>(k)]) continue;
      const Eigen::Index b = best[static_cast<std::size_t>(k)];
      if (k == keep || b < 0 || b == keep || b == gone) {
        rescan(k);
      } else if (better(k, keep, k, b)) {
        best[static_cast<std::size_t>(k)] = keep;
      }
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    if (active[static_cast<std::size_t>(i)]) run.clusters.push_back(members_of(i));
  }
  return run;
}

}  // namespace

std::vector<Merge> hac_merges(std::span<const EmbeddingVector> vectors, double threshold,
                              Linkage linkage) {
  return run_hac(vectors, threshold, linkage).merges;
}

std::vector<std::vector<std::string>> hac_partition(std::span<const EmbeddingVector> vectors,
                                                    double threshold, Linkage linkage) {
  return run_hac(vectors, threshold, linkage).clusters;
}

std::vector<SemanticCluster> cluster_statements(std::span<const Statement> statements,
                                                std::span<const EmbeddingVector> embeddings,
                                                double threshold, Linkage linkage) {
  std::unordered_map<std::string, const EmbeddingVector*> by_id;
  for (const auto& e : embeddings) by_id.emplace(e.statement_id, &e);
  std::map<std::string, std::vector<EmbeddingVector>> by_topic;
  std::unordered_map<std::string, const Statement*> statement_of;
  for (const auto& s : statements) {
    auto it = by_id.find(s.id);
    if (it == by_id.end()) throw Error(ErrorCode::CacheMiss, "no embedding for " + s.id);
    if (!statement_of.emplace(s.id, &s).second) throw Error(ErrorCode::DuplicateId, s.id);
    by_topic[s.topic].push_back(*it->second);
  }

  std::vector<SemanticCluster> out;
  for (const auto& [topic, vectors] : by_topic) {
    std::size_t n = 0;
    for (auto& members : hac_partition(vectors, threshold, linkage)) {
      SemanticCluster c;
      c.cluster_id = topic + "#" + std::to_string(++n);
      c.issue = topic;
      for (const auto& id : members) {
        const Statement* s = statement_of.at(id);
        if (s->position) c.per_position_members[*s->position].push_back(id);
      }
      c.member_ids = std::move(members);
      out.push_back(std::move(c));
    }
  }
  return out;
}

Json to_json(const EmbeddingVector& e) {
  Json j;
  j["statement_id"] = e.statement_id;
  j["values"] = std::vector<double>(e.values.data(), e.values.data() + e.values.size());
  return j;
}

EmbeddingVector embedding_from_json(const Json& obj, std::size_t line_no) {
  FieldReader r(obj, line_no);
  r.only({"statement_id", "values"});
  EmbeddingVector e;
  e.statement_id = r.string("statement_id");
  const auto values = r.number_list("values");
  if (values.empty()) r.fail("values", "empty vector");
  e.values = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  if (e.values.norm() == 0.0) r.fail("values", "zero vector");
  return e;
}

std::vector<EmbeddingVector> load_embeddings(const std::filesystem::path& path) {
  std::vector<EmbeddingVector> out;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  for (const Json& obj : read_json_lines(path)) {
    ++line_no;
    auto e = embedding_from_json(obj, line_no);
    if (!out.empty() && e.dim() != out.front().dim()) {
      throw LineError(ErrorCode::DimMismatch, line_no, e.statement_id);
    }
    if (!seen.insert(e.statement_id).second) {
      throw LineError(ErrorCode::DuplicateId, line_no, e.statement_id);
    }
    out.push_back(std::move(e));
  }
  return out;
}

Json to_json(const SemanticCluster& c) {
  Json j;
  j["cluster_id"] = c.cluster_id;
  j["issue"] = c.issue;
  j["member_ids"] = c.member_ids;
  Json per = Json::object();
  for (Position p : kAllPositions) {
    auto it = c.per_position_members.find(p);
    if (it != c.per_position_members.end()) per[std::string(to_string(p))] = it->second;
  }
  j["per_position_members"] = per;
  return j;
}

SemanticCluster cluster_from_json(const Json& obj, std::size_t line_no) {
  FieldReader r(obj, line_no);
  r.only({"cluster_id", "issue", "member_ids", "per_position_members"});
  SemanticCluster c;
  c.cluster_id = r.string("cluster_id");
  c.issue = r.string("issue");
  c.member_ids = r.string_list("member_ids");
  if (c.member_ids.empty()) r.fail("member_ids", "empty cluster");
  const Json& per = r.raw("per_position_members");
  if (!per.is_object()) r.fail("per_position_members", "expected object");
  for (const auto& item : per.items()) {
    auto pos = parse_position(item.key());
    if (!pos) r.fail("per_position_members", "unknown position " + item.key());
    FieldReader inner(per, line_no);
    c.per_position_members[*pos] = inner.string_list(item.key());
  }
  return c;
}

std::vector<SemanticCluster> load_clusters(const std::filesystem::path& path) {
  std::vector<SemanticCluster> out;
  std::size_t line_no = 0;
  for (const Json& obj : read_json_lines(path)) out.push_back(cluster_from_json(obj, ++line_no));
  return out;
}

}  // namespace forge
