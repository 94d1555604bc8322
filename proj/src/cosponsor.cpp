#include "forge/cosponsor.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>
#include <unordered_map>

#include "forge/error.hpp"

namespace forge {

std::optional<Eigen::Index> CosponsorMatrix::index_of(std::string_view id) const {
  auto it = std::lower_bound(legislator_ids.begin(), legislator_ids.end(), id);
  if (it != legislator_ids.end() && *it == id) {
    return static_cast<Eigen::Index>(it - legislator_ids.begin());
  }
  // Augmented matrices append agents out of order.
  for (std::size_t i = 0; i < legislator_ids.size(); ++i) {
    if (legislator_ids[i] == id) return static_cast<Eigen::Index>(i);
  }
  return std::nullopt;
}

CosponsorMatrix build_matrix(std::span<const SponsorshipRecord> records) {
  std::set<std::string> universe;
  for (const auto& r : records) {
    universe.insert(r.cosponsor_id);
    universe.insert(r.sponsor_id);
  }
  CosponsorMatrix m;
  m.legislator_ids.assign(universe.begin(), universe.end());
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < m.legislator_ids.size(); ++i) {
    index.emplace(m.legislator_ids[i], static_cast<Eigen::Index>(i));
  }
  m.counts = CountMatrix::Zero(m.size(), m.size());
  for (const auto& r : records) m.counts(index.at(r.cosponsor_id), index.at(r.sponsor_id)) += 1;
  return m;
}

CosponsorMatrix incorporate_agent_votes(const CosponsorMatrix& m, std::span<const VoteRecord> votes,
                                        std::span<const Bill> bills, const std::string& agent_id) {
  if (m.index_of(agent_id)) throw Error(ErrorCode::AgentIdCollision, agent_id);
  std::unordered_map<std::string, const Bill*> by_id;
  for (const auto& b : bills) by_id.emplace(b.id, &b);

  const Eigen::Index n = m.size();
  CosponsorMatrix out;
  out.legislator_ids = m.legislator_ids;
  out.legislator_ids.push_back(agent_id);
  out.counts = CountMatrix::Zero(n + 1, n + 1);
  out.counts.topLeftCorner(n, n) = m.counts;

  for (const auto& v : votes) {
    if (v.agent_id != agent_id) continue;
    auto it = by_id.find(v.bill_id);
    if (it == by_id.end()) throw Error(ErrorCode::UnknownBill, v.bill_id);
    auto sponsor = m.index_of(it->second->sponsor_id);
    if (!sponsor) throw Error(ErrorCode::UnknownSponsor, it->second->sponsor_id);
    if (v.decision == VoteDecision::Cosponsor) out.counts(n, *sponsor) += 1;
  }
  return out;
}

CosponsorMatrix permute(const CosponsorMatrix& m, std::span<const Eigen::Index> perm) {
  const Eigen::Index n = m.size();
  if (static_cast<Eigen::Index>(perm.size()) != n) {
    throw Error(ErrorCode::InvalidArgument, "permutation size mismatch");
  }
  CosponsorMatrix out;
  out.counts.resize(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    out.legislator_ids.push_back(m.legislator_ids[static_cast<std::size_t>(perm[a])]);
    for (Eigen::Index b = 0; b < n; ++b) out.counts(a, b) = m.counts(perm[a], perm[b]);
  }
  return out;
}

std::string matrix_to_csv(const CosponsorMatrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.legislator_ids.size(); ++i) {
    if (i) out += ',';
    out += m.legislator_ids[i];
  }
  out += '\n';
  for (Eigen::Index r = 0; r < m.size(); ++r) {
    for (Eigen::Index c = 0; c < m.size(); ++c) {
      if (c) out += ',';
      out += std::to_string(m.counts(r, c));
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

CosponsorMatrix matrix_from_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  CosponsorMatrix m;
  if (lines.empty() || lines[0].empty()) {
    if (lines.size() > 1) throw LineError(ErrorCode::MalformedLine, 2, "rows without header");
    m.counts.resize(0, 0);
    return m;
  }
  std::set<std::string, std::less<>> seen;
  for (auto id : split_commas(lines[0])) {
    if (id.empty()) throw LineError(ErrorCode::SchemaViolation, 1, "empty legislator id");
    if (!seen.emplace(id).second) throw LineError(ErrorCode::DuplicateId, 1, std::string(id));
    m.legislator_ids.emplace_back(id);
  }
  const auto n = m.size();
  if (static_cast<Eigen::Index>(lines.size()) != n + 1) {
    throw LineError(ErrorCode::MalformedLine, lines.size(), "expected " + std::to_string(n) + " rows");
  }
  m.counts.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t line_no = static_cast<std::size_t>(r) + 2;
    auto cells = split_commas(lines[static_cast<std::size_t>(r) + 1]);
    if (static_cast<Eigen::Index>(cells.size()) != n) {
      throw LineError(ErrorCode::MalformedLine, line_no, "wrong column count");
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      auto cell = cells[static_cast<std::size_t>(c)];
      std::int64_t v = -1;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || v < 0) {
        throw LineError(ErrorCode::MalformedLine, line_no, "bad count '" + std::string(cell) + "'");
      }
      m.counts(r, c) = v;
    }
  }
  return m;
}

void write_matrix_csv(const CosponsorMatrix& m, const std::filesystem::path& path) {
  write_text_file(path, matrix_to_csv(m));
}

CosponsorMatrix read_matrix_csv(const std::filesystem::path& path) {
  return matrix_from_csv(read_text_file(path));
}

}  // namespace forge
