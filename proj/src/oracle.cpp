#include "forge/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_map>

#include <httplib.h>

#include "forge/error.hpp"

namespace forge {
namespace {

constexpr std::string_view kCacheMagic = "forge-contradiction-cache 1";
constexpr double kSimplexTolerance = 1e-6;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

bool plain_token(std::string_view s) {
  return !s.empty() && s.find_first_of("\t\n\r") == std::string_view::npos;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

NliProbabilities parse_triple(const Json& obj) {
  if (!obj.is_object()) throw Error(ErrorCode::OracleBadResponse, "expected probability object");
  NliProbabilities p;
  try {
    p.entail = obj.at("entail").get<double>();
    p.neutral = obj.at("neutral").get<double>();
    p.contradict = obj.at("contradict").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::OracleBadResponse, e.what());
  }
  for (double v : {p.entail, p.neutral, p.contradict}) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::OracleBadResponse, "probability outside [0,1]");
  }
  if (std::abs(p.entail + p.neutral + p.contradict - 1.0) > kSimplexTolerance) {
    throw Error(ErrorCode::OracleBadResponse, "probabilities do not sum to 1");
  }
  return p;
}

}  // namespace

ContradictionMatrix::Key ContradictionMatrix::key(std::string_view a, std::string_view b) {
  if (b < a) std::swap(a, b);
  return {std::string(a), std::string(b)};
}

std::optional<double> ContradictionMatrix::find(std::string_view a, std::string_view b) const {
  if (a == b) return 0.0;
  auto it = entries_.find(key(a, b));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double ContradictionMatrix::at(std::string_view a, std::string_view b) const {
  auto p = find(a, b);
  if (!p) throw Error(ErrorCode::CacheMiss, std::string(a) + "," + std::string(b));
  return *p;
}

void ContradictionMatrix::set(std::string_view a, std::string_view b, double p) {
  if (a == b) throw Error(ErrorCode::InvalidArgument, "diagonal is fixed at 0");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "probability outside [0,1]");
  entries_[key(a, b)] = p;
}

std::vector<std::string> ContradictionMatrix::statement_ids() const {
  std::set<std::string> ids;
  for (const auto& [k, _] : entries_) {
    ids.insert(k.first);
    ids.insert(k.second);
  }
  return {ids.begin(), ids.end()};
}

std::string cache_to_text(const ContradictionMatrix& m) {
  std::string out(kCacheMagic);
  out += "\nmodel_tag\t" + m.model_tag;
  out += "\nsymmetrization\t" + m.symmetrization;
  out += "\ndim\t" + std::to_string(m.dim);
  out += "\npairs\t" + std::to_string(m.pair_count()) + "\n";
  for (const auto& [k, p] : m.entries()) {
    if (!plain_token(k.first) || !plain_token(k.second)) {
      throw Error(ErrorCode::SchemaViolation, "statement id with tab or newline");
    }
    out += k.first + "\t" + k.second + "\t" + format_double(p) + "\n";
  }
  return out;
}

ContradictionMatrix cache_from_text(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  if (lines.size() < 5 || lines[0] != kCacheMagic) {
    throw LineError(ErrorCode::MalformedLine, 1, "not a contradiction cache");
  }
  auto header = [&](std::size_t idx, std::string_view name) {
    auto cells = split_tabs(lines[idx]);
    if (cells.size() != 2 || cells[0] != name) {
      throw LineError(ErrorCode::MalformedLine, idx + 1, "expected " + std::string(name));
    }
    return std::string(cells[1]);
  };
  ContradictionMatrix m;
  m.model_tag = header(1, "model_tag");
  m.symmetrization = header(2, "symmetrization");
  const std::string dim = header(3, "dim");
  const std::string count = header(4, "pairs");
  try {
    m.dim = std::stoll(dim);
  } catch (const std::exception&) {
    throw LineError(ErrorCode::MalformedLine, 4, "bad dim");
  }
  for (std::size_t i = 5; i < lines.size(); ++i) {
    auto cells = split_tabs(lines[i]);
    if (cells.size() != 3) throw LineError(ErrorCode::MalformedLine, i + 1, "expected 3 columns");
    double p = -1.0;
    auto [ptr, ec] = std::from_chars(cells[2].data(), cells[2].data() + cells[2].size(), p);
    if (ec != std::errc() || ptr != cells[2].data() + cells[2].size() || !(p >= 0.0 && p <= 1.0) ||
        cells[0] == cells[1]) {
      throw LineError(ErrorCode::MalformedLine, i + 1, "bad pair row");
    }
    m.set(cells[0], cells[1], p);
  }
  if (std::to_string(m.pair_count()) != count) {
    throw LineError(ErrorCode::MalformedLine, 5, "pair count does not match rows");
  }
  return m;
}

void write_cache(const ContradictionMatrix& m, const std::filesystem::path& path) {
  write_text_file(path, cache_to_text(m));
}

ContradictionMatrix read_cache(const std::filesystem::path& path) {
  return cache_from_text(read_text_file(path));
}

void validate(const OracleConfig& cfg) {
  if (cfg.batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  const bool has_endpoint = cfg.endpoint && !cfg.endpoint->empty();
  if (cfg.backend == OracleBackend::Http && !has_endpoint) {
    throw Error(ErrorCode::InvalidArgument, "http backend needs an endpoint");
  }
  if (cfg.backend == OracleBackend::CacheFile && has_endpoint) {
    throw Error(ErrorCode::InvalidArgument, "endpoint is only valid for the http backend");
  }
}

struct OracleClient::Impl {
  OracleConfig cfg;
  httplib::Client http;

  explicit Impl(const OracleConfig& c) : cfg(c), http(c.endpoint.value_or("")) {
    const auto sec = cfg.timeout_ms / 1000;
    const auto usec = (cfg.timeout_ms % 1000) * 1000;
    http.set_connection_timeout(sec, usec);
    http.set_read_timeout(sec, usec);
    http.set_write_timeout(sec, usec);
    if (cfg.token) http.set_default_headers({{"X-Forge-Token", *cfg.token}});
  }

  Json call(const std::string& path, const Json* body) {
    std::string last_error = "no attempt";
    for (int attempt = 0; attempt <= std::max(cfg.retries, 0); ++attempt) {
      httplib::Result res = body ? http.Post(path, body->dump(), "application/json") : http.Get(path);
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status == 503 || res->status >= 500) {
        last_error = "status " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw Error(ErrorCode::OracleBadResponse, path + " status " + std::to_string(res->status));
      }
      try {
        return Json::parse(res->body);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::OracleBadResponse, e.what());
      }
    }
    throw Error(ErrorCode::OracleUnreachable, path + ": " + last_error);
  }
};

OracleClient::OracleClient(const OracleConfig& cfg) : impl_(std::make_unique<Impl>(cfg)) {}
OracleClient::~OracleClient() = default;
OracleClient::OracleClient(OracleClient&&) noexcept = default;
OracleClient& OracleClient::operator=(OracleClient&&) noexcept = default;

OracleClient::Health OracleClient::health() {
  const Json j = impl_->call("/v1/health", nullptr);
  Health h;
  try {
    h.nli_model = j.at("models").at("nli").get<std::string>();
    h.embed_model = j.at("models").at("embed").get<std::string>();
    h.dim = j.at("dim").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::OracleBadResponse, e.what());
  }
  return h;
}

std::vector<std::pair<NliProbabilities, NliProbabilities>> OracleClient::contradiction(
    std::span<const std::pair<std::string, std::string>> pairs, std::string* model_tag) {
  Json body;
  body["pairs"] = Json::array();
  for (const auto& [premise, hypothesis] : pairs) {
    body["pairs"].push_back({{"premise", premise}, {"hypothesis", hypothesis}});
  }
  const Json j = impl_->call("/v1/contradiction", &body);
  auto results = j.find("results");
  if (results == j.end() || !results->is_array() || results->size() != pairs.size()) {
    throw Error(ErrorCode::OracleBadResponse, "result count does not match request");
  }
  if (model_tag) {
    auto tag = j.find("model_tag");
    if (tag != j.end() && tag->is_string()) *model_tag = tag->get<std::string>();
  }
  std::vector<std::pair<NliProbabilities, NliProbabilities>> out;
  for (const auto& r : *results) {
    if (!r.is_object() || !r.contains("forward") || !r.contains("backward")) {
      throw Error(ErrorCode::OracleBadResponse, "expected forward and backward probabilities");
    }
    out.emplace_back(parse_triple(r["forward"]), parse_triple(r["backward"]));
  }
  return out;
}

std::vector<Eigen::VectorXd> OracleClient::embed(std::span<const std::string> texts) {
  Json body;
  body["texts"] = std::vector<std::string>(texts.begin(), texts.end());
  const Json j = impl_->call("/v1/embed", &body);
  std::vector<Eigen::VectorXd> out;
  try {
    const auto dim = j.at("dim").get<std::int64_t>();
    const Json& vectors = j.at("vectors");
    if (!vectors.is_array() || vectors.size() != texts.size()) {
      throw Error(ErrorCode::OracleBadResponse, "vector count does not match request");
    }
    for (const auto& v : vectors) {
      const auto values = v.get<std::vector<double>>();
      if (static_cast<std::int64_t>(values.size()) != dim) {
        throw Error(ErrorCode::DimMismatch, "service vector of size " + std::to_string(values.size()));
      }
      out.emplace_back(Eigen::Map<const Eigen::VectorXd>(values.data(), dim));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::OracleBadResponse, e.what());
  }
  return out;
}

OracleGateway::OracleGateway(OracleConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
  if (cfg_.backend == OracleBackend::Http) {
    client_ = std::make_unique<OracleClient>(cfg_);
  } else {
    if (!cfg_.cache_path.empty()) cache_ = read_cache(cfg_.cache_path);
    if (!cfg_.embedding_cache_path.empty()) {
      std::size_t line_no = 0;
      for (const Json& obj : read_json_lines(cfg_.embedding_cache_path)) {
        FieldReader r(obj, ++line_no);
        r.only({"text", "values"});
        const auto values = r.number_list("values");
        if (!embeddings_.empty() &&
            static_cast<std::size_t>(embeddings_.begin()->second.size()) != values.size()) {
          throw LineError(ErrorCode::DimMismatch, line_no, "embedding cache");
        }
        embeddings_[r.string("text")] =
            Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
      }
    }
  }
}

OracleGateway::~OracleGateway() = default;

double OracleGateway::contradiction(const Statement& a, const Statement& b) {
  if (a.id == b.id) return 0.0;
  if (auto hit = cache_.find(a.id, b.id)) return *hit;
  if (!client_) throw Error(ErrorCode::CacheMiss, a.id + "," + b.id);
  const std::pair<std::string, std::string> pair{a.text, b.text};
  const auto result = client_->contradiction(std::span(&pair, 1), &cache_.model_tag);
  const double p = 0.5 * (result[0].first.contradict + result[0].second.contradict);
  cache_.set(a.id, b.id, p);
  return p;
}

std::vector<EmbeddingVector> OracleGateway::embed(std::span<const std::string> texts) {
  std::vector<std::string> missing;
  for (const auto& t : texts) {
    if (!embeddings_.count(t) && std::find(missing.begin(), missing.end(), t) == missing.end()) {
      missing.push_back(t);
    }
  }
  if (!missing.empty()) {
    if (!client_) throw Error(ErrorCode::CacheMiss, "no cached embedding for '" + missing[0] + "'");
    for (std::size_t start = 0; start < missing.size(); start += cfg_.batch_size) {
      const std::size_t end = std::min(missing.size(), start + cfg_.batch_size);
      std::span<const std::string> batch(missing.data() + start, end - start);
      auto vectors = client_->embed(batch);
      for (std::size_t i = 0; i < batch.size(); ++i) embeddings_[batch[i]] = std::move(vectors[i]);
    }
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    const Eigen::VectorXd& v = embeddings_.at(t);
    if (!out.empty() && out.front().dim() != v.size()) throw Error(ErrorCode::DimMismatch, t);
    out.push_back({"", v});
  }
  return out;
}

ContradictionMatrix OracleGateway::precompute_cache(std::span<const StatementPair> pairs,
                                                    const std::filesystem::path& out) {
  if (!client_) throw Error(ErrorCode::OracleUnreachable, "precompute needs the http backend");
  ContradictionMatrix result;
  if (std::filesystem::exists(out)) result = read_cache(out);
  const OracleClient::Health h = client_->health();
  result.model_tag = h.nli_model;
  result.dim = h.dim;

  std::vector<const StatementPair*> todo;
  std::set<ContradictionMatrix::Key> queued;
  for (const auto& p : pairs) {
    if (p.a.id == p.b.id || result.contains(p.a.id, p.b.id)) continue;
    if (queued.insert(ContradictionMatrix::key(p.a.id, p.b.id)).second) todo.push_back(&p);
  }
  // Fix the request order so reruns issue identical batches.
  std::sort(todo.begin(), todo.end(), [](const StatementPair* x, const StatementPair* y) {
    return ContradictionMatrix::key(x->a.id, x->b.id) < ContradictionMatrix::key(y->a.id, y->b.id);
  });

  write_cache(result, out);
  for (std::size_t start = 0; start < todo.size(); start += cfg_.batch_size) {
    const std::size_t end = std::min(todo.size(), start + cfg_.batch_size);
    std::vector<std::pair<std::string, std::string>> batch;
    for (std::size_t i = start; i < end; ++i) batch.emplace_back(todo[i]->a.text, todo[i]->b.text);
    std::vector<std::pair<NliProbabilities, NliProbabilities>> answers;
    try {
      answers = client_->contradiction(batch);
    } catch (const Error& e) {
      throw Error(ErrorCode::PartialBatch, std::to_string(start) + "/" + std::to_string(todo.size()) +
                                               " pairs cached in " + out.string() + "; " + e.what());
    }
    for (std::size_t i = start; i < end; ++i) {
      const auto& [fwd, bwd] = answers[i - start];
      result.set(todo[i]->a.id, todo[i]->b.id, 0.5 * (fwd.contradict + bwd.contradict));
    }
    write_cache(result, out);
  }
  for (const auto& [k, p] : result.entries()) cache_.set(k.first, k.second, p);
  cache_.model_tag = result.model_tag;
  cache_.dim = result.dim;
  return result;
}

std::vector<StatementPair> cluster_pairs(std::span<const SemanticCluster> clusters,
                                         std::span<const Statement> statements) {
  std::unordered_map<std::string, const Statement*> by_id;
  for (const auto& s : statements) by_id.emplace(s.id, &s);
  std::map<ContradictionMatrix::Key, StatementPair> unique;
  for (const auto& c : clusters) {
    for (auto i = c.per_position_members.begin(); i != c.per_position_members.end(); ++i) {
      for (auto j = std::next(i); j != c.per_position_members.end(); ++j) {
        for (const auto& a : i->second) {
          for (const auto& b : j->second) {
            auto sa = by_id.find(a), sb = by_id.find(b);
            if (sa == by_id.end()) throw Error(ErrorCode::InvalidArgument, "unknown statement " + a);
            if (sb == by_id.end()) throw Error(ErrorCode::InvalidArgument, "unknown statement " + b);
            auto k = ContradictionMatrix::key(a, b);
            const bool ordered = k.first == a;
            unique.emplace(k, ordered ? StatementPair{*sa->second, *sb->second}
                                      : StatementPair{*sb->second, *sa->second});
          }
        }
      }
    }
  }
  std::vector<StatementPair> out;
  out.reserve(unique.size());
  for (auto& [_, p] : unique) out.push_back(std::move(p));
  return out;
}

Json to_json(const StatementPair& p) {
  Json j;
  j["a_id"] = p.a.id;
  j["a_text"] = p.a.text;
  j["b_id"] = p.b.id;
  j["b_text"] = p.b.text;
  return j;
}

StatementPair statement_pair_from_json(const Json& obj, std::size_t line_no) {
  FieldReader r(obj, line_no);
  r.only({"a_id", "a_text", "b_id", "b_text"});
  StatementPair p;
  p.a.id = r.string("a_id");
  p.a.text = r.string("a_text");
  p.b.id = r.string("b_id");
  p.b.text = r.string("b_text");
  if (p.a.text.empty()) r.fail("a_text", "empty");
  if (p.b.text.empty()) r.fail("b_text", "empty");
  return p;
}

std::vector<StatementPair> load_statement_pairs(const std::filesystem::path& path) {
  std::vector<StatementPair> out;
  std::size_t line_no = 0;
  for (const Json& obj : read_json_lines(path)) out.push_back(statement_pair_from_json(obj, ++line_no));
  return out;
}

}  // namespace forge
