#include "forge/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "forge/corpus.hpp"
#include "forge/error.hpp"
#include "forge/prompts.hpp"
#include "forge/semantic_cluster.hpp"
#include "forge/spectrum.hpp"
#include "forge/stats.hpp"

namespace forge {
namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string path_key(const fs::path& p) { return fs::absolute(p).lexically_normal().generic_string(); }

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path raw(p);
  return raw.is_absolute() || base.empty() ? raw : base / raw;
}

Json oracle_to_json(const OracleConfig& o) {
  Json j;
  j["backend"] = o.backend == OracleBackend::Http ? "http" : "cache_file";
  if (o.endpoint) j["endpoint"] = *o.endpoint;
  j["cache_path"] = o.cache_path.generic_string();
  if (!o.embedding_cache_path.empty()) j["embedding_cache_path"] = o.embedding_cache_path.generic_string();
  j["batch_size"] = o.batch_size;
  j["timeout_ms"] = o.timeout_ms;
  j["retries"] = o.retries;
  return j;
}

Json stage_record_to_json(const StageRecord& r) {
  Json j;
  j["name"] = r.name;
  j["status"] = r.status;
  if (r.seed) j["seed"] = *r.seed;
  j["params"] = r.params;
  j["inputs"] = r.inputs;
  j["outputs"] = r.outputs;
  j["wall_clock_ms"] = r.wall_clock_ms;
  return j;
}

StageRecord stage_record_from_json(const Json& j) {
  StageRecord r;
  r.name = j.at("name").get<std::string>();
  r.status = j.at("status").get<std::string>();
  if (j.contains("seed")) r.seed = j.at("seed").get<std::uint64_t>();
  r.params = j.at("params");
  r.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
  r.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  r.wall_clock_ms = j.at("wall_clock_ms").get<std::int64_t>();
  return r;
}

struct Stage {
  std::string name;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  Json params = Json::object();
  std::optional<std::uint64_t> seed;
  std::function<void()> run;
};

// Output layout under out_dir.
struct Layout {
  fs::path root;
  fs::path data() const { return root / "data"; }
  fs::path sponsorships() const { return data() / "sponsorships.jsonl"; }
  fs::path statements() const { return data() / "statements.jsonl"; }
  fs::path bills() const { return data() / "bills.jsonl"; }
  fs::path scores() const { return data() / "scores.jsonl"; }
  fs::path embeddings() const { return data() / "embeddings.jsonl"; }
  fs::path matrix() const { return root / "matrix.csv"; }
  fs::path ideology() const { return root / "ideology.jsonl"; }
  fs::path mapping() const { return root / "mapping.jsonl"; }
  fs::path mapping_summary() const { return root / "mapping_summary.json"; }
  fs::path statements_mapped() const { return root / "statements_mapped.jsonl"; }
  fs::path clusters() const { return root / "clusters.jsonl"; }
  fs::path quintuplets() const { return root / "quintuplets.jsonl"; }
  fs::path ranked() const { return root / "ranked.jsonl"; }
  fs::path training() const { return root / "training"; }
  fs::path eval() const { return root / "eval"; }
  fs::path records() const { return root / ".forge" / "stages"; }
};

std::map<std::string, Position> positions_from(std::span<const IdeologyScore> scores) {
  std::map<std::string, Position> out;
  for (const auto& s : scores) {
    if (s.position) out[s.legislator_id] = *s.position;
  }
  return out;
}

std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::vector<Stage> build_stages(const PipelineConfig& cfg) {
  const Layout L{cfg.out_dir};
  const auto& in = cfg.inputs;
  std::vector<Stage> stages;

  stages.push_back({"ingest",
                    {in.sponsorships, in.statements, in.bills, in.scores, in.embeddings},
                    {L.sponsorships(), L.statements(), L.bills(), L.scores(), L.embeddings()},
                    Json::object(),
                    std::nullopt,
                    [L, in] {
                      write_json_lines(L.sponsorships(), ingest(RecordKind::Sponsorships, in.sponsorships));
                      write_json_lines(L.statements(), ingest(RecordKind::Statements, in.statements));
                      write_json_lines(L.bills(), ingest(RecordKind::Bills, in.bills));
                      write_json_lines(L.scores(), ingest(RecordKind::Scores, in.scores));
                      write_jsonl(load_embeddings(in.embeddings), L.embeddings());
                    }});

  stages.push_back({"matrix", {L.sponsorships()}, {L.matrix()}, Json::object(), std::nullopt, [L] {
                      write_matrix_csv(build_matrix(load_sponsorships(L.sponsorships())), L.matrix());
                    }});

  Json score_params = Json::object();
  if (cfg.anchors) score_params = {{"left", cfg.anchors->left_id}, {"right", cfg.anchors->right_id}};
  stages.push_back({"score", {L.matrix()}, {L.ideology()}, score_params, std::nullopt,
                    [L, anchors = cfg.anchors] {
                      write_jsonl(ideology_scores(read_matrix_csv(L.matrix()), anchors), L.ideology());
                    }});

  const std::uint64_t map_seed = cfg.seeds.at("map");
  stages.push_back({"map",
                    {L.ideology(), L.statements()},
                    {L.mapping(), L.mapping_summary(), L.statements_mapped()},
                    {{"k", cfg.k}},
                    map_seed,
                    [L, map_seed, k = cfg.k] {
                      const auto scores = load_ideology_scores(L.ideology());
                      const SpectrumMapping mapping = kmeans_map(scores, map_seed, k);
                      const auto mapped = apply_mapping(scores, mapping);
                      write_jsonl(mapped, L.mapping());
                      Json summary = {{"centroids", mapping.centroids},
                                      {"boundaries", mapping.boundaries},
                                      {"objective", mapping.objective}};
                      write_text_file(L.mapping_summary(), summary.dump(2) + "\n");
                      auto statements = load_statements(L.statements());
                      const auto positions = positions_from(mapped);
                      for (auto& s : statements) {
                        auto it = positions.find(s.speaker_id);
                        if (it != positions.end()) s.position = it->second;
                      }
                      write_jsonl(statements, L.statements_mapped());
                    }});

  stages.push_back({"cluster",
                    {L.statements_mapped(), L.embeddings()},
                    {L.clusters()},
                    {{"threshold", cfg.hac_threshold}, {"linkage", "average"}},
                    std::nullopt,
                    [L, t = cfg.hac_threshold] {
                      const auto statements = load_statements(L.statements_mapped());
                      const auto embeddings = load_embeddings(L.embeddings());
                      write_jsonl(cluster_statements(statements, embeddings, t), L.clusters());
                    }});

  const bool http = cfg.oracle.backend == OracleBackend::Http;
  const std::uint64_t q_seed = cfg.seeds.at("quintuplets");
  std::vector<fs::path> q_inputs = {L.clusters(), L.statements_mapped()};
  std::vector<fs::path> q_outputs = {L.quintuplets(), L.root / "quintuplets_skipped.json"};
  if (http) {
    q_outputs.push_back(cfg.oracle.cache_path);
  } else {
    q_inputs.push_back(cfg.oracle.cache_path);
  }
  stages.push_back({"quintuplets", q_inputs, q_outputs,
                    {{"max_iterations", cfg.optimizer.max_iterations},
                     {"patience", cfg.optimizer.patience},
                     {"backend", http ? "http" : "cache_file"}},
                    q_seed,
                    [L, oracle = cfg.oracle, opt = cfg.optimizer, q_seed, http] {
                      const auto clusters = load_clusters(L.clusters());
                      if (http) {
                        const auto statements = load_statements(L.statements_mapped());
                        OracleGateway gateway(oracle);
                        gateway.precompute_cache(cluster_pairs(clusters, statements), oracle.cache_path);
                      }
                      const ContradictionMatrix cache = read_cache(oracle.cache_path);
                      OptimizerConfig run = opt;
                      run.seed = q_seed;
                      const ForgeSummary summary = optimize_all(clusters, cache, run);
                      write_jsonl(summary.quintuplets, L.quintuplets());
                      write_text_file(L.root / "quintuplets_skipped.json",
                                      Json(summary.skipped_clusters).dump() + "\n");
                    }});

  stages.push_back({"rankset", {L.quintuplets(), cfg.oracle.cache_path}, {L.ranked()}, Json::object(),
                    std::nullopt, [L, cache_path = cfg.oracle.cache_path] {
                      write_jsonl(rankset(load_quintuplets(L.quintuplets()), read_cache(cache_path)),
                                  L.ranked());
                    }});

  const std::uint64_t e_seed = cfg.seeds.at("emit-training");
  const fs::path T = L.training();
  stages.push_back(
      {"emit-training",
       {L.ranked(), L.clusters(), L.statements_mapped(), L.bills(), in.qa, in.cloze},
       {T / "qa.jsonl", T / "qa_eval.jsonl", T / "cloze.jsonl", T / "ranking.jsonl", T / "bill.jsonl",
        T / "bill_vote.jsonl", T / "plan.json"},
       {{"ratio", cfg.ratio}},
       e_seed,
       [L, T, in, e_seed, ratio = cfg.ratio] {
         std::vector<ChatRecord> qa;
         std::size_t line_no = 0;
         for (const Json& obj : read_json_lines(in.qa)) {
           FieldReader f(obj, ++line_no);
           f.only({"question", "answer", "position"});
           auto pos = parse_position(f.string("position"));
           if (!pos) f.fail("position", "unknown position label");
           qa.push_back(build_qa_record(f.string("question"), f.string("answer"), *pos));
         }
         const auto [qa_train, qa_eval] = split_train_eval<ChatRecord>(
             qa, ratio, [](const ChatRecord& r) { return tag_string(r.tag); }, e_seed);
         write_jsonl(qa_train, T / "qa.jsonl");
         write_jsonl(qa_eval, T / "qa_eval.jsonl");

         std::vector<ChatRecord> cloze;
         line_no = 0;
         for (const Json& obj : read_json_lines(in.cloze)) {
           FieldReader f(obj, ++line_no);
           f.only({"sentence", "leaning"});
           auto leaning = parse_leaning(f.string("leaning"));
           if (!leaning) f.fail("leaning", "expected Left, Center or Right");
           if (auto c = cloze_from_sentence(clean_sentence(f.string("sentence")))) {
             cloze.push_back(build_cloze_record(*c, *leaning));
           }
         }
         write_jsonl(cloze, T / "cloze.jsonl");

         std::map<std::string, std::string> issue;
         for (const auto& c : load_clusters(L.clusters())) issue[c.cluster_id] = c.issue;
         std::map<std::string, std::string> text;
         for (const auto& s : load_statements(L.statements_mapped())) text[s.id] = s.text;
         std::vector<ChatRecord> ranking;
         const auto sets = load_ranked_sets(L.ranked());
         for (std::size_t i = 0; i < sets.size(); ++i) {
           std::vector<std::string> ordered;
           for (const auto& id : sets[i].order) ordered.push_back(text.at(id));
           ranking.push_back(build_ranking_record(issue.at(sets[i].quintuplet_id), ordered,
                                                  sets[i].position, e_seed + i));
         }
         write_jsonl(ranking, T / "ranking.jsonl");

         std::vector<ChatRecord> bill, vote;
         for (const auto& b : load_bills(L.bills())) {
           if (!b.legislative_subjects.empty()) bill.push_back(build_bill_record(b, BillMode::Comprehension));
           if (!b.sponsor_party.empty()) vote.push_back(build_bill_record(b, BillMode::Vote));
         }
         write_jsonl(bill, T / "bill.jsonl");
         write_jsonl(vote, T / "bill_vote.jsonl");

         emit_stage_plan({{ChatTask::QA, "qa.jsonl"},
                          {ChatTask::Cloze, "cloze.jsonl"},
                          {ChatTask::BillComprehension, "bill.jsonl"},
                          {ChatTask::Ranking, "ranking.jsonl"}},
                         T);
       }});

  const fs::path E = L.eval();
  std::vector<fs::path> e_inputs = {L.ranked(), L.scores()};
  std::vector<fs::path> e_outputs = {E / "rank_agreement.jsonl", E / "heatmap.json", E / "positioning.jsonl"};
  if (in.votes) {
    e_inputs.insert(e_inputs.end(), {*in.votes, L.matrix(), L.mapping(), L.bills()});
    e_outputs.push_back(E / "voting.jsonl");
  }
  const bool csv = std::find(cfg.report_formats.begin(), cfg.report_formats.end(), "csv") !=
                   cfg.report_formats.end();
  if (csv) e_outputs.insert(e_outputs.end(), {E / "heatmap.csv", E / "tukey.csv"});
  stages.push_back(
      {"eval", e_inputs, e_outputs, {{"formats", cfg.report_formats}}, std::nullopt,
       [L, E, in, csv, anchors = cfg.anchors] {
         std::vector<RankedList> lists;
         for (const auto& s : load_ranked_sets(L.ranked())) {
           lists.push_back(RankedList::from_order(s.quintuplet_id, {s.order.begin(), s.order.end()}, s.position));
         }
         const auto cells = agreement_matrix(lists, lists);
         std::vector<Json> rows;
         Json heat = Json::array();
         std::map<std::pair<Position, Position>, double> grid;
         for (const auto& c : cells) {
           rows.push_back(to_json(c));
           grid[{c.a, c.b}] = c.agreement.mean_rho;
         }
         write_json_lines(E / "rank_agreement.jsonl", rows);
         std::vector<std::string> labels;
         for (Position p : kAllPositions) labels.emplace_back(to_string(p));
         for (Position a : kAllPositions) {
           Json row = Json::array();
           for (Position b : kAllPositions) {
             auto it = grid.find({a, b});
             row.push_back(it == grid.end() ? Json(nullptr) : Json(it->second));
           }
           heat.push_back(row);
         }
         write_text_file(E / "heatmap.json", Json{{"positions", labels}, {"mean_rho", heat}}.dump(2) + "\n");

         const auto reports = positioning_report(load_scores(L.scores()));
         std::vector<Json> prow;
         for (const auto& r : reports) prow.push_back(to_json(r));
         write_json_lines(E / "positioning.jsonl", prow);

         if (in.votes) {
           const auto votes = load_votes(*in.votes);
           const auto bills = load_bills(L.bills());
           const auto matrix = read_matrix_csv(L.matrix());
           const auto positions = positions_from(load_ideology_scores(L.mapping()));
           std::set<std::string> agents;
           for (const auto& v : votes) agents.insert(v.agent_id);
           std::vector<Json> vrows;
           for (const auto& agent : agents) {
             for (const auto& c : score_agent(matrix, bills, votes, agent, anchors, positions)) {
               vrows.push_back(to_json(c, agent));
             }
           }
           write_json_lines(E / "voting.jsonl", vrows);
         }

         if (csv) {
           std::string h = "position";
           for (const auto& l : labels) h += "," + l;
           h += "\n";
           for (Position a : kAllPositions) {
             h += std::string(to_string(a));
             for (Position b : kAllPositions) {
               auto it = grid.find({a, b});
               h += "," + (it == grid.end() ? std::string() : csv_number(it->second));
             }
             h += "\n";
           }
           write_text_file(E / "heatmap.csv", h);
           std::string t = "test,axis,first,second,mean_diff,ci_low,ci_high,p_adj,significant\n";
           for (const auto& r : reports) {
             for (const auto& c : r.contrasts) {
               t += std::string(to_string(r.test)) + "," + std::string(to_string(r.axis)) + "," +
                    std::string(to_string(c.first)) + "," + std::string(to_string(c.second)) + "," +
                    csv_number(c.mean_diff) + "," + csv_number(c.ci_low) + "," + csv_number(c.ci_high) +
                    "," + csv_number(c.p_adj) + "," + (c.significant ? "true" : "false") + "\n";
             }
           }
           write_text_file(E / "tukey.csv", t);
         }
       }});
  return stages;
}

}  // namespace

PipelineConfig config_from_json(const Json& doc, const fs::path& base_dir) {
  FieldReader top(doc, 0);
  top.only({"out_dir", "inputs", "oracle", "anchors", "seeds", "thresholds", "optimizer", "reports"});
  PipelineConfig cfg;
  cfg.out_dir = resolve(base_dir, top.string("out_dir"));

  const Json& inputs = top.raw("inputs");
  FieldReader in(inputs, 0);
  in.only({"sponsorships", "statements", "embeddings", "bills", "scores", "qa", "cloze", "votes"});
  cfg.inputs.sponsorships = resolve(base_dir, in.string("sponsorships"));
  cfg.inputs.statements = resolve(base_dir, in.string("statements"));
  cfg.inputs.embeddings = resolve(base_dir, in.string("embeddings"));
  cfg.inputs.bills = resolve(base_dir, in.string("bills"));
  cfg.inputs.scores = resolve(base_dir, in.string("scores"));
  cfg.inputs.qa = resolve(base_dir, in.string("qa"));
  cfg.inputs.cloze = resolve(base_dir, in.string("cloze"));
  if (auto v = in.optional_string("votes")) cfg.inputs.votes = resolve(base_dir, *v);

  FieldReader o(top.raw("oracle"), 0);
  o.only({"backend", "endpoint", "cache_path", "embedding_cache_path", "batch_size", "timeout_ms", "retries"});
  const std::string backend = o.optional_string("backend").value_or("cache_file");
  if (backend == "http") {
    cfg.oracle.backend = OracleBackend::Http;
  } else if (backend != "cache_file") {
    o.fail("backend", "expected cache_file or http");
  }
  cfg.oracle.endpoint = o.optional_string("endpoint");
  cfg.oracle.cache_path = resolve(base_dir, o.string("cache_path"));
  if (auto e = o.optional_string("embedding_cache_path")) cfg.oracle.embedding_cache_path = resolve(base_dir, *e);
  if (top.raw("oracle").contains("batch_size")) cfg.oracle.batch_size = static_cast<std::size_t>(o.integer("batch_size"));
  if (top.raw("oracle").contains("timeout_ms")) cfg.oracle.timeout_ms = static_cast<int>(o.integer("timeout_ms"));
  if (top.raw("oracle").contains("retries")) cfg.oracle.retries = static_cast<int>(o.integer("retries"));

  if (doc.contains("anchors")) {
    FieldReader a(top.raw("anchors"), 0);
    a.only({"left", "right"});
    cfg.anchors = Anchors{a.string("left"), a.string("right")};
  }

  const Json& seeds = top.raw("seeds");
  if (!seeds.is_object()) top.fail("seeds", "expected object");
  for (const auto& item : seeds.items()) {
    const Json& v = item.value();
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) top.fail("seeds", "seed " + item.key() + " must be a nonnegative integer");
    cfg.seeds[item.key()] = item.value().get<std::uint64_t>();
  }

  if (doc.contains("thresholds")) {
    const Json& t = top.raw("thresholds");
    FieldReader th(t, 0);
    th.only({"hac", "k", "ratio"});
    if (t.contains("hac")) cfg.hac_threshold = th.number("hac");
    if (t.contains("k")) cfg.k = static_cast<std::size_t>(th.integer("k"));
    if (t.contains("ratio")) cfg.ratio = th.number("ratio");
  }
  if (doc.contains("optimizer")) {
    const Json& t = top.raw("optimizer");
    FieldReader op(t, 0);
    op.only({"max_iterations", "patience"});
    if (t.contains("max_iterations")) cfg.optimizer.max_iterations = static_cast<std::size_t>(op.integer("max_iterations"));
    if (t.contains("patience")) cfg.optimizer.patience = static_cast<std::size_t>(op.integer("patience"));
  }
  if (doc.contains("reports")) {
    FieldReader r(top.raw("reports"), 0);
    r.only({"formats"});
    cfg.report_formats = r.string_list("formats");
  }
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  const std::string text = read_text_file(path);
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::MalformedLine, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::SchemaViolation, "config must be a JSON object");
  return config_from_json(doc, path.parent_path());
}

Json to_json(const PipelineConfig& cfg) {
  Json j;
  j["out_dir"] = cfg.out_dir.generic_string();
  Json in;
  in["sponsorships"] = cfg.inputs.sponsorships.generic_string();
  in["statements"] = cfg.inputs.statements.generic_string();
  in["embeddings"] = cfg.inputs.embeddings.generic_string();
  in["bills"] = cfg.inputs.bills.generic_string();
  in["scores"] = cfg.inputs.scores.generic_string();
  in["qa"] = cfg.inputs.qa.generic_string();
  in["cloze"] = cfg.inputs.cloze.generic_string();
  if (cfg.inputs.votes) in["votes"] = cfg.inputs.votes->generic_string();
  j["inputs"] = in;
  j["oracle"] = oracle_to_json(cfg.oracle);
  if (cfg.anchors) j["anchors"] = {{"left", cfg.anchors->left_id}, {"right", cfg.anchors->right_id}};
  j["seeds"] = cfg.seeds;
  j["thresholds"] = {{"hac", cfg.hac_threshold}, {"k", cfg.k}, {"ratio", cfg.ratio}};
  j["optimizer"] = {{"max_iterations", cfg.optimizer.max_iterations}, {"patience", cfg.optimizer.patience}};
  j["reports"] = {{"formats", cfg.report_formats}};
  return j;
}

void validate(const PipelineConfig& cfg) {
  auto need = [](const fs::path& p, std::string_view what) {
    if (p.empty()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " path is empty");
  };
  need(cfg.out_dir, "out_dir");
  need(cfg.inputs.sponsorships, "sponsorships");
  need(cfg.inputs.statements, "statements");
  need(cfg.inputs.embeddings, "embeddings");
  need(cfg.inputs.bills, "bills");
  need(cfg.inputs.scores, "scores");
  need(cfg.inputs.qa, "qa");
  need(cfg.inputs.cloze, "cloze");
  if (cfg.inputs.votes) need(*cfg.inputs.votes, "votes");
  need(cfg.oracle.cache_path, "oracle cache");
  validate(cfg.oracle);
  for (auto stage : kSeededStages) {
    if (!cfg.seeds.contains(std::string(stage))) {
      throw Error(ErrorCode::InvalidArgument, "no seed for stage " + std::string(stage));
    }
  }
  if (!(cfg.hac_threshold > 0.0 && cfg.hac_threshold < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "hac threshold must lie in (0,1)");
  }
  if (cfg.k != 5) throw Error(ErrorCode::InvalidArgument, "k must be 5");
  if (!(cfg.ratio > 0.0 && cfg.ratio < 1.0)) throw Error(ErrorCode::InvalidArgument, "ratio must lie in (0,1)");
  for (const auto& f : cfg.report_formats) {
    if (f != "jsonl" && f != "csv") throw Error(ErrorCode::InvalidArgument, "unknown report format " + f);
  }
}

void apply_env_overrides(PipelineConfig& cfg) {
  const char* endpoint = std::getenv("FORGE_ORACLE_ENDPOINT");
  if (endpoint != nullptr && *endpoint != '\0' && cfg.oracle.backend == OracleBackend::Http) {
    cfg.oracle.endpoint = endpoint;
  }
}

std::vector<std::string> parse_stage_list(std::string_view text) {
  std::set<std::string> wanted;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string name(text.substr(start, end - start));
    if (!name.empty()) {
      if (std::find(kStages.begin(), kStages.end(), name) == kStages.end()) {
        throw Error(ErrorCode::InvalidArgument, "unknown stage " + name);
      }
      wanted.insert(name);
    }
    start = end + 1;
  }
  std::vector<std::string> out;
  for (auto s : kStages) {
    if (wanted.contains(std::string(s))) out.emplace_back(s);
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoFailure, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

std::string file_sha256(const fs::path& path) { return sha256_hex(read_text_file(path)); }

RunManifest run_pipeline(const PipelineConfig& cfg, const std::vector<std::string>& stages,
                         const RunOptions& opts) {
  validate(cfg);
  RunManifest manifest;
  manifest.started_at = utc_now();
  manifest.config_digest = sha256_hex(to_json(cfg).dump());
  const Layout L{cfg.out_dir};

  std::vector<std::string> order = parse_stage_list([&] {
    std::string joined;
    for (const auto& s : stages) joined += s + ",";
    return joined;
  }());
  auto all = build_stages(cfg);

  for (const auto& name : order) {
    Stage& st = *std::find_if(all.begin(), all.end(), [&](const Stage& s) { return s.name == name; });
    for (const auto& p : st.inputs) {
      if (!fs::exists(p)) throw Error(ErrorCode::MissingDependency, name + " needs " + path_key(p));
    }
    StageRecord rec;
    rec.name = name;
    rec.seed = st.seed;
    rec.params = st.params;
    for (const auto& p : st.inputs) rec.inputs[path_key(p)] = file_sha256(p);

    const fs::path record_path = L.records() / (name + ".json");
    bool hit = false;
    if (!opts.force && fs::exists(record_path)) {
      const StageRecord prev = stage_record_from_json(Json::parse(read_text_file(record_path)));
      if (prev.inputs == rec.inputs && prev.params == rec.params && prev.seed == rec.seed) {
        bool complete = true;
        for (const auto& [path, digest] : prev.outputs) {
          if (!fs::exists(path)) {
            complete = false;
            continue;
          }
          if (file_sha256(path) != digest) {
            throw Error(ErrorCode::DigestMismatch, name + ": " + path + " changed since the last run");
          }
        }
        if (complete && prev.outputs.size() == st.outputs.size()) {
          hit = true;
          rec.outputs = prev.outputs;
        }
      }
    }

    if (hit) {
      rec.status = "cache_hit";
    } else {
      const auto t0 = std::chrono::steady_clock::now();
      st.run();
      rec.wall_clock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
      rec.status = "ran";
      for (const auto& p : st.outputs) rec.outputs[path_key(p)] = file_sha256(p);
      write_text_file(record_path, stage_record_to_json(rec).dump(2) + "\n");
    }
    manifest.stages.push_back(rec);
  }
  manifest.finished_at = utc_now();
  write_text_file(L.root / "manifest.json", to_json(manifest).dump(2) + "\n");
  return manifest;
}

Json to_json(const RunManifest& m) {
  Json j;
  j["tool"] = "forge";
  j["version"] = m.version;
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  j["config_digest"] = m.config_digest;
  Json stages = Json::array();
  for (const auto& s : m.stages) stages.push_back(stage_record_to_json(s));
  j["stages"] = stages;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  return j;
}

std::vector<AgentComparison> score_agent(const CosponsorMatrix& matrix, std::span<const Bill> bills,
                                         std::span<const VoteRecord> votes, const std::string& agent_id,
                                         const std::optional<Anchors>& anchors,
                                         const std::map<std::string, Position>& positions) {
  const CosponsorMatrix augmented = incorporate_agent_votes(matrix, votes, bills, agent_id);
  auto scores = ideology_scores(augmented, anchors);
  for (auto& s : scores) {
    if (s.legislator_id == agent_id) continue;
    auto it = positions.find(s.legislator_id);
    if (it == positions.end()) throw Error(ErrorCode::MissingPosition, s.legislator_id);
    s.position = it->second;
  }
  return compare_agent(scores, agent_id);
}

Json to_json(const AgentComparison& c, const std::string& agent_id) {
  Json j;
  j["agent"] = agent_id;
  j["position"] = std::string(to_string(c.position));
  j["ideology"] = c.ideology;
  j["h_mean"] = c.h_mean;
  j["h_std"] = c.h_std;
  j["z"] = c.z.z;
  j["percentile"] = c.percentile;
  j["aligned"] = c.z.aligned;
  return j;
}

}  // namespace forge
