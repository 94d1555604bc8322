// forge: command-line front end for the forge pipeline toolkit.

#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "forge/corpus.hpp"
#include "forge/cosponsor.hpp"
#include "forge/error.hpp"
#include "forge/ideology.hpp"
#include "forge/oracle.hpp"
#include "forge/pipeline.hpp"
#include "forge/prompts.hpp"
#include "forge/quintuplet.hpp"
#include "forge/semantic_cluster.hpp"
#include "forge/spectrum.hpp"
#include "forge/stats.hpp"
#include "forge/synth.hpp"

namespace fs = std::filesystem;
using namespace forge;

namespace {

std::optional<Anchors> parse_anchors(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto comma = text.find(',');
  if (comma == std::string::npos || comma == 0 || comma + 1 == text.size()) {
    throw Error(ErrorCode::InvalidArgument, "anchors must be LEFT,RIGHT");
  }
  return Anchors{text.substr(0, comma), text.substr(comma + 1)};
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<Json> as_lines(const auto& records) {
  std::vector<Json> out;
  for (const auto& r : records) out.push_back(to_json(r));
  return out;
}

// Labels keyed by legislator id from an ideology-score file with positions.
std::map<std::string, std::string> labels_of(const fs::path& path) {
  std::map<std::string, std::string> out;
  for (const auto& s : load_ideology_scores(path)) {
    if (!s.position) throw Error(ErrorCode::MissingPosition, s.legislator_id);
    out[s.legislator_id] = std::string(to_string(*s.position));
  }
  return out;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"forge: ideology scoring, quintuplet forging and assessment statistics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kForgeVersion));

  // ingest
  std::string kind, in_path, out_path;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate and normalize a JSONL input");
  ingest_cmd->add_option("--kind", kind, "statements|bills|sponsorships|votes|scores")->required();
  ingest_cmd->add_option("--in", in_path)->required();
  ingest_cmd->add_option("--out", out_path)->required();
  ingest_cmd->callback([&] {
    const auto k = parse_record_kind(kind);
    if (!k) throw Error(ErrorCode::InvalidArgument, "unknown kind " + kind);
    const auto records = ingest(*k, in_path);
    write_json_lines(out_path, records);
    std::cout << records.size() << " records\n";
  });

  // sample
  std::size_t target = 0;
  std::string key_field;
  std::uint64_t seed = 0;
  auto* sample_cmd = app.add_subcommand("sample", "Stratified sample of a JSONL file");
  sample_cmd->add_option("--in", in_path)->required();
  sample_cmd->add_option("--out", out_path)->required();
  sample_cmd->add_option("--target", target)->required();
  sample_cmd->add_option("--key", key_field, "Stratum field")->required();
  sample_cmd->add_option("--seed", seed);
  sample_cmd->callback([&] {
    const auto records = read_json_lines(in_path);
    std::vector<std::string> keys;
    for (const auto& r : records) keys.push_back(json_field_key(r, key_field));
    std::vector<Json> out;
    for (std::size_t i : stratified_sample_indices(keys, target, seed)) out.push_back(records[i]);
    write_json_lines(out_path, out);
    std::cout << out.size() << " records\n";
  });

  // split
  double ratio = 0.8;
  std::string stratify, train_path, eval_path;
  auto* split_cmd = app.add_subcommand("split", "Stratified train/eval split of a JSONL file");
  split_cmd->add_option("--in", in_path)->required();
  split_cmd->add_option("--train", train_path)->required();
  split_cmd->add_option("--eval", eval_path)->required();
  split_cmd->add_option("--ratio", ratio);
  split_cmd->add_option("--stratify", stratify, "Stratum field")->required();
  split_cmd->add_option("--seed", seed);
  split_cmd->callback([&] {
    const auto records = read_json_lines(in_path);
    std::vector<std::string> keys;
    for (const auto& r : records) keys.push_back(json_field_key(r, stratify));
    const SplitIndices idx = split_indices(keys, ratio, seed);
    std::vector<Json> train, eval;
    for (std::size_t i : idx.train) train.push_back(records[i]);
    for (std::size_t i : idx.eval) eval.push_back(records[i]);
    write_json_lines(train_path, train);
    write_json_lines(eval_path, eval);
    std::cout << train.size() << " train, " << eval.size() << " eval\n";
  });

  // matrix, matrix augment
  std::string sponsorships_path, matrix_path, votes_path, bills_path, agent;
  auto* matrix_cmd = app.add_subcommand("matrix", "Build the co-sponsorship count matrix");
  matrix_cmd->add_option("--sponsorships", sponsorships_path);
  matrix_cmd->add_option("--out", out_path);
  auto* augment_cmd = matrix_cmd->add_subcommand("augment", "Append an agent's votes as a new legislator");
  augment_cmd->add_option("--matrix", matrix_path)->required();
  augment_cmd->add_option("--votes", votes_path)->required();
  augment_cmd->add_option("--bills", bills_path)->required();
  augment_cmd->add_option("--agent", agent)->required();
  augment_cmd->add_option("--out", out_path);
  augment_cmd->callback([&] {
    const auto m = incorporate_agent_votes(read_matrix_csv(matrix_path), load_votes(votes_path),
                                           load_bills(bills_path), agent);
    write_matrix_csv(m, out_path.empty() ? fs::path(matrix_path) : fs::path(out_path));
  });
  matrix_cmd->callback([&] {
    if (!augment_cmd->parsed()) {
      if (sponsorships_path.empty() || out_path.empty()) {
        throw Error(ErrorCode::InvalidArgument, "matrix needs --sponsorships and --out");
      }
      const auto m = build_matrix(load_sponsorships(sponsorships_path));
      write_matrix_csv(m, out_path);
      std::cout << m.size() << " legislators\n";
    }
  });

  // score, score compare
  std::string anchors_text, scores_path, positions_path;
  std::string dist_by = "position";
  auto* score_cmd = app.add_subcommand("score", "SVD ideology scores from a count matrix");
  score_cmd->add_option("--matrix", matrix_path);
  score_cmd->add_option("--anchors", anchors_text, "LEFT_ID,RIGHT_ID");
  score_cmd->add_option("--out", out_path);
  auto* compare_cmd = score_cmd->add_subcommand("compare", "Compare an agent with each position's distribution");
  compare_cmd->add_option("--scores", scores_path)->required();
  compare_cmd->add_option("--positions", positions_path, "Mapping file supplying positions");
  compare_cmd->add_option("--dist-by", dist_by)->check(CLI::IsMember({"position"}));
  compare_cmd->add_option("--agent", agent)->required();
  compare_cmd->add_option("--out", out_path);
  compare_cmd->callback([&] {
    auto scores = load_ideology_scores(scores_path);
    if (!positions_path.empty()) {
      const auto labels = labels_of(positions_path);
      for (auto& s : scores) {
        auto it = labels.find(s.legislator_id);
        if (it != labels.end()) s.position = parse_position(it->second);
      }
    }
    const auto rows = compare_agent(scores, agent);
    std::cout << "position\tH_mean\tH_std\tideology\tz\tpercentile\taligned\n";
    std::vector<Json> lines;
    for (const auto& c : rows) {
      std::cout << to_string(c.position) << '\t' << fixed(c.h_mean) << '\t' << fixed(c.h_std) << '\t'
                << fixed(c.ideology) << '\t' << fixed(c.z.z, 3) << '\t' << fixed(c.percentile, 1) << '\t'
                << (c.z.aligned ? "yes" : "no") << '\n';
      lines.push_back(to_json(c, agent));
    }
    if (!out_path.empty()) write_json_lines(out_path, lines);
  });
  score_cmd->callback([&] {
    if (!compare_cmd->parsed()) {
      if (matrix_path.empty() || out_path.empty()) {
        throw Error(ErrorCode::InvalidArgument, "score needs --matrix and --out");
      }
      const auto scores = ideology_scores(read_matrix_csv(matrix_path), parse_anchors(anchors_text));
      write_json_lines(out_path, as_lines(scores));
      std::cout << scores.size() << " scores\n";
    }
  });

  // map, map quality
  std::size_t k = 5;
  std::string true_path, pred_path;
  auto* map_cmd = app.add_subcommand("map", "Map ideology scores onto five positions");
  map_cmd->add_option("--scores", scores_path);
  map_cmd->add_option("--k", k);
  map_cmd->add_option("--seed", seed);
  map_cmd->add_option("--out", out_path);
  auto* quality_cmd = map_cmd->add_subcommand("quality", "Cluster quality of predicted positions");
  quality_cmd->add_option("--true", true_path)->required();
  quality_cmd->add_option("--pred", pred_path)->required();
  quality_cmd->callback([&] {
    const auto t = labels_of(true_path);
    const auto p = labels_of(pred_path);
    std::vector<std::string> tl, pl;
    for (const auto& [id, label] : t) {
      auto it = p.find(id);
      if (it == p.end()) throw Error(ErrorCode::LengthMismatch, "no prediction for " + id);
      tl.push_back(label);
      pl.push_back(it->second);
    }
    if (tl.size() != p.size()) throw Error(ErrorCode::LengthMismatch, "prediction ids differ from truth");
    const ClusterQuality q = cluster_quality(tl, pl);
    std::cout << "fowlkes_mallows\t" << fixed(q.fowlkes_mallows) << "\nhomogeneity\t"
              << fixed(q.hcv.homogeneity) << "\ncompleteness\t" << fixed(q.hcv.completeness)
              << "\nv_measure\t" << fixed(q.hcv.v_measure) << '\n';
    for (const auto& [label, value] : q.purity_per_class) {
      std::cout << "purity[" << label << "]\t" << fixed(value) << '\n';
    }
  });
  map_cmd->callback([&] {
    if (!quality_cmd->parsed()) {
      if (scores_path.empty() || out_path.empty()) {
        throw Error(ErrorCode::InvalidArgument, "map needs --scores and --out");
      }
      const auto scores = load_ideology_scores(scores_path);
      const auto mapping = kmeans_map(scores, seed, k);
      write_json_lines(out_path, as_lines(apply_mapping(scores, mapping)));
      std::cout << "centroids";
      for (double c : mapping.centroids) std::cout << ' ' << fixed(c);
      std::cout << '\n';
    }
  });

  // cluster
  std::string statements_path, embeddings_path;
  double threshold = 0.7;
  auto* cluster_cmd = app.add_subcommand("cluster", "Group statements into issue clusters");
  cluster_cmd->add_option("--statements", statements_path)->required();
  cluster_cmd->add_option("--embeddings", embeddings_path)->required();
  cluster_cmd->add_option("--threshold", threshold);
  cluster_cmd->add_option("--out", out_path)->required();
  cluster_cmd->callback([&] {
    const auto clusters =
        cluster_statements(load_statements(statements_path), load_embeddings(embeddings_path), threshold);
    write_json_lines(out_path, as_lines(clusters));
    std::cout << clusters.size() << " clusters\n";
  });

  // oracle precompute
  std::string pairs_path, endpoint, token;
  OracleConfig oracle_cfg;
  auto* oracle_cmd = app.add_subcommand("oracle", "Contradiction oracle utilities");
  oracle_cmd->require_subcommand(1);
  auto* precompute_cmd = oracle_cmd->add_subcommand("precompute", "Fill a contradiction cache over HTTP");
  precompute_cmd->add_option("--pairs", pairs_path)->required();
  precompute_cmd->add_option("--endpoint", endpoint)->envname("FORGE_ORACLE_ENDPOINT")->required();
  precompute_cmd->add_option("--out", out_path)->required();
  precompute_cmd->add_option("--batch-size", oracle_cfg.batch_size);
  precompute_cmd->add_option("--timeout-ms", oracle_cfg.timeout_ms);
  precompute_cmd->add_option("--retries", oracle_cfg.retries);
  precompute_cmd->add_option("--token", token);
  precompute_cmd->callback([&] {
    oracle_cfg.backend = OracleBackend::Http;
    oracle_cfg.endpoint = endpoint;
    if (!token.empty()) oracle_cfg.token = token;
    OracleGateway gateway(oracle_cfg);
    const auto cache = gateway.precompute_cache(load_statement_pairs(pairs_path), out_path);
    std::cout << cache.pair_count() << " pairs cached\n";
  });

  // quintuplets
  std::string clusters_path, cache_path;
  OptimizerConfig opt;
  auto* quint_cmd = app.add_subcommand("quintuplets", "Optimize one quintuplet per cluster");
  quint_cmd->add_option("--clusters", clusters_path)->required();
  quint_cmd->add_option("--cache", cache_path)->required();
  quint_cmd->add_option("--seed", seed);
  quint_cmd->add_option("--max-iterations", opt.max_iterations);
  quint_cmd->add_option("--patience", opt.patience);
  quint_cmd->add_option("--out", out_path)->required();
  quint_cmd->callback([&] {
    opt.seed = seed;
    const auto summary = optimize_all(load_clusters(clusters_path), read_cache(cache_path), opt);
    write_json_lines(out_path, as_lines(summary.quintuplets));
    std::cout << summary.quintuplets.size() << " quintuplets, " << summary.skipped_clusters.size()
              << " clusters skipped\n";
    for (const auto& id : summary.skipped_clusters) std::cerr << "skipped " << id << ": missing a position\n";
  });

  // rankset
  std::string quints_path;
  auto* rankset_cmd = app.add_subcommand("rankset", "Position-specific re-rankings of quintuplets");
  rankset_cmd->add_option("--quints", quints_path)->required();
  rankset_cmd->add_option("--cache", cache_path)->required();
  rankset_cmd->add_option("--out", out_path)->required();
  rankset_cmd->callback([&] {
    const auto sets = rankset(load_quintuplets(quints_path), read_cache(cache_path));
    write_json_lines(out_path, as_lines(sets));
    std::cout << sets.size() << " ranked lists\n";
  });

  // eval rank-agreement, eval positioning
  std::string a_path, b_path;
  double alpha = 0.05;
  auto* eval_cmd = app.add_subcommand("eval", "Assessment statistics");
  eval_cmd->require_subcommand(1);
  auto* agree_cmd = eval_cmd->add_subcommand("rank-agreement", "Mean Spearman rho between positions");
  agree_cmd->add_option("--a", a_path)->required();
  agree_cmd->add_option("--b", b_path)->required();
  agree_cmd->add_option("--out", out_path)->required();
  agree_cmd->callback([&] {
    const auto cells = agreement_matrix(load_ranked_lists(a_path), load_ranked_lists(b_path));
    std::vector<Json> lines;
    for (const auto& c : cells) {
      lines.push_back(to_json(c));
      std::cout << to_string(c.a) << '\t' << to_string(c.b) << '\t' << fixed(c.agreement.mean_rho, 3)
                << to_string(c.agreement.stars) << '\n';
    }
    write_json_lines(out_path, lines);
  });
  auto* pos_cmd = eval_cmd->add_subcommand("positioning", "ANOVA and Tukey HSD per test and axis");
  pos_cmd->add_option("--scores", scores_path)->required();
  pos_cmd->add_option("--alpha", alpha);
  pos_cmd->add_option("--out", out_path)->required();
  pos_cmd->callback([&] {
    const auto reports = positioning_report(load_scores(scores_path), alpha);
    std::vector<Json> lines;
    for (const auto& r : reports) {
      lines.push_back(to_json(r));
      std::cout << to_string(r.test) << '\t' << to_string(r.axis) << "\tF=" << fixed(r.anova.f_stat, 3)
                << "\tp=" << fixed(r.anova.p_value, 6) << '\n';
    }
    write_json_lines(out_path, lines);
  });

  // emit-training
  std::string task, mode = "comprehension";
  auto* emit_cmd = app.add_subcommand("emit-training", "Render ChatML training records");
  emit_cmd->add_option("--task", task)->required()->check(CLI::IsMember({"qa", "cloze", "ranking", "bill"}));
  emit_cmd->add_option("--in", in_path)->required();
  emit_cmd->add_option("--out", out_path)->required();
  emit_cmd->add_option("--mode", mode, "Bill records: comprehension|vote")
      ->check(CLI::IsMember({"comprehension", "vote"}));
  emit_cmd->add_option("--seed", seed, "Statement shuffle seed for ranking records");
  emit_cmd->callback([&] {
    std::vector<ChatRecord> out;
    std::size_t skipped = 0;
    if (task == "bill") {
      for (const auto& b : load_bills(in_path)) {
        out.push_back(build_bill_record(b, mode == "vote" ? BillMode::Vote : BillMode::Comprehension));
      }
    } else {
      std::size_t line_no = 0;
      for (const Json& obj : read_json_lines(in_path)) {
        FieldReader f(obj, ++line_no);
        if (task == "qa") {
          f.only({"question", "answer", "position"});
          auto p = parse_position(f.string("position"));
          if (!p) f.fail("position", "unknown position label");
          out.push_back(build_qa_record(f.string("question"), f.string("answer"), *p));
        } else if (task == "cloze") {
          f.only({"sentence", "leaning"});
          auto l = parse_leaning(f.string("leaning"));
          if (!l) f.fail("leaning", "expected Left, Center or Right");
          if (auto c = cloze_from_sentence(clean_sentence(f.string("sentence")))) {
            out.push_back(build_cloze_record(*c, *l));
          } else {
            ++skipped;
          }
        } else {
          f.only({"topic", "ranked", "position"});
          auto p = parse_position(f.string("position"));
          if (!p) f.fail("position", "unknown position label");
          out.push_back(build_ranking_record(f.string("topic"), f.string_list("ranked"), *p, seed + line_no - 1));
        }
      }
    }
    write_json_lines(out_path, as_lines(out));
    std::cout << out.size() << " records";
    if (skipped) std::cout << ", " << skipped << " sentences without a cloze pattern";
    std::cout << '\n';
  });

  // plan
  std::string out_dir;
  std::map<std::string, std::string> plan_paths = {
      {"qa", "qa.jsonl"}, {"cloze", "cloze.jsonl"}, {"bill", "bill.jsonl"}, {"ranking", "ranking.jsonl"}};
  auto* plan_cmd = app.add_subcommand("plan", "Write the two-stage fine-tuning plan");
  plan_cmd->add_option("--out-dir", out_dir)->required();
  plan_cmd->add_option("--qa", plan_paths["qa"]);
  plan_cmd->add_option("--cloze", plan_paths["cloze"]);
  plan_cmd->add_option("--bill", plan_paths["bill"]);
  plan_cmd->add_option("--ranking", plan_paths["ranking"]);
  plan_cmd->callback([&] {
    std::map<ChatTask, std::string> datasets;
    if (!plan_paths["qa"].empty()) datasets[ChatTask::QA] = plan_paths["qa"];
    if (!plan_paths["cloze"].empty()) datasets[ChatTask::Cloze] = plan_paths["cloze"];
    if (!plan_paths["bill"].empty()) datasets[ChatTask::BillComprehension] = plan_paths["bill"];
    if (!plan_paths["ranking"].empty()) datasets[ChatTask::Ranking] = plan_paths["ranking"];
    emit_stage_plan(datasets, out_dir);
    std::cout << (fs::path(out_dir) / "plan.json").string() << '\n';
  });

  // run
  std::string config_path, stages_text;
  bool force = false;
  auto* run_cmd = app.add_subcommand("run", "Run pipeline stages from a config file");
  run_cmd->add_option("--config", config_path)->required();
  run_cmd->add_option("--stages", stages_text, "Comma-separated subset; default all");
  run_cmd->add_option("--out-dir", out_dir, "Overrides out_dir");
  run_cmd->add_flag("--force", force, "Re-run stages even when outputs are current");
  run_cmd->callback([&] {
    PipelineConfig cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    apply_env_overrides(cfg);
    std::vector<std::string> stages;
    if (run_cmd->count("--stages")) {
      stages = parse_stage_list(stages_text);
    } else {
      stages.assign(kStages.begin(), kStages.end());
    }
    const RunManifest m = run_pipeline(cfg, stages, {force});
    for (const auto& s : m.stages) std::cout << s.name << '\t' << s.status << '\t' << s.wall_clock_ms << " ms\n";
  });

  // synth
  SynthSpec spec;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic corpus and a matching config");
  synth_cmd->add_option("--out-dir", out_dir)->required();
  synth_cmd->add_option("--seed", spec.seed);
  synth_cmd->add_option("--legislators", spec.legislators);
  synth_cmd->add_option("--sponsorships", spec.sponsorships);
  synth_cmd->add_option("--topics", spec.topics);
  synth_cmd->callback([&] {
    const SynthCorpus corpus = make_synth_corpus(spec);
    const auto files = write_synth_corpus(corpus, out_dir);
    Json cfg = {
        {"out_dir", "run"},
        {"inputs",
         {{"sponsorships", "sponsorships.jsonl"},
          {"statements", "statements.jsonl"},
          {"embeddings", "embeddings.jsonl"},
          {"bills", "bills.jsonl"},
          {"scores", "scores.jsonl"},
          {"qa", "qa.jsonl"},
          {"cloze", "cloze.jsonl"},
          {"votes", "votes.jsonl"}}},
        {"oracle", {{"backend", "cache_file"}, {"cache_path", "contradiction.cache"}}},
        {"anchors", {{"left", corpus.anchors.left_id}, {"right", corpus.anchors.right_id}}},
        {"seeds", {{"map", 1}, {"quintuplets", 2}, {"emit-training", 3}}},
        {"thresholds", {{"hac", 0.7}, {"k", 5}, {"ratio", 0.8}}},
        {"reports", {{"formats", {"jsonl", "csv"}}}},
    };
    write_text_file(fs::path(out_dir) / "config.json", cfg.dump(2) + "\n");
    std::cout << files.size() + 1 << " files written to " << out_dir << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const LineError& e) {
    std::cerr << "error: line " << e.line_no() << ": " << e.what() << '\n';
    return is_validation_error(e.code()) ? 2 : 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_validation_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
