// qsum: command-line front end for the summarization pipeline.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qsum/qsum.hpp"

namespace fs = std::filesystem;
using namespace qsum;

namespace {

void emit(const Json& j, const std::string& out) {
  if (out.empty() || out == "-") std::cout << j.dump(2) << '\n';
  else io::write_json(out, j);
}

struct SegmentArgs {
  std::string cluster;
  std::string out;
  std::size_t window = 8;
  std::size_t stride = 4;
  std::size_t max_tokens = 50;
};

struct RetrieveArgs {
  std::string cluster;
  std::string unit = "sentence";
  std::string query_mode = "full";
  double theta = 0.75;
  std::string out;
};

struct ScoreArgs {
  std::string cluster;
  std::string ranking;
  std::string backend = "fallback";
  std::string score_file;
  std::optional<std::size_t> k_qa;
  std::string query_mode = "full";
  std::string out;
};

struct SummarizeArgs {
  std::string cluster;
  std::string evidence;
  double phi = 0.15;
  std::size_t budget = 250;
  double omega = 1.0;
  std::string order = "salience";
  bool uniform_q = false;
  bool no_centrality = false;
  std::string out;
};

struct RunArgs {
  std::string cluster;
  std::string config;
  std::optional<std::string> unit, query_mode, backend, score_file, score_file_span, order;
  std::optional<double> theta, phi, mu, omega;
  std::optional<std::size_t> k_qa, k_qa_span, budget;
  std::vector<std::string> ablate;
  std::string out;
  std::string manifest;
};

struct EvaluateArgs {
  std::string summaries;
  std::string refs;
  std::size_t length_limit = 250;
  std::string out;
};

void do_segment(const SegmentArgs& a) {
  PassageOptions opts{a.window, a.stride, a.max_tokens};
  const Cluster c = detail::stage("corpus", [&] { return load_cluster(a.cluster, opts); });
  emit(to_json(c), a.out);
}

void do_retrieve(const RetrieveArgs& a) {
  const Cluster c = detail::stage("corpus", [&] { return load_cluster(a.cluster); });
  const auto ranking = detail::stage("relevance", [&] {
    return rank_and_normalize(c, parse_unit(a.unit), parse_query_mode(a.query_mode), a.theta);
  });
  emit(to_json(ranking), a.out);
}

void do_score(const ScoreArgs& a) {
  const Cluster c = detail::stage("corpus", [&] { return load_cluster(a.cluster); });
  const auto evidence = detail::stage("evidence", [&] {
    const auto ranking = ranking_from_json(io::read_json(a.ranking), a.ranking);
    const Backend backend = parse_backend(a.backend);
    if (backend == Backend::ensemble)
      throw ConfigError("backend", "'score' takes fallback or file; use 'run' for the ensemble");
    std::vector<ScoreRecord> records;
    if (backend == Backend::file) {
      if (a.score_file.empty()) throw ConfigError("score_file", "backend 'file' requires --score-file");
      records = load_score_file(a.score_file, c);
    }
    const std::size_t k_qa = a.k_qa.value_or(ranking.unit == Unit::sentence ? 90 : 110);
    if (k_qa < 1) throw ConfigError("k_qa", "must be >= 1");
    return score_ranking(c, ranking, k_qa, records, parse_query_mode(a.query_mode));
  });
  emit(to_json(evidence), a.out);
}

void do_summarize(const SummarizeArgs& a) {
  const Cluster c = detail::stage("corpus", [&] { return load_cluster(a.cluster); });
  const auto summary = detail::stage("centrality", [&] {
    const auto evidence = evidence_from_json(io::read_json(a.evidence), a.evidence);
    const SummaryOrder order = parse_summary_order(a.order);
    if (a.no_centrality) return truncate_to_budget(c, evidence, a.budget, order);
    CentralityOptions opts;
    opts.phi = a.phi;
    opts.budget = a.budget;
    opts.omega = a.omega;
    opts.order = order;
    opts.uniform_prior = a.uniform_q;
    return summarize(c, evidence, opts).summary;
  });
  emit(to_json(summary), a.out);
}

void do_run(const RunArgs& a) {
  PipelineConfig cfg;
  if (!a.config.empty()) cfg = config_from_json(io::read_json(a.config));
  if (a.unit) cfg.unit = parse_unit(*a.unit);
  if (a.query_mode) cfg.query_mode = parse_query_mode(*a.query_mode);
  if (a.backend) cfg.backend = parse_backend(*a.backend);
  if (a.score_file) cfg.score_file = *a.score_file;
  if (a.score_file_span) cfg.score_file_span = *a.score_file_span;
  if (a.order) cfg.order = parse_summary_order(*a.order);
  if (a.theta) cfg.theta = *a.theta;
  if (a.phi) cfg.phi = *a.phi;
  if (a.mu) cfg.mu = *a.mu;
  if (a.omega) cfg.omega = *a.omega;
  if (a.k_qa) cfg.k_qa = *a.k_qa;
  if (a.k_qa_span) cfg.k_qa_span = *a.k_qa_span;
  if (a.budget) cfg.budget = *a.budget;
  for (const auto& x : a.ablate) cfg.ablations.insert(parse_ablation(x));

  const RunResult r = run(cfg, a.cluster);
  emit(to_json(r.summary), a.out);
  if (!a.manifest.empty()) io::write_json(a.manifest, r.manifest);
}

// A summary is either summary.json (cluster id and text inside) or a plain
// <cluster_id>.txt file.
std::map<std::string, std::string> load_summaries(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ParseError(dir.string() + ": not a directory");
  std::vector<fs::path> files;
  for (const auto& f : fs::directory_iterator(dir))
    if (f.is_regular_file()) files.push_back(f.path());
  std::sort(files.begin(), files.end());
  std::map<std::string, std::string> out;
  for (const auto& f : files) {
    std::string id, text;
    if (f.extension() == ".json") {
      const Json j = io::read_json(f);
      id = io::require_string(j, "cluster_id", f.string());
      text = io::require_string(j, "text", f.string());
    } else if (f.extension() == ".txt") {
      id = f.stem().string();
      text = io::read_file(f);
    } else {
      continue;
    }
    if (!out.emplace(id, std::move(text)).second)
      throw ValidationError(f.string() + ": second summary for cluster '" + id + "'");
  }
  return out;
}

void do_evaluate(const EvaluateArgs& a) {
  const auto report = detail::stage("evaluate", [&] {
    RougeOptions opts;
    opts.length_limit = a.length_limit;
    return evaluate_corpus(load_summaries(a.summaries), load_references(a.refs), opts);
  });
  emit(to_json(report), a.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-focused multi-document summarization"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  SegmentArgs seg;
  auto* s = app.add_subcommand("segment", "Split a cluster into sentences and passages");
  s->add_option("--cluster", seg.cluster, "Cluster directory or cluster.json")->required();
  s->add_option("--window", seg.window, "Sentences per passage");
  s->add_option("--stride", seg.stride, "Sentences between passage starts");
  s->add_option("--max-sentence-tokens", seg.max_tokens, "Per-sentence token cap in passages");
  s->add_option("--out", seg.out, "Output file (stdout if omitted)");
  s->callback([&] { do_segment(seg); });

  RetrieveArgs ret;
  s = app.add_subcommand("retrieve", "Rank segments by query-term frequency");
  s->add_option("--cluster", ret.cluster)->required();
  s->add_option("--unit", ret.unit)->check(CLI::IsMember({"sentence", "passage"}));
  s->add_option("--query-mode", ret.query_mode)->check(CLI::IsMember({"full", "title", "narrative"}));
  s->add_option("--theta", ret.theta, "Cumulative relevance cutoff");
  s->add_option("--out", ret.out);
  s->callback([&] { do_retrieve(ret); });

  ScoreArgs sc;
  s = app.add_subcommand("score", "Score retrieved segments and select evidence");
  s->add_option("--cluster", sc.cluster)->required();
  s->add_option("--ranking", sc.ranking, "Output of 'retrieve'")->required();
  s->add_option("--backend", sc.backend)->check(CLI::IsMember({"fallback", "file"}));
  s->add_option("--score-file", sc.score_file, "JSON-lines score records");
  s->add_option("--k-qa", sc.k_qa, "Evidence set size (90 sentence, 110 passage)");
  s->add_option("--query-mode", sc.query_mode, "Query fields used by the fallback scorer")
      ->check(CLI::IsMember({"full", "title", "narrative"}));
  s->add_option("--out", sc.out);
  s->callback([&] { do_score(sc); });

  SummarizeArgs sm;
  s = app.add_subcommand("summarize", "Rank evidence by biased centrality and fill the budget");
  s->add_option("--cluster", sm.cluster)->required();
  s->add_option("--evidence", sm.evidence, "Output of 'score'")->required();
  s->add_option("--phi", sm.phi);
  s->add_option("--budget", sm.budget, "Summary length in words");
  s->add_option("--omega", sm.omega, "Redundancy penalty weight");
  s->add_option("--order", sm.order)->check(CLI::IsMember({"salience", "document"}));
  s->add_flag("--uniform-q", sm.uniform_q, "Replace the evidence prior by the uniform one");
  s->add_flag("--no-centrality", sm.no_centrality, "Truncate the evidence ranking instead");
  s->add_option("--out", sm.out);
  s->callback([&] { do_summarize(sm); });

  RunArgs rn;
  s = app.add_subcommand("run", "Run every stage on one cluster");
  s->add_option("--cluster", rn.cluster)->required();
  s->add_option("--config", rn.config, "JSON config; flags below override it");
  s->add_option("--unit", rn.unit);
  s->add_option("--query-mode", rn.query_mode);
  s->add_option("--backend", rn.backend);
  s->add_option("--score-file", rn.score_file);
  s->add_option("--score-file-span", rn.score_file_span);
  s->add_option("--order", rn.order);
  s->add_option("--theta", rn.theta);
  s->add_option("--phi", rn.phi);
  s->add_option("--mu", rn.mu);
  s->add_option("--omega", rn.omega);
  s->add_option("--k-qa", rn.k_qa);
  s->add_option("--k-qa-span", rn.k_qa_span);
  s->add_option("--budget", rn.budget);
  s->add_option("--ablate", rn.ablate, "no_relevance, no_evidence, no_centrality or uniform_q");
  s->add_option("--out", rn.out, "Summary JSON (stdout if omitted)");
  s->add_option("--manifest", rn.manifest, "Run manifest JSON");
  s->callback([&] { do_run(rn); });

  EvaluateArgs ev;
  s = app.add_subcommand("evaluate", "ROUGE-1/2/SU4 against reference summaries");
  s->add_option("--summaries", ev.summaries, "Directory of summary .json or <cluster>.txt")->required();
  s->add_option("--refs", ev.refs, "Directory laid out as <cluster_id>/<ref_id>.txt")->required();
  s->add_option("--length-limit", ev.length_limit, "Candidate words scored");
  s->add_option("--out", ev.out);
  s->callback([&] { do_evaluate(ev); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const StageError& e) {
    std::cerr << "qsum: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "qsum: [config] " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qsum: [io] " << e.what() << '\n';
    return 1;
  }
  return 0;
}
