#include <catch_amalgamated.hpp>

#include <filesystem>

#include "support.hpp"

using namespace qsum;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace fs = std::filesystem;

namespace {

Cluster two_doc_cluster() {
  return make_cluster(
      "two", make_query("two", "Solar power costs", "Discuss the price of solar panels."),
      {{"d1",
        "Solar panels became cheaper last year. Installers reported record demand. "
        "The price of a rooftop system fell by a fifth. Some towns offered rebates."},
       {"d2",
        "Utilities are adding solar power plants. Costs for batteries also dropped. "
        "Grid operators worry about evening demand. Wind farms grew more slowly."}});
}

void check_narrowing(const RunResult& r) {
  CHECK(r.stats.segments >= r.stats.k_ir);
  CHECK(r.stats.k_ir >= r.stats.retrieved);
  CHECK(r.stats.candidates >= r.evidence.entries.size());
  CHECK(r.evidence.entries.size() >= r.summary.sentences.size());
  CHECK(r.summary.word_count <= 250);
}

}  // namespace

TEST_CASE("default run narrows at every stage") {
  const Cluster c = two_doc_cluster();
  const auto r = run_pipeline(PipelineConfig{}, c);
  check_narrowing(r);
  CHECK(r.stats.k_ir >= r.evidence.entries.size());
  CHECK_FALSE(r.summary.sentences.empty());
  const Json& stages = r.manifest["stages"];
  CHECK(stages["retrieval"]["segments"] == 8);
  CHECK(stages["retrieval"]["k_ir"] == r.stats.k_ir);
  CHECK(stages["centrality"]["word_count"] == r.summary.word_count);
  CHECK(r.manifest["config"]["k_qa"] == 90);
  CHECK(r.manifest["inputs"]["cluster_sha256"] == c.source_digest);
}

TEST_CASE("passage unit runs with the span default") {
  PipelineConfig cfg;
  cfg.unit = Unit::passage;
  CHECK(cfg.effective_k_qa() == 110);
  const auto r = run_pipeline(cfg, two_doc_cluster());
  check_narrowing(r);
  CHECK(r.stats.candidates >= r.stats.retrieved);
}

TEST_CASE("no_relevance feeds every segment to the evidence stage") {
  PipelineConfig cfg;
  cfg.ablations = {Ablation::no_relevance};
  const Cluster c = two_doc_cluster();
  const auto r = run_pipeline(cfg, c);
  CHECK(r.stats.retrieved == c.sentence_count());
  CHECK(r.stats.k_ir == c.sentence_count());
  CHECK(r.evidence.entries.size() == std::min<std::size_t>(90, c.sentence_count()));

  cfg.k_qa = 3;
  CHECK(run_pipeline(cfg, c).evidence.entries.size() == 3);
}

TEST_CASE("no_evidence takes retrieval order and relevance as q") {
  PipelineConfig cfg;
  cfg.ablations = {Ablation::no_evidence, Ablation::no_relevance};
  cfg.k_qa = 3;
  const Cluster c = two_doc_cluster();
  const auto r = run_pipeline(cfg, c);
  REQUIRE(r.evidence.entries.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.evidence.entries[i].sentence_id == r.ranking.entries[i].segment_id);
    CHECK(r.evidence.entries[i].q == r.ranking.entries[i].normalized_score);
  }

  cfg.unit = Unit::passage;
  CHECK_THROWS_AS(run_pipeline(cfg, c), ConfigError);
}

TEST_CASE("no_centrality returns the truncated evidence ranking") {
  PipelineConfig cfg;
  cfg.ablations = {Ablation::no_centrality};
  cfg.budget = 20;
  const Cluster c = two_doc_cluster();
  const auto r = run_pipeline(cfg, c);
  CHECK_FALSE(r.centrality.has_value());
  const auto expected = truncate_to_budget(c, r.evidence, 20);
  CHECK(to_json(r.summary) == to_json(expected));
}

TEST_CASE("uniform_q replaces the prior") {
  PipelineConfig cfg;
  cfg.ablations = {Ablation::uniform_q, Ablation::no_relevance};
  const auto r = run_pipeline(cfg, two_doc_cluster());
  REQUIRE(r.centrality);
  for (double p : r.centrality->prior) CHECK(p == 1.0 / static_cast<double>(r.centrality->prior.size()));
}

TEST_CASE("config validation names the field") {
  auto field_of = [](PipelineConfig cfg) {
    try {
      cfg.validate();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string();
  };
  PipelineConfig ok;
  CHECK(field_of(ok).empty());
  auto with = [&](auto&& edit) {
    PipelineConfig c;
    edit(c);
    return field_of(c);
  };
  CHECK(with([](auto& c) { c.theta = 0.0; }) == "theta");
  CHECK(with([](auto& c) { c.theta = 1.2; }) == "theta");
  CHECK(with([](auto& c) { c.k_qa = 0; }) == "k_qa");
  CHECK(with([](auto& c) { c.phi = 0.0; }) == "phi");
  CHECK(with([](auto& c) { c.phi = 1.0; }) == "phi");
  CHECK(with([](auto& c) { c.mu = -0.1; }) == "mu");
  CHECK(with([](auto& c) { c.budget = 0; }) == "budget");
  CHECK(with([](auto& c) { c.omega = -1.0; }) == "omega");
  CHECK(with([](auto& c) { c.passages.window = 2; }) == "window");
  CHECK(with([](auto& c) { c.passages.stride = 0; }) == "stride");
  CHECK(with([](auto& c) { c.backend = Backend::file; }) == "score_file");
  CHECK(with([](auto& c) {
          c.backend = Backend::ensemble;
          c.score_file = "s.jsonl";
        }) == "score_file_span");
}

TEST_CASE("config JSON") {
  const auto cfg = config_from_json(Json::parse(
      R"({"unit": "passage", "theta": 0.5, "ablations": ["uniform_q"], "budget": 100})"));
  CHECK(cfg.unit == Unit::passage);
  CHECK(cfg.theta == 0.5);
  CHECK(cfg.budget == 100);
  CHECK(cfg.has(Ablation::uniform_q));
  CHECK(config_from_json(to_json(cfg)).effective_k_qa() == 110);
  CHECK(to_json(config_from_json(to_json(cfg))) == to_json(cfg));

  CHECK_THROWS_WITH(config_from_json(Json::parse(R"({"thetta": 0.5})")), ContainsSubstring("thetta"));
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"budget": -3})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"ablations": ["no_magic"]})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"unit": "paragraph"})")), ConfigError);
}

TEST_CASE("stage errors carry the stage name") {
  PipelineConfig cfg;
  try {
    run(cfg, "/definitely/not/here");
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "corpus");
  }

  cfg.backend = Backend::file;
  cfg.score_file = "/definitely/not/here.jsonl";
  try {
    run(cfg, fs::path(QSUM_SAMPLES_DIR) / "clusters" / "reefs");
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "evidence");
  }
}

TEST_CASE("file backend and ensemble") {
  const fs::path reefs = fs::path(QSUM_SAMPLES_DIR) / "clusters" / "reefs";
  const Cluster c = load_cluster(reefs);
  const auto scores = fs::temp_directory_path() / "qsum_pipeline_scores";
  fs::create_directories(scores);

  io::write_file(scores / "s.jsonl", R"({"segment_id": "apw002:0", "kind": "sentence", "q": 0.8})"
                                     "\n");
  {
    const Passage& pa = c.passages[0];
    std::vector<double> logits(pa.tokens.size(), 0.0);
    ScoreRecord r{pa.id(), ScoreKind::span, 0.0, logits, logits, pa.sentence_spans};
    io::write_file(scores / "p.jsonl", to_json(r).dump() + "\n");
  }

  PipelineConfig cfg;
  cfg.backend = Backend::file;
  cfg.score_file = (scores / "s.jsonl").string();
  const auto file_run = run(cfg, reefs);
  CHECK(file_run.stats.file_scored == 1);
  CHECK(file_run.manifest["inputs"]["score_file_sha256"] ==
        sha256_hex(io::read_file(scores / "s.jsonl")));

  cfg.backend = Backend::ensemble;
  cfg.score_file_span = (scores / "p.jsonl").string();
  const auto ens = run(cfg, reefs);
  REQUIRE(ens.span_stats);
  CHECK(ens.manifest["stages"].contains("retrieval_span"));
  // Every ensemble entry comes from the sentence set, so q >= mu * q_S.
  for (const auto& e : ens.evidence.entries)
    if (e.sentence_id == "apw002:0") CHECK(e.q >= 0.9 * 0.8 - 1e-15);
  CHECK(ens.evidence.entries.size() <= file_run.evidence.entries.size());
  fs::remove_all(scores);
}

TEST_CASE("the planted answer reaches the summary") {
  const auto r = run_pipeline(PipelineConfig{}, test::planted_cluster());
  bool found = false;
  for (const auto& s : r.summary.sentences) found |= s.sentence_id == "d2:5";
  CHECK(found);
  CHECK(r.summary.word_count <= 250);
}

TEST_CASE("runs are reproducible") {
  const fs::path reefs = fs::path(QSUM_SAMPLES_DIR) / "clusters" / "reefs";
  const auto a = run(PipelineConfig{}, reefs);
  const auto b = run(PipelineConfig{}, reefs);
  CHECK(to_json(a.summary).dump(2) == to_json(b.summary).dump(2));
  CHECK(a.manifest.dump(2) == b.manifest.dump(2));
}
