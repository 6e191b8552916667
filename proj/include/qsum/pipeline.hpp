#pragma once

// End-to-end orchestration: corpus -> relevance -> evidence -> centrality,
// with stage ablations and a reproducible run manifest.

#include <cmath>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qsum/centrality.hpp"
#include "qsum/corpus.hpp"
#include "qsum/digest.hpp"
#include "qsum/error.hpp"
#include "qsum/evidence.hpp"
#include "qsum/io.hpp"
#include "qsum/relevance.hpp"

namespace qsum {

inline constexpr const char* kVersion = "0.1.0";

enum class Backend { fallback, file, ensemble };

enum class Ablation { no_relevance, no_evidence, no_centrality, uniform_q };

inline std::string to_string(Backend b) {
  switch (b) {
    case Backend::file: return "file";
    case Backend::ensemble: return "ensemble";
    default: return "fallback";
  }
}

inline Backend parse_backend(std::string_view s) {
  if (s == "fallback") return Backend::fallback;
  if (s == "file") return Backend::file;
  if (s == "ensemble") return Backend::ensemble;
  throw ConfigError("backend",
                    "expected 'fallback', 'file' or 'ensemble', got '" + std::string(s) + "'");
}

inline std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::no_relevance: return "no_relevance";
    case Ablation::no_evidence: return "no_evidence";
    case Ablation::no_centrality: return "no_centrality";
    default: return "uniform_q";
  }
}

inline Ablation parse_ablation(std::string_view s) {
  if (s == "no_relevance") return Ablation::no_relevance;
  if (s == "no_evidence") return Ablation::no_evidence;
  if (s == "no_centrality") return Ablation::no_centrality;
  if (s == "uniform_q") return Ablation::uniform_q;
  throw ConfigError("ablations", "unknown ablation '" + std::string(s) +
                                     "' (expected no_relevance, no_evidence, no_centrality "
                                     "or uniform_q)");
}

struct PipelineConfig {
  Unit unit = Unit::sentence;
  QueryMode query_mode = QueryMode::full;
  double theta = 0.75;
  std::optional<std::size_t> k_qa;  // unset: 90 for sentences, 110 for passages
  std::size_t k_qa_span = 110;      // passage side of the ensemble
  double phi = 0.15;
  double mu = 0.9;
  std::size_t budget = 250;
  double omega = 1.0;
  Backend backend = Backend::fallback;
  std::string score_file;       // sentence or span records for the main unit
  std::string score_file_span;  // span records for the ensemble's passage side
  std::set<Ablation> ablations;
  SummaryOrder order = SummaryOrder::salience;
  PassageOptions passages;
  double tol = 1e-10;
  int max_iter = 10000;

  std::size_t effective_k_qa() const {
    if (k_qa) return *k_qa;
    return unit == Unit::sentence ? 90 : 110;
  }

  bool has(Ablation a) const { return ablations.contains(a); }

  /// Throws ConfigError naming the first offending field.
  void validate() const {
    if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta", "must lie in (0, 1]");
    if (effective_k_qa() < 1) throw ConfigError("k_qa", "must be >= 1");
    if (k_qa_span < 1) throw ConfigError("k_qa_span", "must be >= 1");
    if (!(phi > 0.0 && phi < 1.0)) throw ConfigError("phi", "must lie in (0, 1)");
    if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("mu", "must lie in [0, 1]");
    if (budget < 1) throw ConfigError("budget", "must be >= 1 word");
    if (!(omega >= 0.0) || !std::isfinite(omega))
      throw ConfigError("omega", "must be finite and >= 0");
    if (passages.stride < 1) throw ConfigError("stride", "must be >= 1");
    if (passages.window < passages.stride) throw ConfigError("window", "must be >= stride");
    if (passages.max_sentence_tokens < 1)
      throw ConfigError("max_sentence_tokens", "must be >= 1");
    if (!(tol > 0.0)) throw ConfigError("tol", "must be > 0");
    if (max_iter < 1) throw ConfigError("max_iter", "must be >= 1");
    if (backend == Backend::file && score_file.empty())
      throw ConfigError("score_file", "backend 'file' requires a score file");
    if (backend == Backend::ensemble && (score_file.empty() || score_file_span.empty()))
      throw ConfigError("score_file_span",
                        "backend 'ensemble' requires both score_file and score_file_span");
    if (backend == Backend::ensemble && unit != Unit::sentence)
      throw ConfigError("unit", "backend 'ensemble' runs on unit 'sentence'");
    if (has(Ablation::no_evidence) && unit == Unit::passage)
      throw ConfigError("ablations", "no_evidence is only defined for unit 'sentence'");
    if (has(Ablation::no_evidence) && backend == Backend::ensemble)
      throw ConfigError("ablations", "no_evidence cannot be combined with backend 'ensemble'");
  }
};

inline Json to_json(const PipelineConfig& c) {
  Json ablations = Json::array();
  for (auto a : c.ablations) ablations.push_back(to_string(a));
  return {{"unit", to_string(c.unit)},
          {"query_mode", to_string(c.query_mode)},
          {"theta", c.theta},
          {"k_qa", c.effective_k_qa()},
          {"k_qa_span", c.k_qa_span},
          {"phi", c.phi},
          {"mu", c.mu},
          {"budget", c.budget},
          {"omega", c.omega},
          {"backend", to_string(c.backend)},
          {"score_file", c.score_file},
          {"score_file_span", c.score_file_span},
          {"ablations", std::move(ablations)},
          {"order", to_string(c.order)},
          {"window", c.passages.window},
          {"stride", c.passages.stride},
          {"max_sentence_tokens", c.passages.max_sentence_tokens},
          {"tol", c.tol},
          {"max_iter", c.max_iter}};
}

/// Overlays the fields present in `j` onto `base`. Unknown fields are errors.
inline PipelineConfig config_from_json(const Json& j, PipelineConfig base = {}) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  auto number = [](const std::string& key, const Json& v) {
    if (!v.is_number()) throw ConfigError(key, "must be a number");
    return v.get<double>();
  };
  auto count = [&](const std::string& key, const Json& v) -> std::size_t {
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw ConfigError(key, "must be a nonnegative integer");
    return v.get<std::size_t>();
  };
  auto text = [](const std::string& key, const Json& v) {
    if (!v.is_string()) throw ConfigError(key, "must be a string");
    return v.get<std::string>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "unit") base.unit = parse_unit(text(key, v));
    else if (key == "query_mode") base.query_mode = parse_query_mode(text(key, v));
    else if (key == "theta") base.theta = number(key, v);
    else if (key == "k_qa") base.k_qa = count(key, v);
    else if (key == "k_qa_span") base.k_qa_span = count(key, v);
    else if (key == "phi") base.phi = number(key, v);
    else if (key == "mu") base.mu = number(key, v);
    else if (key == "budget") base.budget = count(key, v);
    else if (key == "omega") base.omega = number(key, v);
    else if (key == "backend") base.backend = parse_backend(text(key, v));
    else if (key == "score_file") base.score_file = text(key, v);
    else if (key == "score_file_span") base.score_file_span = text(key, v);
    else if (key == "order") base.order = parse_summary_order(text(key, v));
    else if (key == "window") base.passages.window = count(key, v);
    else if (key == "stride") base.passages.stride = count(key, v);
    else if (key == "max_sentence_tokens") base.passages.max_sentence_tokens = count(key, v);
    else if (key == "tol") base.tol = number(key, v);
    else if (key == "max_iter") base.max_iter = static_cast<int>(count(key, v));
    else if (key == "ablations") {
      if (!v.is_array()) throw ConfigError(key, "must be an array of strings");
      base.ablations.clear();
      for (const auto& a : v) base.ablations.insert(parse_ablation(text(key, a)));
    } else {
      throw ConfigError(key, "unknown field");
    }
  }
  return base;
}

// ---------------------------------------------------------------------------
// Running

/// Score records plus the digest of the bytes they were parsed from.
struct ScoreSource {
  std::vector<ScoreRecord> records;
  std::string digest;
};

inline ScoreSource load_score_source(const std::filesystem::path& path, const Cluster& c) {
  const std::string bytes = io::read_file(path);
  ScoreSource s{parse_score_lines(bytes, path.string()), sha256_hex(bytes)};
  validate_score_records(s.records, c);
  return s;
}

struct EvidenceStageStats {
  std::size_t segments = 0;
  std::size_t k_ir = 0;
  std::size_t retrieved = 0;
  std::size_t candidates = 0;  // sentences scored
  std::size_t selected = 0;
  std::size_t file_scored = 0;
  std::size_t fallback_scored = 0;
};

struct RunResult {
  Summary summary;
  RelevanceRanking ranking;
  EvidenceSet evidence;
  std::optional<CentralityResult> centrality;
  EvidenceStageStats stats;
  std::optional<EvidenceStageStats> span_stats;  // ensemble passage side
  Json manifest;
};

/// Scores the retrieved prefix (first k_ir entries) of `ranking` and keeps the
/// top min(k_qa, k_ir) sentences. With `relevance_as_q` the normalized
/// relevance of each retrieved sentence is used as q instead of a scorer.
inline EvidenceSet score_ranking(const Cluster& c, const RelevanceRanking& ranking,
                                 std::size_t k_qa, const std::vector<ScoreRecord>& records,
                                 QueryMode mode, bool relevance_as_q = false,
                                 EvidenceStageStats* stats = nullptr) {
  if (ranking.cluster_id != c.id)
    throw ValidationError("ranking is for cluster '" + ranking.cluster_id + "', not '" + c.id +
                          "'");
  if (ranking.k_ir > ranking.entries.size())
    throw ValidationError("ranking k_ir exceeds its entry count");
  EvidenceStageStats local;
  EvidenceStageStats& st = stats ? *stats : local;
  st.segments = ranking.entries.size();
  st.k_ir = ranking.k_ir;
  const std::span<const RankingEntry> retrieved(ranking.entries.data(), ranking.k_ir);
  st.retrieved = retrieved.size();

  std::vector<EvidenceEntry> candidates;
  if (relevance_as_q) {
    if (ranking.unit != Unit::sentence)
      throw ConfigError("ablations", "no_evidence is only defined for unit 'sentence'");
    const auto index = sentence_index(c);
    for (const auto& e : retrieved) {
      auto it = index.find(e.segment_id);
      if (it == index.end()) throw ValidationError("unknown sentence '" + e.segment_id + "'");
      candidates.push_back({e.segment_id, it->second->doc_id, it->second->index,
                            e.normalized_score});
    }
  } else {
    EvidenceScorer scorer(LexicalFallbackScorer(c, mode), records);
    candidates = score_candidates(c, ranking.unit, retrieved, scorer);
    st.file_scored = scorer.file_hits();
    st.fallback_scored = scorer.fallback_hits();
  }
  st.candidates = candidates.size();
  // Passage retrieval yields more candidate sentences than retrieved
  // segments; the cut then applies to the sentences themselves.
  const std::size_t k_ir = ranking.unit == Unit::sentence ? ranking.k_ir : candidates.size();
  auto set = select_evidence(std::move(candidates), k_qa, k_ir, c.id);
  st.selected = set.entries.size();
  return set;
}

namespace detail {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

/// Retrieval plus evidence scoring for one unit.
inline EvidenceSet evidence_for_unit(const Cluster& c, const PipelineConfig& cfg, Unit unit,
                                     std::size_t k_qa, const std::vector<ScoreRecord>& records,
                                     RelevanceRanking& ranking, EvidenceStageStats& stats) {
  ranking = stage("relevance", [&] { return rank_and_normalize(c, unit, cfg.query_mode, cfg.theta); });
  if (cfg.has(Ablation::no_relevance)) ranking.k_ir = ranking.entries.size();
  return stage("evidence", [&] {
    return score_ranking(c, ranking, k_qa, records, cfg.query_mode,
                         cfg.has(Ablation::no_evidence), &stats);
  });
}

inline Json stats_json(const EvidenceStageStats& s, Unit unit) {
  return {{"unit", to_string(unit)},       {"segments", s.segments},
          {"k_ir", s.k_ir},                {"retrieved", s.retrieved},
          {"candidates", s.candidates},    {"selected", s.selected},
          {"file_scored", s.file_scored},  {"fallback_scored", s.fallback_scored}};
}

}  // namespace detail

/// Runs every stage on an already loaded cluster. `primary` holds the score
/// records for the main unit (file and ensemble backends), `span` the
/// passage-side records for the ensemble.
inline RunResult run_pipeline(const PipelineConfig& cfg, const Cluster& c,
                              const ScoreSource& primary = {}, const ScoreSource& span = {}) {
  cfg.validate();
  RunResult r;
  const std::vector<ScoreRecord> none;
  const auto& primary_records = cfg.backend == Backend::fallback ? none : primary.records;

  r.evidence = detail::evidence_for_unit(c, cfg, cfg.unit, cfg.effective_k_qa(), primary_records,
                                         r.ranking, r.stats);
  if (cfg.backend == Backend::ensemble) {
    RelevanceRanking span_ranking;
    EvidenceStageStats span_stats;
    const auto span_set = detail::evidence_for_unit(c, cfg, Unit::passage, cfg.k_qa_span,
                                                    span.records, span_ranking, span_stats);
    r.evidence = detail::stage("evidence", [&] { return ensemble_scores(r.evidence, span_set, cfg.mu); });
    r.span_stats = span_stats;
  }

  if (cfg.has(Ablation::no_centrality)) {
    r.summary = detail::stage("centrality", [&] {
      return truncate_to_budget(c, r.evidence, cfg.budget, cfg.order);
    });
  } else {
    CentralityOptions opts;
    opts.phi = cfg.phi;
    opts.budget = cfg.budget;
    opts.omega = cfg.omega;
    opts.order = cfg.order;
    opts.uniform_prior = cfg.has(Ablation::uniform_q);
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    r.centrality = detail::stage("centrality", [&] { return summarize(c, r.evidence, opts); });
    r.summary = r.centrality->summary;
  }

  Json stages = {
      {"segmentation",
       {{"documents", c.documents.size()},
        {"sentences", c.sentence_count()},
        {"passages", c.passages.size()}}},
      {"retrieval", detail::stats_json(r.stats, cfg.unit)},
  };
  if (r.span_stats) stages["retrieval_span"] = detail::stats_json(*r.span_stats, Unit::passage);
  stages["evidence"] = {{"selected", r.evidence.entries.size()}};
  stages["centrality"] = {{"applied", !cfg.has(Ablation::no_centrality)},
                          {"iterations", r.centrality ? r.centrality->iterations : 0},
                          {"summary_sentences", r.summary.sentences.size()},
                          {"word_count", r.summary.word_count}};

  r.manifest = {{"tool", {{"name", "qsum"}, {"version", kVersion}}},
                {"cluster_id", c.id},
                {"config", to_json(cfg)},
                {"inputs",
                 {{"cluster_sha256", c.source_digest},
                  {"score_file_sha256", primary.digest},
                  {"score_file_span_sha256", span.digest}}},
                {"stages", std::move(stages)}};
  return r;
}

/// Loads the cluster and any configured score files, then runs the pipeline.
inline RunResult run(const PipelineConfig& cfg, const std::filesystem::path& cluster_path) {
  cfg.validate();
  const Cluster c = detail::stage("corpus", [&] { return load_cluster(cluster_path, cfg.passages); });
  ScoreSource primary;
  ScoreSource span;
  detail::stage("evidence", [&] {
    if (cfg.backend != Backend::fallback) primary = load_score_source(cfg.score_file, c);
    if (cfg.backend == Backend::ensemble) span = load_score_source(cfg.score_file_span, c);
    return 0;
  });
  return run_pipeline(cfg, c, primary, span);
}

/// `run` with one extra ablation switched on.
inline RunResult ablate(PipelineConfig cfg, const std::filesystem::path& cluster_path,
                        Ablation a) {
  cfg.ablations.insert(a);
  return run(cfg, cluster_path);
}

}  // namespace qsum
