#pragma once

// Evidence scores: turning scorer output into per-sentence q in (0, 1),
// selecting the evidence set and interpolating two scorers.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "qsum/corpus.hpp"
#include "qsum/error.hpp"
#include "qsum/io.hpp"
#include "qsum/isf.hpp"
#include "qsum/relevance.hpp"

namespace qsum {

namespace detail {

// tanh saturates to exactly 1 for arguments above ~19, and its argument can
// underflow to 0; keep scores strictly inside the unit interval.
inline double open_unit(double q) {
  static constexpr double lo = std::numeric_limits<double>::min();
  static const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(q, lo, hi);
}

inline void check_ranges(std::span<const Range> bounds, std::size_t length, const char* who) {
  for (const auto& r : bounds) {
    if (r.start >= r.end)
      throw ValidationError(std::string(who) + ": empty sentence range [" +
                            std::to_string(r.start) + "," + std::to_string(r.end) + ")");
    if (r.end > length)
      throw ValidationError(std::string(who) + ": sentence range [" + std::to_string(r.start) +
                            "," + std::to_string(r.end) + ") exceeds " +
                            std::to_string(length) + " tokens");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Span aggregation

/// Per-sentence evidence from unnormalized start/end scores u, v > 0:
/// q = tanh(max over a <= b inside the sentence of sqrt(u_a * v_b)).
/// Pairs with b < a are masked out.
inline std::vector<double> aggregate_span_evidence(std::span<const double> u,
                                                   std::span<const double> v,
                                                   std::span<const Range> sentence_boundaries) {
  if (u.size() != v.size())
    throw ValidationError("aggregate_span_evidence: start and end score lengths differ");
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!(u[i] > 0.0) || !(v[i] > 0.0))
      throw ValidationError("aggregate_span_evidence: non-positive score at token " +
                            std::to_string(i));
  detail::check_ranges(sentence_boundaries, u.size(), "aggregate_span_evidence");

  std::vector<double> q;
  q.reserve(sentence_boundaries.size());
  for (const auto& r : sentence_boundaries) {
    double best_start = 0.0;
    double best = 0.0;
    for (std::size_t b = r.start; b < r.end; ++b) {
      best_start = std::max(best_start, u[b]);
      best = std::max(best, best_start * v[b]);
    }
    q.push_back(detail::open_unit(std::tanh(std::sqrt(best))));
  }
  return q;
}

/// Same as aggregate_span_evidence with u = exp(start_logits) and
/// v = exp(end_logits), evaluated in log space so large logits cannot
/// overflow: q = tanh(exp(max_{a<=b}(s_a + e_b) / 2)).
inline std::vector<double> aggregate_span_logits(std::span<const double> start_logits,
                                                 std::span<const double> end_logits,
                                                 std::span<const Range> sentence_boundaries) {
  if (start_logits.size() != end_logits.size())
    throw ValidationError("aggregate_span_logits: start and end logit lengths differ");
  for (std::size_t i = 0; i < start_logits.size(); ++i)
    if (!std::isfinite(start_logits[i]) || !std::isfinite(end_logits[i]))
      throw ValidationError("aggregate_span_logits: non-finite logit at token " +
                            std::to_string(i));
  detail::check_ranges(sentence_boundaries, start_logits.size(), "aggregate_span_logits");

  std::vector<double> q;
  q.reserve(sentence_boundaries.size());
  for (const auto& r : sentence_boundaries) {
    double best_start = -std::numeric_limits<double>::infinity();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t b = r.start; b < r.end; ++b) {
      best_start = std::max(best_start, start_logits[b]);
      best = std::max(best, best_start + end_logits[b]);
    }
    q.push_back(detail::open_unit(std::tanh(std::exp(0.5 * best))));
  }
  return q;
}

/// Sentence-level scores collected from one passage.
using PassageSentenceScores = std::vector<std::pair<std::string, double>>;

/// Max-reduces scores that overlapping passages assigned to the same sentence.
/// Every id in `required` must have received at least one score.
inline std::map<std::string, double> merge_passage_scores(
    const std::vector<PassageSentenceScores>& per_passage,
    std::span<const std::string> required = {}) {
  std::map<std::string, double> merged;
  for (const auto& scores : per_passage) {
    for (const auto& [id, q] : scores) {
      auto [it, inserted] = merged.emplace(id, q);
      if (!inserted) it->second = std::max(it->second, q);
    }
  }
  for (const auto& id : required)
    if (!merged.contains(id))
      throw ValidationError("merge_passage_scores: sentence '" + id +
                            "' is not covered by any passage");
  return merged;
}

// ---------------------------------------------------------------------------
// Evidence sets

struct EvidenceEntry {
  std::string sentence_id;
  std::string doc_id;
  std::size_t index = 0;
  double q = 0.0;
};

struct EvidenceSet {
  std::string cluster_id;
  std::vector<EvidenceEntry> entries;  // q descending
  std::size_t k_qa = 0;
  std::size_t k_ir = 0;
  std::size_t candidate_count = 0;
};

namespace detail {

inline bool evidence_order(const EvidenceEntry& a, const EvidenceEntry& b) {
  if (a.q != b.q) return a.q > b.q;
  if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
  return a.index < b.index;
}

}  // namespace detail

/// Keeps the top min(k_qa, k_ir) candidates by q; ties by (doc_id, index).
inline EvidenceSet select_evidence(std::vector<EvidenceEntry> candidates, std::size_t k_qa,
                                   std::size_t k_ir, std::string cluster_id = {}) {
  EvidenceSet out;
  out.cluster_id = std::move(cluster_id);
  out.k_qa = k_qa;
  out.k_ir = k_ir;
  out.candidate_count = candidates.size();
  std::stable_sort(candidates.begin(), candidates.end(), detail::evidence_order);
  candidates.resize(std::min({k_qa, k_ir, candidates.size()}));
  out.entries = std::move(candidates);
  return out;
}

/// q_e = mu * qS_e + (1 - mu) * qP_e when e is in both sets, mu * qS_e when e
/// is only in the sentence-scorer set; sentences outside that set are dropped.
inline EvidenceSet ensemble_scores(const EvidenceSet& sentence_set, const EvidenceSet& span_set,
                                   double mu = 0.9) {
  if (!(mu >= 0.0 && mu <= 1.0))
    throw ConfigError("mu", "must lie in [0, 1], got " + std::to_string(mu));
  std::unordered_map<std::string, double> span_q;
  for (const auto& e : span_set.entries) span_q.emplace(e.sentence_id, e.q);

  EvidenceSet out;
  out.cluster_id = sentence_set.cluster_id;
  out.k_qa = sentence_set.k_qa;
  out.k_ir = sentence_set.k_ir;
  out.candidate_count = sentence_set.entries.size();
  for (auto e : sentence_set.entries) {
    auto it = span_q.find(e.sentence_id);
    e.q = it != span_q.end() ? mu * e.q + (1.0 - mu) * it->second : mu * e.q;
    out.entries.push_back(std::move(e));
  }
  std::stable_sort(out.entries.begin(), out.entries.end(), detail::evidence_order);
  return out;
}

// ---------------------------------------------------------------------------
// Lexical fallback scorer

/// Deterministic stand-in for a trained scorer. The ISF-weighted count of
/// query-term occurrences in a sentence is divided by the total ISF weight of
/// the query terms present in the cluster and passed through a unit-slope
/// logistic, so zero overlap gives exactly 0.5.
class LexicalFallbackScorer {
 public:
  LexicalFallbackScorer(const Cluster& c, QueryMode mode = QueryMode::full)
      : LexicalFallbackScorer(query_terms(c.query, mode), tf_isf_weights(c)) {}

  LexicalFallbackScorer(TermSet terms, IsfWeights isf)
      : terms_(std::move(terms)), isf_(std::move(isf)) {
    for (const auto& t : terms_)
      if (auto it = isf_.find(t); it != isf_.end()) query_weight_ += it->second;
  }

  double overlap(const Tokens& tokens) const {
    if (query_weight_ <= 0.0) return 0.0;
    double w = 0.0;
    for (const auto& t : tokens) {
      if (is_punctuation_token(t)) continue;
      const std::string stem = porter_stem(t);
      if (!terms_.contains(stem)) continue;
      if (auto it = isf_.find(stem); it != isf_.end()) w += it->second;
    }
    return w / query_weight_;
  }

  double operator()(const Tokens& tokens) const {
    return detail::open_unit(1.0 / (1.0 + std::exp(-overlap(tokens))));
  }

  double operator()(const Sentence& s) const { return (*this)(s.tokens); }

 private:
  TermSet terms_;
  IsfWeights isf_;
  double query_weight_ = 0.0;
};

// ---------------------------------------------------------------------------
// Score files

enum class ScoreKind { sentence, span };

struct ScoreRecord {
  std::string segment_id;
  ScoreKind kind = ScoreKind::sentence;
  double q = 0.0;
  std::vector<double> start_logits;
  std::vector<double> end_logits;
  std::vector<Range> sentence_boundaries;
};

namespace detail {

inline std::vector<double> number_array(const Json& j, const char* field, const std::string& src) {
  const auto& a = io::require(j, field, src);
  if (!a.is_array()) throw ParseError(src + ": field '" + field + "' must be an array");
  std::vector<double> out;
  out.reserve(a.size());
  for (const auto& x : a) {
    if (!x.is_number()) throw ParseError(src + ": field '" + field + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline ScoreRecord parse_score_record(const Json& j, const std::string& src) {
  ScoreRecord r;
  r.segment_id = io::require_string(j, "segment_id", src);
  const std::string kind = io::require_string(j, "kind", src);
  if (kind == "sentence") {
    r.kind = ScoreKind::sentence;
    r.q = io::require_number(j, "q", src);
  } else if (kind == "span") {
    r.kind = ScoreKind::span;
    r.start_logits = number_array(j, "start_logits", src);
    r.end_logits = number_array(j, "end_logits", src);
    const auto& b = io::require(j, "sentence_boundaries", src);
    if (!b.is_array()) throw ParseError(src + ": field 'sentence_boundaries' must be an array");
    for (const auto& pair : b) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
          !pair[1].is_number_integer() || pair[0].get<long long>() < 0 ||
          pair[1].get<long long>() < 0)
        throw ParseError(src + ": field 'sentence_boundaries' must hold [start, end] pairs");
      r.sentence_boundaries.push_back(
          {pair[0].get<std::size_t>(), pair[1].get<std::size_t>()});
    }
  } else {
    throw ParseError(src + ": field 'kind' must be 'sentence' or 'span'");
  }
  return r;
}

}  // namespace detail

/// Checks every record against the cluster it is meant to score.
inline void validate_score_records(const std::vector<ScoreRecord>& records, const Cluster& c) {
  const auto sentences = sentence_index(c);
  const auto passages = passage_index(c);
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    const std::string where = "score record '" + r.segment_id + "'";
    if (!seen.insert(r.segment_id).second)
      throw ValidationError(where + ": duplicate segment_id");
    if (r.kind == ScoreKind::sentence) {
      if (!sentences.contains(r.segment_id))
        throw ValidationError(where + ": unknown segment_id (no such sentence in cluster " +
                              c.id + ")");
      if (!(r.q > 0.0 && r.q < 1.0))
        throw ValidationError(where + ": q must lie in (0, 1), got " + std::to_string(r.q));
      continue;
    }
    auto it = passages.find(r.segment_id);
    if (it == passages.end())
      throw ValidationError(where + ": unknown segment_id (no such passage in cluster " + c.id +
                            ")");
    const Passage& p = *it->second;
    if (r.start_logits.size() != p.tokens.size() || r.end_logits.size() != p.tokens.size())
      throw ValidationError(where + ": logit lengths (" + std::to_string(r.start_logits.size()) +
                            ", " + std::to_string(r.end_logits.size()) +
                            ") do not match passage token count " +
                            std::to_string(p.tokens.size()));
    for (std::size_t i = 0; i < r.start_logits.size(); ++i)
      if (!std::isfinite(r.start_logits[i]) || !std::isfinite(r.end_logits[i]))
        throw ValidationError(where + ": non-finite logit at token " + std::to_string(i));
    if (r.sentence_boundaries != p.sentence_spans)
      throw ValidationError(where +
                            ": sentence_boundaries do not match the passage's sentence spans");
  }
}

inline std::vector<ScoreRecord> parse_score_lines(std::string_view text,
                                                  const std::string& source) {
  std::vector<ScoreRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string src = source + ":" + std::to_string(line_no);
    out.push_back(detail::parse_score_record(io::parse_json(line, src), src));
  }
  return out;
}

/// Reads a JSON-lines score file and validates it against `c`.
inline std::vector<ScoreRecord> load_score_file(const std::filesystem::path& path,
                                                const Cluster& c) {
  auto records = parse_score_lines(io::read_file(path), path.string());
  validate_score_records(records, c);
  return records;
}

inline Json to_json(const ScoreRecord& r) {
  if (r.kind == ScoreKind::sentence)
    return {{"segment_id", r.segment_id}, {"kind", "sentence"}, {"q", r.q}};
  Json bounds = Json::array();
  for (const auto& b : r.sentence_boundaries) bounds.push_back({b.start, b.end});
  return {{"segment_id", r.segment_id},
          {"kind", "span"},
          {"start_logits", r.start_logits},
          {"end_logits", r.end_logits},
          {"sentence_boundaries", std::move(bounds)}};
}

// ---------------------------------------------------------------------------
// Scoring retrieved candidates

/// Resolves q for sentences and passages: score-file records win per segment,
/// everything else goes to the lexical fallback.
class EvidenceScorer {
 public:
  explicit EvidenceScorer(LexicalFallbackScorer fallback,
                          const std::vector<ScoreRecord>& records = {})
      : fallback_(std::move(fallback)) {
    for (const auto& r : records) {
      if (r.kind == ScoreKind::sentence) sentence_q_.emplace(r.segment_id, r.q);
      else span_q_.emplace(r.segment_id, aggregate_span_logits(r.start_logits, r.end_logits,
                                                               r.sentence_boundaries));
    }
  }

  double sentence(const Sentence& s) const {
    if (auto it = sentence_q_.find(s.id()); it != sentence_q_.end()) {
      ++file_hits_;
      return it->second;
    }
    ++fallback_hits_;
    return fallback_(s);
  }

  /// One score per sentence of the passage, in passage order.
  std::vector<double> passage(const Passage& p, const Document& doc) const {
    if (auto it = span_q_.find(p.id()); it != span_q_.end()) {
      ++file_hits_;
      return it->second;
    }
    std::vector<double> q;
    for (std::size_t i = p.sentence_range.start; i < p.sentence_range.end; ++i)
      q.push_back(sentence(doc.sentences[i]));
    return q;
  }

  std::size_t file_hits() const { return file_hits_; }
  std::size_t fallback_hits() const { return fallback_hits_; }

 private:
  LexicalFallbackScorer fallback_;
  std::unordered_map<std::string, double> sentence_q_;
  std::unordered_map<std::string, std::vector<double>> span_q_;
  mutable std::size_t file_hits_ = 0;
  mutable std::size_t fallback_hits_ = 0;
};

/// Scores the retrieved segments at sentence granularity. For passages every
/// covered sentence is scored in each retrieved passage containing it and the
/// maximum is kept.
inline std::vector<EvidenceEntry> score_candidates(const Cluster& c, Unit unit,
                                                   std::span<const RankingEntry> retrieved,
                                                   const EvidenceScorer& scorer) {
  std::vector<EvidenceEntry> out;
  if (unit == Unit::sentence) {
    const auto index = sentence_index(c);
    for (const auto& e : retrieved) {
      auto it = index.find(e.segment_id);
      if (it == index.end())
        throw ValidationError("unknown sentence '" + e.segment_id + "' in cluster " + c.id);
      const Sentence& s = *it->second;
      out.push_back({e.segment_id, s.doc_id, s.index, scorer.sentence(s)});
    }
    return out;
  }

  const auto index = passage_index(c);
  std::vector<PassageSentenceScores> per_passage;
  std::vector<std::string> covered;
  for (const auto& e : retrieved) {
    auto it = index.find(e.segment_id);
    if (it == index.end())
      throw ValidationError("unknown passage '" + e.segment_id + "' in cluster " + c.id);
    const Passage& p = *it->second;
    const Document& doc = find_document(c, p.doc_id);
    const auto q = scorer.passage(p, doc);
    PassageSentenceScores scores;
    for (std::size_t i = p.sentence_range.start; i < p.sentence_range.end; ++i) {
      scores.emplace_back(doc.sentences[i].id(), q[i - p.sentence_range.start]);
      covered.push_back(doc.sentences[i].id());
    }
    per_passage.push_back(std::move(scores));
  }
  const auto merged = merge_passage_scores(per_passage, covered);
  const auto sentences = sentence_index(c);
  for (const auto& [id, q] : merged) {
    const Sentence& s = *sentences.at(id);
    out.push_back({id, s.doc_id, s.index, q});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(const EvidenceSet& e) {
  Json entries = Json::array();
  for (const auto& x : e.entries)
    entries.push_back(
        {{"sentence_id", x.sentence_id}, {"doc_id", x.doc_id}, {"index", x.index}, {"q", x.q}});
  return {{"cluster_id", e.cluster_id},
          {"k_qa", e.k_qa},
          {"k_ir", e.k_ir},
          {"candidate_count", e.candidate_count},
          {"entries", std::move(entries)}};
}

inline EvidenceSet evidence_from_json(const Json& j, const std::string& source) {
  EvidenceSet e;
  e.cluster_id = io::require_string(j, "cluster_id", source);
  e.k_qa = static_cast<std::size_t>(io::require_number(j, "k_qa", source));
  e.k_ir = static_cast<std::size_t>(io::require_number(j, "k_ir", source));
  if (auto it = j.find("candidate_count"); it != j.end() && it->is_number())
    e.candidate_count = it->get<std::size_t>();
  const auto& entries = io::require(j, "entries", source);
  if (!entries.is_array()) throw ParseError(source + ": field 'entries' must be an array");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string src = source + ": entries[" + std::to_string(i) + "]";
    const auto& x = entries[i];
    e.entries.push_back({io::require_string(x, "sentence_id", src),
                         io::require_string(x, "doc_id", src),
                         static_cast<std::size_t>(io::require_number(x, "index", src)),
                         io::require_number(x, "q", src)});
  }
  return e;
}

}  // namespace qsum
