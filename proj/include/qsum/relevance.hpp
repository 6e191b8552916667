#pragma once

// Term-frequency relevance ranking with an adaptive cumulative cutoff.

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "qsum/corpus.hpp"
#include "qsum/error.hpp"
#include "qsum/io.hpp"
#include "qsum/text.hpp"

namespace qsum {

enum class Unit { sentence, passage };
enum class QueryMode { full, title, narrative };

inline std::string to_string(Unit u) { return u == Unit::sentence ? "sentence" : "passage"; }

inline std::string to_string(QueryMode m) {
  switch (m) {
    case QueryMode::title: return "title";
    case QueryMode::narrative: return "narrative";
    default: return "full";
  }
}

inline Unit parse_unit(std::string_view s) {
  if (s == "sentence") return Unit::sentence;
  if (s == "passage") return Unit::passage;
  throw ConfigError("unit", "expected 'sentence' or 'passage', got '" + std::string(s) + "'");
}

inline QueryMode parse_query_mode(std::string_view s) {
  if (s == "full") return QueryMode::full;
  if (s == "title") return QueryMode::title;
  if (s == "narrative") return QueryMode::narrative;
  throw ConfigError("query_mode",
                    "expected 'full', 'title' or 'narrative', got '" + std::string(s) + "'");
}

/// A retrieval unit: one sentence or one passage, with its provenance.
struct Segment {
  std::string id;
  std::string doc_id;
  std::size_t position = 0;  // sentence index, or first sentence of a passage
  Range sentence_range;
  const Tokens* tokens = nullptr;
};

/// All segments of the cluster for the given unit, in document order.
inline std::vector<Segment> cluster_segments(const Cluster& c, Unit unit) {
  std::vector<Segment> out;
  if (unit == Unit::sentence) {
    for (const auto& d : c.documents)
      for (const auto& s : d.sentences)
        out.push_back({s.id(), s.doc_id, s.index, {s.index, s.index + 1}, &s.tokens});
  } else {
    for (const auto& p : c.passages)
      out.push_back({p.id(), p.doc_id, p.sentence_range.start, p.sentence_range, &p.tokens});
  }
  return out;
}

using TermSet = std::unordered_set<std::string>;

/// Stemmed non-stopword query terms for the requested part of the query.
inline TermSet query_terms(const Query& q, QueryMode mode = QueryMode::full) {
  TermSet terms;
  auto add = [&](const Tokens& toks) {
    for (const auto& t : toks)
      if (!is_punctuation_token(t) && !is_stopword(t)) terms.insert(porter_stem(t));
  };
  if (mode != QueryMode::narrative) add(q.title);
  if (mode != QueryMode::title) add(q.narrative);
  return terms;
}

/// Number of segment tokens whose stem is a query term.
inline double relevance_score(const TermSet& terms, const Tokens& segment) {
  std::size_t n = 0;
  for (const auto& t : segment)
    if (!is_punctuation_token(t) && terms.contains(porter_stem(t))) ++n;
  return static_cast<double>(n);
}

inline double relevance_score(const Query& q, const Tokens& segment,
                              QueryMode mode = QueryMode::full) {
  return relevance_score(query_terms(q, mode), segment);
}

struct RankingEntry {
  std::string segment_id;
  std::string doc_id;
  std::size_t position = 0;
  double raw_score = 0.0;
  double normalized_score = 0.0;
};

struct RelevanceRanking {
  std::string cluster_id;
  Unit unit = Unit::sentence;
  QueryMode query_mode = QueryMode::full;
  double theta = 0.75;
  std::vector<RankingEntry> entries;  // normalized score descending
  std::size_t k_ir = 0;
};

/// k = max{k : r_1 + ... + r_k < theta} over the sorted scores, at least 1.
inline std::size_t adaptive_cutoff(std::span<const double> sorted_scores, double theta) {
  if (sorted_scores.empty()) throw ValidationError("adaptive_cutoff: empty ranking");
  if (!(theta > 0.0 && theta <= 1.0))
    throw ConfigError("theta", "must lie in (0, 1], got " + std::to_string(theta));
  double cumulative = 0.0;
  std::size_t k = 0;
  for (double r : sorted_scores) {
    cumulative += r;
    if (!(cumulative < theta)) break;
    ++k;
  }
  return std::max<std::size_t>(k, 1);
}

inline std::size_t adaptive_cutoff(const RelevanceRanking& ranking, double theta) {
  std::vector<double> r;
  r.reserve(ranking.entries.size());
  for (const auto& e : ranking.entries) r.push_back(e.normalized_score);
  return adaptive_cutoff(r, theta);
}

/// Scores, normalizes (uniform when every raw score is zero) and sorts.
/// Ties are broken by (doc_id, position).
inline std::vector<RankingEntry> rank_segments(const std::vector<Segment>& segments,
                                               const TermSet& terms) {
  std::vector<RankingEntry> entries;
  entries.reserve(segments.size());
  double total = 0.0;
  for (const auto& s : segments) {
    const double raw = relevance_score(terms, *s.tokens);
    total += raw;
    entries.push_back({s.id, s.doc_id, s.position, raw, 0.0});
  }
  for (auto& e : entries)
    e.normalized_score =
        total > 0.0 ? e.raw_score / total : 1.0 / static_cast<double>(entries.size());
  std::sort(entries.begin(), entries.end(), [](const RankingEntry& a, const RankingEntry& b) {
    if (a.normalized_score != b.normalized_score) return a.normalized_score > b.normalized_score;
    if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
    return a.position < b.position;
  });
  return entries;
}

inline RelevanceRanking rank_and_normalize(const Cluster& c, Unit unit,
                                           QueryMode mode = QueryMode::full,
                                           double theta = 0.75) {
  RelevanceRanking r;
  r.cluster_id = c.id;
  r.unit = unit;
  r.query_mode = mode;
  r.theta = theta;
  r.entries = rank_segments(cluster_segments(c, unit), query_terms(c.query, mode));
  r.k_ir = adaptive_cutoff(r, theta);
  return r;
}

inline Json to_json(const RelevanceRanking& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"segment_id", e.segment_id},
                       {"doc_id", e.doc_id},
                       {"position", e.position},
                       {"raw_score", e.raw_score},
                       {"normalized_score", e.normalized_score}});
  return {{"cluster_id", r.cluster_id}, {"unit", to_string(r.unit)},
          {"query_mode", to_string(r.query_mode)}, {"theta", r.theta},
          {"k_ir", r.k_ir}, {"entries", std::move(entries)}};
}

inline RelevanceRanking ranking_from_json(const Json& j, const std::string& source) {
  RelevanceRanking r;
  r.cluster_id = io::require_string(j, "cluster_id", source);
  r.unit = parse_unit(io::require_string(j, "unit", source));
  r.query_mode = parse_query_mode(io::require_string(j, "query_mode", source));
  r.theta = io::require_number(j, "theta", source);
  const auto& entries = io::require(j, "entries", source);
  if (!entries.is_array()) throw ParseError(source + ": field 'entries' must be an array");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string esrc = source + ": entries[" + std::to_string(i) + "]";
    const auto& e = entries[i];
    r.entries.push_back({io::require_string(e, "segment_id", esrc),
                         io::require_string(e, "doc_id", esrc),
                         static_cast<std::size_t>(io::require_number(e, "position", esrc)),
                         io::require_number(e, "raw_score", esrc),
                         io::require_number(e, "normalized_score", esrc)});
  }
  r.k_ir = static_cast<std::size_t>(io::require_number(j, "k_ir", source));
  if (r.k_ir < 1 || r.k_ir > r.entries.size())
    throw ParseError(source + ": field 'k_ir' out of range");
  return r;
}

}  // namespace qsum
