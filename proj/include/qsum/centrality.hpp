#pragma once

// Evidence-biased LexRank: similarity graph over the evidence sentences, a
// transition matrix interpolated with the evidence prior, its stationary
// distribution, and greedy budgeted extraction with a redundancy penalty.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qsum/corpus.hpp"
#include "qsum/error.hpp"
#include "qsum/evidence.hpp"
#include "qsum/io.hpp"
#include "qsum/isf.hpp"

namespace qsum {

/// Square row-major matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  std::span<double> row(std::size_t i) { return {a_.data() + i * n_, n_}; }
  std::span<const double> row(std::size_t i) const { return {a_.data() + i * n_, n_}; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

struct SimilarityGraph {
  DenseMatrix cosine;      // pairwise TF-ISF cosine, diagonal zero
  DenseMatrix transition;  // row-stochastic
};

namespace detail {

using SparseVector = std::unordered_map<std::string, double>;

inline SparseVector tf_isf_vector(const Tokens& tokens, const IsfWeights& isf) {
  SparseVector v;
  for (const auto& stem : stemmed_words(tokens)) v[stem] += 1.0;
  for (auto& [w, tf] : v) {
    auto it = isf.find(w);
    tf *= it != isf.end() ? it->second : 1.0;
  }
  return v;
}

inline double norm(const SparseVector& v) {
  double s = 0.0;
  for (const auto& [w, x] : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(const SparseVector& a, const SparseVector& b) {
  const SparseVector& small = a.size() <= b.size() ? a : b;
  const SparseVector& large = a.size() <= b.size() ? b : a;
  double s = 0.0;
  for (const auto& [w, x] : small)
    if (auto it = large.find(w); it != large.end()) s += x * it->second;
  return s;
}

}  // namespace detail

/// Cosine similarity of TF-ISF vectors with the diagonal zeroed, and its row
/// normalization. A row with no similar sentence becomes uniform.
inline SimilarityGraph similarity_matrix(std::span<const Tokens* const> sentences,
                                         const IsfWeights& isf) {
  const std::size_t n = sentences.size();
  if (n == 0) throw ValidationError("similarity_matrix: no sentences");
  std::vector<detail::SparseVector> vecs;
  std::vector<double> norms;
  for (const Tokens* t : sentences) {
    vecs.push_back(detail::tf_isf_vector(*t, isf));
    norms.push_back(detail::norm(vecs.back()));
  }
  SimilarityGraph g{DenseMatrix(n), DenseMatrix(n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sim = 0.0;
      if (norms[i] > 0.0 && norms[j] > 0.0)
        sim = std::clamp(detail::dot(vecs[i], vecs[j]) / (norms[i] * norms[j]), 0.0, 1.0);
      g.cosine(i, j) = g.cosine(j, i) = sim;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (double x : g.cosine.row(i)) sum += x;
    auto row = g.transition.row(i);
    if (sum > 0.0)
      for (std::size_t j = 0; j < n; ++j) row[j] = g.cosine(i, j) / sum;
    else
      std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(n));
  }
  return g;
}

/// Normalizes nonnegative evidence scores into a distribution.
inline std::vector<double> evidence_prior(std::span<const double> q) {
  double sum = 0.0;
  for (double x : q) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw ValidationError("evidence_prior: scores must be finite and nonnegative");
    sum += x;
  }
  if (!(sum > 0.0)) throw ValidationError("evidence_prior: scores sum to zero");
  std::vector<double> out(q.begin(), q.end());
  for (double& x : out) x /= sum;
  return out;
}

/// E~_ij = phi * q~_j + (1 - phi) * E_ij.
inline DenseMatrix bias_transition(const DenseMatrix& transition, std::span<const double> prior,
                                   double phi = 0.15) {
  const std::size_t n = transition.size();
  if (prior.size() != n)
    throw ValidationError("bias_transition: prior has " + std::to_string(prior.size()) +
                          " entries for " + std::to_string(n) + " nodes");
  if (!(phi >= 0.0 && phi <= 1.0))
    throw ConfigError("phi", "must lie in [0, 1], got " + std::to_string(phi));
  DenseMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = phi * prior[j] + (1.0 - phi) * transition(i, j);
  return out;
}

struct StationaryResult {
  std::vector<double> e_star;
  int iterations = 0;
  double residual = 0.0;  // L1 change of the final step
};

/// Left fixed point e = e * P by power iteration from the uniform vector.
inline StationaryResult stationary_distribution(const DenseMatrix& p, double tol = 1e-10,
                                                int max_iter = 10000) {
  const std::size_t n = p.size();
  if (n == 0) throw ValidationError("stationary_distribution: empty matrix");
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  std::vector<double> y(n);
  double residual = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = x[i];
      const auto row = p.row(i);
      for (std::size_t j = 0; j < n; ++j) y[j] += xi * row[j];
    }
    double sum = 0.0;
    for (double v : y) sum += v;
    residual = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      y[j] /= sum;
      residual += std::abs(y[j] - x[j]);
    }
    x.swap(y);
    if (residual < tol) return {std::move(x), it, residual};
  }
  throw ConvergenceError(std::move(x), residual, max_iter);
}

/// One greedy pick: node index and its penalized score when chosen.
struct Selection {
  std::size_t node = 0;
  double score = 0.0;
};

/// Greedy extraction. Repeatedly takes the highest-scoring unselected node
/// that still fits the remaining word budget (lower index wins ties), then
/// lowers every other unselected score by omega * sim(i, j) * e*_i. Nodes
/// that do not fit are skipped, not terminal.
inline std::vector<Selection> diversity_select(std::span<const double> e_star,
                                               const DenseMatrix& similarity,
                                               std::span<const std::size_t> word_counts,
                                               std::size_t budget_words = 250,
                                               double omega = 1.0) {
  const std::size_t n = e_star.size();
  if (similarity.size() != n || word_counts.size() != n)
    throw ValidationError("diversity_select: size mismatch");
  std::vector<double> score(e_star.begin(), e_star.end());
  std::vector<bool> taken(n, false);
  std::vector<Selection> out;
  std::size_t remaining = budget_words;
  for (;;) {
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (taken[j] || word_counts[j] > remaining) continue;
      if (best == n || score[j] > score[best]) best = j;
    }
    if (best == n) break;
    taken[best] = true;
    remaining -= word_counts[best];
    out.push_back({best, score[best]});
    for (std::size_t j = 0; j < n; ++j)
      if (!taken[j]) score[j] -= omega * similarity(best, j) * e_star[best];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Summaries

enum class SummaryOrder { salience, document };

inline SummaryOrder parse_summary_order(std::string_view s) {
  if (s == "salience") return SummaryOrder::salience;
  if (s == "document") return SummaryOrder::document;
  throw ConfigError("order", "expected 'salience' or 'document', got '" + std::string(s) + "'");
}

inline std::string to_string(SummaryOrder o) {
  return o == SummaryOrder::salience ? "salience" : "document";
}

struct SummarySentence {
  std::string sentence_id;
  std::string doc_id;
  std::size_t index = 0;
  std::string raw_text;
  std::size_t words = 0;
  double initial_salience = 0.0;
  double penalized_salience = 0.0;
};

struct Summary {
  std::string cluster_id;
  std::size_t budget = 250;
  SummaryOrder order = SummaryOrder::salience;
  std::vector<SummarySentence> sentences;  // output order
  std::vector<SummarySentence> trace;      // selection order
  std::size_t word_count = 0;

  std::string text() const {
    std::string out;
    for (const auto& s : sentences) {
      if (!out.empty()) out.push_back(' ');
      out += s.raw_text;
    }
    return out;
  }
};

struct CentralityOptions {
  double phi = 0.15;
  std::size_t budget = 250;
  double omega = 1.0;
  SummaryOrder order = SummaryOrder::salience;
  bool uniform_prior = false;
  double tol = 1e-10;
  int max_iter = 10000;
};

struct CentralityResult {
  Summary summary;
  std::vector<std::string> nodes;  // evidence sentence ids, graph order
  std::vector<double> prior;
  std::vector<double> e_star;
  int iterations = 0;
};

namespace detail {

inline void finish_summary(Summary& s) {
  s.word_count = 0;
  for (const auto& x : s.trace) s.word_count += x.words;
  s.sentences = s.trace;
  if (s.order == SummaryOrder::document)
    std::stable_sort(s.sentences.begin(), s.sentences.end(),
                     [](const SummarySentence& a, const SummarySentence& b) {
                       if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
                       return a.index < b.index;
                     });
}

inline std::vector<const Sentence*> resolve(const Cluster& c, const EvidenceSet& evidence) {
  const auto index = sentence_index(c);
  std::vector<const Sentence*> out;
  for (const auto& e : evidence.entries) {
    auto it = index.find(e.sentence_id);
    if (it == index.end())
      throw ValidationError("evidence sentence '" + e.sentence_id + "' not in cluster " + c.id);
    out.push_back(it->second);
  }
  return out;
}

}  // namespace detail

/// Runs the centrality stage over an evidence set.
inline CentralityResult summarize(const Cluster& c, const EvidenceSet& evidence,
                                  const CentralityOptions& opts = {}) {
  CentralityResult r;
  r.summary.cluster_id = c.id;
  r.summary.budget = opts.budget;
  r.summary.order = opts.order;
  if (evidence.entries.empty()) return r;

  const auto sentences = detail::resolve(c, evidence);
  const std::size_t n = sentences.size();
  std::vector<const Tokens*> tokens;
  std::vector<std::size_t> words;
  std::vector<double> q;
  for (std::size_t i = 0; i < n; ++i) {
    tokens.push_back(&sentences[i]->tokens);
    words.push_back(word_count(sentences[i]->tokens));
    q.push_back(evidence.entries[i].q);
    r.nodes.push_back(evidence.entries[i].sentence_id);
  }

  const auto graph = similarity_matrix(tokens, tf_isf_weights(c));
  r.prior = opts.uniform_prior ? std::vector<double>(n, 1.0 / static_cast<double>(n))
                               : evidence_prior(q);
  const auto biased = bias_transition(graph.transition, r.prior, opts.phi);
  auto stationary = stationary_distribution(biased, opts.tol, opts.max_iter);
  r.e_star = std::move(stationary.e_star);
  r.iterations = stationary.iterations;

  for (const auto& pick : diversity_select(r.e_star, graph.cosine, words, opts.budget, opts.omega)) {
    const Sentence& s = *sentences[pick.node];
    r.summary.trace.push_back({s.id(), s.doc_id, s.index, s.raw_text, words[pick.node],
                               r.e_star[pick.node], pick.score});
  }
  detail::finish_summary(r.summary);
  return r;
}

/// The evidence ranking itself as a summary: sentences in q order, skipping
/// any that would overflow the remaining budget.
inline Summary truncate_to_budget(const Cluster& c, const EvidenceSet& evidence,
                                  std::size_t budget, SummaryOrder order = SummaryOrder::salience) {
  Summary s;
  s.cluster_id = c.id;
  s.budget = budget;
  s.order = order;
  const auto sentences = detail::resolve(c, evidence);
  std::size_t remaining = budget;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const std::size_t w = word_count(sentences[i]->tokens);
    if (w > remaining) continue;
    remaining -= w;
    const double q = evidence.entries[i].q;
    s.trace.push_back({sentences[i]->id(), sentences[i]->doc_id, sentences[i]->index,
                       sentences[i]->raw_text, w, q, q});
  }
  detail::finish_summary(s);
  return s;
}

inline Json to_json(const Summary& s) {
  auto sentence_json = [](const SummarySentence& x) {
    return Json{{"sentence_id", x.sentence_id}, {"doc_id", x.doc_id}, {"index", x.index},
                {"raw_text", x.raw_text},       {"words", x.words}};
  };
  Json sentences = Json::array();
  for (const auto& x : s.sentences) sentences.push_back(sentence_json(x));
  Json trace = Json::array();
  for (const auto& x : s.trace)
    trace.push_back({{"sentence_id", x.sentence_id},
                     {"initial_salience", x.initial_salience},
                     {"penalized_salience", x.penalized_salience}});
  return {{"cluster_id", s.cluster_id}, {"budget", s.budget},
          {"order", to_string(s.order)},  {"word_count", s.word_count},
          {"sentences", std::move(sentences)}, {"trace", std::move(trace)},
          {"text", s.text()}};
}

}  // namespace qsum
