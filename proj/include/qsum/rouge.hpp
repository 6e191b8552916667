#pragma once

// ROUGE-1, ROUGE-2 and ROUGE-SU4 against multiple references.
//
// Tokens are lowercased, punctuation is dropped and words are Porter stemmed.
// Only the first `length_limit` words of the candidate are scored. Overlap
// counts are clipped per reference; per-reference precision and recall are
// averaged arithmetically across references and F1 is the harmonic mean of
// the averaged precision and recall.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qsum/error.hpp"
#include "qsum/io.hpp"
#include "qsum/text.hpp"

namespace qsum {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline PRF make_prf(double precision, double recall) {
  const double sum = precision + recall;
  return {precision, recall, sum > 0.0 ? 2.0 * precision * recall / sum : 0.0};
}

struct RougeScore {
  PRF aggregate;
  std::vector<PRF> per_reference;
};

struct RougeReport {
  RougeScore rouge1;
  RougeScore rouge2;
  RougeScore rouge_su4;
};

struct RougeOptions {
  std::size_t length_limit = 250;
  std::size_t max_skip = 4;  // words allowed between the two halves of a skip bigram
};

/// Stemmed word tokens of `tokens`, at most `limit` of them.
inline Tokens rouge_units(const Tokens& tokens, std::size_t limit = SIZE_MAX) {
  Tokens out;
  for (const auto& t : tokens) {
    if (out.size() >= limit) break;
    if (!is_punctuation_token(t)) out.push_back(porter_stem(t));
  }
  return out;
}

namespace detail {

using Counts = std::map<std::string, std::size_t>;

inline std::string key(const Tokens& w, std::size_t i, std::size_t n) {
  std::string k = w[i];
  for (std::size_t j = 1; j < n; ++j) {
    k.push_back('\x1f');
    k += w[i + j];
  }
  return k;
}

inline Counts ngram_counts(const Tokens& w, std::size_t n) {
  Counts c;
  for (std::size_t i = 0; i + n <= w.size(); ++i) ++c[key(w, i, n)];
  return c;
}

// Skip bigrams with at most `max_skip` words in between, plus unigrams.
inline Counts su_counts(const Tokens& w, std::size_t max_skip) {
  Counts c = ngram_counts(w, 1);
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 1; j < w.size() && j - i - 1 <= max_skip; ++j)
      ++c["\x1e" + w[i] + '\x1f' + w[j]];
  return c;
}

inline std::size_t total(const Counts& c) {
  std::size_t n = 0;
  for (const auto& [k, v] : c) n += v;
  return n;
}

inline PRF overlap(const Counts& cand, const Counts& ref) {
  std::size_t hit = 0;
  for (const auto& [k, v] : cand)
    if (auto it = ref.find(k); it != ref.end()) hit += std::min(v, it->second);
  const std::size_t nc = total(cand);
  const std::size_t nr = total(ref);
  return make_prf(nc ? static_cast<double>(hit) / static_cast<double>(nc) : 0.0,
                  nr ? static_cast<double>(hit) / static_cast<double>(nr) : 0.0);
}

template <typename CountFn>
RougeScore score_units(const Tokens& candidate, std::span<const Tokens> references,
                       const RougeOptions& opts, CountFn count) {
  if (references.empty()) throw ValidationError("rouge: empty reference list");
  const Counts cand = count(rouge_units(candidate, opts.length_limit));
  RougeScore s;
  std::vector<double> ps;
  std::vector<double> rs;
  for (const auto& ref : references) {
    s.per_reference.push_back(overlap(cand, count(rouge_units(ref))));
    ps.push_back(s.per_reference.back().precision);
    rs.push_back(s.per_reference.back().recall);
  }
  // Summing in sorted order makes the mean independent of reference order.
  auto mean = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
  };
  s.aggregate = make_prf(mean(ps), mean(rs));
  return s;
}

}  // namespace detail

inline RougeScore rouge_n(const Tokens& candidate, std::span<const Tokens> references,
                          std::size_t n, const RougeOptions& opts = {}) {
  if (n < 1) throw ValidationError("rouge_n: n must be >= 1");
  return detail::score_units(candidate, references, opts,
                             [n](const Tokens& w) { return detail::ngram_counts(w, n); });
}

inline RougeScore rouge_su4(const Tokens& candidate, std::span<const Tokens> references,
                            const RougeOptions& opts = {}) {
  return detail::score_units(candidate, references, opts, [&](const Tokens& w) {
    return detail::su_counts(w, opts.max_skip);
  });
}

inline RougeReport rouge_report(const Tokens& candidate, std::span<const Tokens> references,
                                const RougeOptions& opts = {}) {
  return {rouge_n(candidate, references, 1, opts), rouge_n(candidate, references, 2, opts),
          rouge_su4(candidate, references, opts)};
}

inline RougeReport evaluate_cluster(std::string_view summary_text,
                                    std::span<const std::string> reference_texts,
                                    const RougeOptions& opts = {}) {
  std::vector<Tokens> refs;
  for (const auto& r : reference_texts) refs.push_back(tokenize(r));
  return rouge_report(tokenize(summary_text), refs, opts);
}

struct CorpusReport {
  std::map<std::string, RougeReport> clusters;
  PRF rouge1;  // macro averages over clusters
  PRF rouge2;
  PRF rouge_su4;
};

/// Scores each (cluster id -> summary text) against its references and
/// macro-averages precision, recall and F1 over clusters.
inline CorpusReport evaluate_corpus(
    const std::map<std::string, std::string>& summaries,
    const std::map<std::string, std::vector<std::string>>& references,
    const RougeOptions& opts = {}) {
  CorpusReport out;
  for (const auto& [id, text] : summaries) {
    auto it = references.find(id);
    if (it == references.end() || it->second.empty())
      throw ValidationError("evaluate: missing references for cluster '" + id + "'");
    out.clusters.emplace(id, evaluate_cluster(text, it->second, opts));
  }
  if (out.clusters.empty()) return out;
  auto mean = [&](auto member) {
    PRF m;
    for (const auto& [id, rep] : out.clusters) {
      const PRF& x = (rep.*member).aggregate;
      m.precision += x.precision;
      m.recall += x.recall;
      m.f1 += x.f1;
    }
    const double n = static_cast<double>(out.clusters.size());
    return PRF{m.precision / n, m.recall / n, m.f1 / n};
  };
  out.rouge1 = mean(&RougeReport::rouge1);
  out.rouge2 = mean(&RougeReport::rouge2);
  out.rouge_su4 = mean(&RougeReport::rouge_su4);
  return out;
}

/// Reads `refs/<cluster_id>/<ref_id>.txt`, references sorted by file name.
inline std::map<std::string, std::vector<std::string>> load_references(
    const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ParseError(dir.string() + ": not a directory");
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& cluster : fs::directory_iterator(dir)) {
    if (!cluster.is_directory()) continue;
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(cluster.path()))
      if (f.is_regular_file() && f.path().extension() == ".txt") files.push_back(f.path());
    std::sort(files.begin(), files.end());
    auto& texts = out[cluster.path().filename().string()];
    for (const auto& f : files) texts.push_back(io::read_file(f));
  }
  return out;
}

inline Json to_json(const PRF& x) {
  return {{"precision", x.precision}, {"recall", x.recall}, {"f1", x.f1}};
}

inline Json to_json(const RougeScore& s) {
  Json refs = Json::array();
  for (const auto& r : s.per_reference) refs.push_back(to_json(r));
  Json j = to_json(s.aggregate);
  j["per_reference"] = std::move(refs);
  return j;
}

inline Json to_json(const RougeReport& r) {
  return {{"rouge_1", to_json(r.rouge1)},
          {"rouge_2", to_json(r.rouge2)},
          {"rouge_su4", to_json(r.rouge_su4)}};
}

inline Json to_json(const CorpusReport& r) {
  Json clusters = Json::object();
  for (const auto& [id, rep] : r.clusters) clusters[id] = to_json(rep);
  return {{"macro_average",
           {{"rouge_1", to_json(r.rouge1)},
            {"rouge_2", to_json(r.rouge2)},
            {"rouge_su4", to_json(r.rouge_su4)}}},
          {"clusters", std::move(clusters)}};
}

}  // namespace qsum
