#pragma once

// Cluster loading and segmentation into sentences and overlapping passages.

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qsum/digest.hpp"
#include "qsum/error.hpp"
#include "qsum/io.hpp"
#include "qsum/text.hpp"

namespace qsum {

struct Query {
  std::string id;
  std::string title_text;
  std::string narrative_text;
  Tokens title;
  Tokens narrative;  // empty in title-only requests
};

struct Sentence {
  std::string doc_id;
  std::size_t index = 0;
  Tokens tokens;
  std::string raw_text;

  std::string id() const { return doc_id + ":" + std::to_string(index); }
};

struct Document {
  std::string id;
  std::vector<Sentence> sentences;
};

/// Half-open index range.
struct Range {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool contains(std::size_t i) const { return start <= i && i < end; }
  friend bool operator==(const Range&, const Range&) = default;
};

struct Passage {
  std::string doc_id;
  Range sentence_range;
  Tokens tokens;                      // truncated sentence tokens, concatenated
  std::vector<Range> sentence_spans;  // token range of each sentence within `tokens`

  std::string id() const {
    return doc_id + ":" + std::to_string(sentence_range.start) + "-" +
           std::to_string(sentence_range.end);
  }
};

struct PassageOptions {
  std::size_t window = 8;
  std::size_t stride = 4;
  std::size_t max_sentence_tokens = 50;
};

struct Cluster {
  std::string id;
  Query query;
  std::vector<Document> documents;
  std::vector<Passage> passages;
  std::string source_digest;  // sha256 over the files the cluster was read from

  std::size_t sentence_count() const {
    std::size_t n = 0;
    for (const auto& d : documents) n += d.sentences.size();
    return n;
  }
};

// ---------------------------------------------------------------------------
// Sentence splitting

namespace detail {

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

inline bool starts_with_at(std::string_view s, std::size_t pos, std::string_view prefix) {
  return s.substr(pos, prefix.size()) == prefix;
}

// Length of a closing quote or bracket at `pos`, 0 if none.
inline std::size_t closer_length(std::string_view s, std::size_t pos) {
  const char c = s[pos];
  if (c == '"' || c == '\'' || c == ')' || c == ']') return 1;
  for (std::string_view q : {"”", "’", "»"})
    if (starts_with_at(s, pos, q)) return q.size();
  return 0;
}

// True if a sentence may begin at `pos`: uppercase letter or an opening quote.
inline bool opens_sentence(std::string_view s, std::size_t pos) {
  const char c = s[pos];
  if (c >= 'A' && c <= 'Z') return true;
  if (c == '"' || c == '\'' || c == '(' || c == '[') return true;
  for (std::string_view q : {"“", "‘", "«"})
    if (starts_with_at(s, pos, q)) return true;
  return false;
}

inline bool is_abbreviation(std::string_view text, std::size_t period) {
  static constexpr std::array<std::string_view, 36> kAbbrev = {
      "mr",  "mrs", "ms",  "dr",   "prof", "sr",   "jr",  "st",  "vs",
      "inc", "ltd", "co",  "corp", "gen",  "gov",  "sen", "rep", "rev",
      "lt",  "col", "sgt", "capt", "mt",   "fig",  "jan", "feb", "mar",
      "apr", "jun", "jul", "aug",  "sep",  "sept", "oct", "nov", "dec",
  };
  std::size_t b = period;
  while (b > 0 && std::isalpha(static_cast<unsigned char>(text[b - 1]))) --b;
  const std::string_view word = text.substr(b, period - b);
  if (word.empty()) return false;
  // Initials and dotted acronyms: "J. Smith", "e.g. This", "U.S. Army".
  if (word.size() == 1 && (std::isupper(static_cast<unsigned char>(word[0])) ||
                           (b > 0 && text[b - 1] == '.')))
    return true;
  std::string lower(word);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return std::find(kAbbrev.begin(), kAbbrev.end(), lower) != kAbbrev.end();
}

inline std::string normalize_space(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (is_ascii_space(c)) {
      pending = !out.empty();
    } else {
      if (pending) out.push_back(' ');
      pending = false;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace detail

/// Splits raw text into sentences.
///
/// A boundary is a run of . ! ? (plus any closing quotes or brackets) followed
/// by end of text, or by whitespace and then an uppercase letter or an opening
/// quote. A lone period after a known abbreviation or an initial is not a
/// boundary. A blank line always ends a sentence. Trailing text without
/// terminal punctuation forms the final sentence. The returned sentences have
/// no doc_id; indices are 0-based.
inline std::vector<Sentence> segment_sentences(std::string_view text) {
  std::vector<Sentence> out;
  auto emit = [&](std::size_t from, std::size_t to) {
    std::string raw = detail::normalize_space(text.substr(from, to - from));
    if (raw.empty()) return;
    Sentence s;
    s.index = out.size();
    s.tokens = tokenize(raw);
    s.raw_text = std::move(raw);
    out.push_back(std::move(s));
  };

  const std::size_t n = text.size();
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < n) {
    const char c = text[i];
    if (c == '\n') {
      std::size_t j = i;
      int newlines = 0;
      while (j < n && detail::is_ascii_space(text[j])) newlines += text[j++] == '\n';
      if (newlines >= 2) {
        emit(start, i);
        start = j;
      }
      i = j;
      continue;
    }
    if (!detail::is_terminal(c)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && detail::is_terminal(text[j])) ++j;
    std::size_t k = j;
    while (k < n) {
      const std::size_t len = detail::closer_length(text, k);
      if (len == 0) break;
      k += len;
    }
    bool boundary = false;
    if (k == n) {
      boundary = true;
    } else if (detail::is_ascii_space(text[k])) {
      std::size_t m = k;
      int newlines = 0;
      while (m < n && detail::is_ascii_space(text[m])) newlines += text[m++] == '\n';
      if (m == n || newlines >= 2) {
        boundary = true;
      } else if (detail::opens_sentence(text, m)) {
        boundary = !(j == i + 1 && c == '.' && detail::is_abbreviation(text, i));
      }
    }
    if (boundary) {
      emit(start, k);
      start = k;
      i = k;
    } else {
      i = j;
    }
  }
  emit(start, n);
  return out;
}

inline Document make_document(std::string id, std::string_view text) {
  Document doc{std::move(id), segment_sentences(text)};
  for (auto& s : doc.sentences) s.doc_id = doc.id;
  return doc;
}

// ---------------------------------------------------------------------------
// Passages

/// Sliding windows of `window` sentences every `stride` sentences. A window
/// that falls entirely inside the previously emitted one is dropped.
inline std::vector<Passage> build_passages(const Document& doc, const PassageOptions& opts = {}) {
  if (opts.stride < 1 || opts.window < opts.stride)
    throw ValidationError("build_passages: require window >= stride >= 1 (window=" +
                          std::to_string(opts.window) +
                          ", stride=" + std::to_string(opts.stride) + ")");
  if (opts.max_sentence_tokens < 1)
    throw ValidationError("build_passages: max_sentence_tokens must be >= 1");

  std::vector<Passage> out;
  const std::size_t n = doc.sentences.size();
  std::size_t last_end = 0;
  for (std::size_t s = 0; s < n; s += opts.stride) {
    const std::size_t e = std::min(s + opts.window, n);
    if (!out.empty() && e <= last_end) continue;
    Passage p;
    p.doc_id = doc.id;
    p.sentence_range = {s, e};
    for (std::size_t i = s; i < e; ++i) {
      const auto& toks = doc.sentences[i].tokens;
      const std::size_t take = std::min(toks.size(), opts.max_sentence_tokens);
      const std::size_t offset = p.tokens.size();
      p.tokens.insert(p.tokens.end(), toks.begin(), toks.begin() + static_cast<std::ptrdiff_t>(take));
      p.sentence_spans.push_back({offset, offset + take});
    }
    last_end = e;
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loading

namespace detail {

inline Query parse_query(const Json& j, const std::string& source) {
  Query q;
  q.id = io::require_string(j, "id", source);
  q.title_text = io::require_string(j, "title", source);
  q.narrative_text = io::optional_string(j, "narrative", source);
  q.title = tokenize(q.title_text);
  q.narrative = tokenize(q.narrative_text);
  if (word_count(q.title) == 0) throw ParseError(source + ": field 'title' must not be empty");
  return q;
}

inline void finish_cluster(Cluster& c, const PassageOptions& opts) {
  if (c.documents.empty()) throw ParseError(c.id + ": empty cluster (no documents)");
  std::sort(c.documents.begin(), c.documents.end(),
            [](const Document& a, const Document& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < c.documents.size(); ++i)
    if (c.documents[i].id == c.documents[i - 1].id)
      throw ParseError(c.id + ": duplicate document id '" + c.documents[i].id + "'");
  for (const auto& d : c.documents) {
    auto ps = build_passages(d, opts);
    c.passages.insert(c.passages.end(), std::make_move_iterator(ps.begin()),
                      std::make_move_iterator(ps.end()));
  }
}

inline Document load_document(std::string id, std::string_view text, const std::string& source) {
  Document d = make_document(std::move(id), text);
  if (d.sentences.empty()) throw ParseError(source + ": empty document");
  return d;
}

}  // namespace detail

/// Builds a cluster from an in-memory query and (doc id, text) pairs.
inline Cluster make_cluster(std::string id, Query query,
                            const std::vector<std::pair<std::string, std::string>>& docs,
                            const PassageOptions& opts = {}) {
  Cluster c;
  c.id = std::move(id);
  c.query = std::move(query);
  Sha256 h;
  for (const auto& [doc_id, text] : docs) {
    c.documents.push_back(detail::load_document(doc_id, text, c.id + "/" + doc_id));
    h.update_field(doc_id).update_field(text);
  }
  c.source_digest = h.hex();
  detail::finish_cluster(c, opts);
  return c;
}

inline Query make_query(std::string id, std::string title, std::string narrative = {}) {
  Json j = {{"id", id}, {"title", title}, {"narrative", narrative}};
  return detail::parse_query(j, "query");
}

/// Loads a cluster from either a directory holding `query.json` and
/// `docs/*.txt`, a directory holding `cluster.json`, or a `cluster.json` file.
inline Cluster load_cluster(const std::filesystem::path& path, const PassageOptions& opts = {}) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw ParseError(path.string() + ": no such file or directory");

  fs::path bundle;
  if (fs::is_regular_file(path)) bundle = path;
  else if (!fs::exists(path / "query.json") && fs::exists(path / "cluster.json"))
    bundle = path / "cluster.json";

  Cluster c;
  Sha256 h;
  if (!bundle.empty()) {
    const std::string src = bundle.string();
    const std::string text = io::read_file(bundle);
    h.update_field("cluster.json").update_field(text);
    const Json j = io::parse_json(text, src);
    c.id = io::optional_string(j, "id", src);
    if (c.id.empty()) c.id = fs::absolute(bundle).parent_path().filename().string();
    c.query = detail::parse_query(io::require(j, "query", src), src + ": query");
    auto it = j.find("documents");
    if (it != j.end()) {
      if (!it->is_array()) throw ParseError(src + ": field 'documents' must be an array");
      for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string dsrc = src + ": documents[" + std::to_string(i) + "]";
        const auto& dj = (*it)[i];
        c.documents.push_back(detail::load_document(io::require_string(dj, "id", dsrc),
                                                    io::require_string(dj, "text", dsrc), dsrc));
      }
    }
  } else {
    const fs::path qpath = path / "query.json";
    if (!fs::exists(qpath)) throw ParseError(path.string() + ": missing query file query.json");
    c.id = fs::absolute(path).lexically_normal().filename().string();
    if (c.id.empty()) c.id = fs::absolute(path).lexically_normal().parent_path().filename().string();
    const std::string qtext = io::read_file(qpath);
    h.update_field("query.json").update_field(qtext);
    c.query = detail::parse_query(io::parse_json(qtext, qpath.string()), qpath.string());

    std::vector<fs::path> files;
    if (fs::is_directory(path / "docs"))
      for (const auto& e : fs::directory_iterator(path / "docs"))
        if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const std::string text = io::read_file(f);
      const std::string id = f.stem().string();
      h.update_field("docs/" + f.filename().string()).update_field(text);
      c.documents.push_back(detail::load_document(id, text, f.string()));
    }
  }
  c.source_digest = h.hex();
  if (c.documents.empty()) throw ParseError(path.string() + ": empty cluster (no documents)");
  detail::finish_cluster(c, opts);
  return c;
}

// ---------------------------------------------------------------------------
// Lookup helpers

/// Maps sentence ids to sentences of a cluster. Pointers stay valid while the
/// cluster is alive and unmodified.
inline std::unordered_map<std::string, const Sentence*> sentence_index(const Cluster& c) {
  std::unordered_map<std::string, const Sentence*> m;
  m.reserve(c.sentence_count());
  for (const auto& d : c.documents)
    for (const auto& s : d.sentences) m.emplace(s.id(), &s);
  return m;
}

inline std::unordered_map<std::string, const Passage*> passage_index(const Cluster& c) {
  std::unordered_map<std::string, const Passage*> m;
  m.reserve(c.passages.size());
  for (const auto& p : c.passages) m.emplace(p.id(), &p);
  return m;
}

inline const Document& find_document(const Cluster& c, std::string_view id) {
  for (const auto& d : c.documents)
    if (d.id == id) return d;
  throw ValidationError(c.id + ": unknown document '" + std::string(id) + "'");
}

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(const Cluster& c) {
  Json docs = Json::array();
  for (const auto& d : c.documents) {
    Json sents = Json::array();
    for (const auto& s : d.sentences)
      sents.push_back({{"segment_id", s.id()},
                       {"doc_id", s.doc_id},
                       {"index", s.index},
                       {"raw_text", s.raw_text},
                       {"tokens", s.tokens}});
    docs.push_back({{"id", d.id}, {"sentences", std::move(sents)}});
  }
  Json passages = Json::array();
  for (const auto& p : c.passages) {
    Json spans = Json::array();
    for (const auto& r : p.sentence_spans) spans.push_back({r.start, r.end});
    passages.push_back({{"segment_id", p.id()},
                        {"doc_id", p.doc_id},
                        {"sentence_range", {p.sentence_range.start, p.sentence_range.end}},
                        {"token_count", p.tokens.size()},
                        {"sentence_boundaries", std::move(spans)},
                        {"tokens", p.tokens}});
  }
  return {{"cluster_id", c.id},
          {"query",
           {{"id", c.query.id},
            {"title", c.query.title_text},
            {"narrative", c.query.narrative_text},
            {"title_tokens", c.query.title},
            {"narrative_tokens", c.query.narrative}}},
          {"documents", std::move(docs)},
          {"passages", std::move(passages)}};
}

}  // namespace qsum
