#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "qsum/corpus.hpp"
#include "qsum/text.hpp"

namespace qsum {

/// Stemmed term -> inverse sentence frequency.
using IsfWeights = std::unordered_map<std::string, double>;

/// ISF(w) = 1 + ln(|C| / SF(w)), where |C| counts every sentence of the
/// cluster and SF(w) the sentences containing w. Terms are Porter stems of
/// word tokens.
inline IsfWeights tf_isf_weights(const Cluster& c) {
  std::unordered_map<std::string, std::size_t> sf;
  std::size_t total = 0;
  for (const auto& d : c.documents) {
    for (const auto& s : d.sentences) {
      ++total;
      const auto stems = stemmed_words(s.tokens);
      for (const auto& w : std::unordered_set<std::string>(stems.begin(), stems.end())) ++sf[w];
    }
  }
  IsfWeights isf;
  isf.reserve(sf.size());
  for (const auto& [w, n] : sf)
    isf.emplace(w, 1.0 + std::log(static_cast<double>(total) / static_cast<double>(n)));
  return isf;
}

}  // namespace qsum
