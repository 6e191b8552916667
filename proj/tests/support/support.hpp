#pragma once

// Shared helpers for the unit and acceptance suites: a seedable RNG, random
// generators, and oracles written independently of the library code.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "qsum/qsum.hpp"

namespace qsum::test {

/// QS_SEED overrides the fixed default so failures can be replayed.
inline std::uint64_t seed() {
  if (const char* s = std::getenv("QS_SEED"); s && *s) return std::strtoull(s, nullptr, 10);
  return 20061;
}

class Rng {
 public:
  explicit Rng(std::uint64_t s = seed()) : gen_(s) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(gen_);
  }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(gen_); }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

/// Random partition of [0, length) into contiguous nonempty ranges.
inline std::vector<Range> random_boundaries(Rng& rng, std::size_t length) {
  std::vector<Range> out;
  std::size_t start = 0;
  while (start < length) {
    const std::size_t len = rng.index(1, length - start);
    out.push_back({start, start + len});
    start += len;
  }
  return out;
}

/// Random normalized ranking in descending order; some entries may be 0.
inline std::vector<double> random_ranking(Rng& rng, std::size_t n) {
  std::vector<double> raw(n);
  double sum = 0.0;
  for (auto& x : raw) {
    x = rng.coin(0.15) ? 0.0 : static_cast<double>(rng.index(1, 20));
    sum += x;
  }
  if (sum == 0.0) {
    raw[0] = 1.0;
    sum = 1.0;
  }
  for (auto& x : raw) x /= sum;
  std::sort(raw.begin(), raw.end(), std::greater<>());
  return raw;
}

/// Random row-stochastic matrix; rows with no mass become uniform.
inline DenseMatrix random_stochastic(Rng& rng, std::size_t n, double zero_p = 0.3) {
  DenseMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      m(i, j) = (i == j || rng.coin(zero_p)) ? 0.0 : rng.uniform();
      sum += m(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) m(i, j) = sum > 0.0 ? m(i, j) / sum : 1.0 / double(n);
  }
  return m;
}

inline std::vector<double> random_distribution(Rng& rng, std::size_t n, double lo = 0.01) {
  std::vector<double> q(n);
  double sum = 0.0;
  for (auto& x : q) sum += (x = rng.uniform(lo, 1.0));
  for (auto& x : q) x /= sum;
  return q;
}

// ---------------------------------------------------------------------------
// Oracles

/// Brute force over every pair (a, b) with a <= b inside each sentence.
inline std::vector<double> span_oracle(const std::vector<double>& u, const std::vector<double>& v,
                                       const std::vector<Range>& bounds) {
  std::vector<double> out;
  for (const auto& r : bounds) {
    double best = -1.0;
    for (std::size_t a = r.start; a < r.end; ++a)
      for (std::size_t b = a; b < r.end; ++b) best = std::max(best, std::tanh(std::sqrt(u[a] * v[b])));
    out.push_back(best);
  }
  return out;
}

/// Literal reading of the cutoff rule: the largest k whose prefix sum stays
/// strictly below theta, at least 1.
inline std::size_t cutoff_oracle(const std::vector<double>& r, double theta) {
  std::size_t best = 0;
  for (std::size_t k = 1; k <= r.size(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += r[j];
    if (s < theta) best = k;
  }
  return std::max<std::size_t>(best, 1);
}

/// Stationary distribution from a dense linear solve of (P^T - I) x = 0 with
/// the last equation replaced by sum(x) = 1.
inline std::vector<double> stationary_oracle(const DenseMatrix& p) {
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      a(i, j) = p(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) - (i == j ? 1.0 : 0.0);
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  const Eigen::VectorXd x = a.fullPivLu().solve(b);
  return {x.data(), x.data() + n};
}

inline double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

// ---------------------------------------------------------------------------
// Fixtures

/// Three documents of eight sentences. Only "d2:5" mentions the title terms
/// (volcanic ash, aviation) together with the narrative terms.
inline Cluster planted_cluster() {
  const Query q = make_query("planted", "Volcanic ash aviation",
                             "Explain how airlines reroute flights around eruption plumes.");
  auto doc = [](const std::vector<std::string>& sentences) {
    std::string text;
    for (const auto& s : sentences) text += s + " ";
    return text;
  };
  return make_cluster(
      "planted", q,
      {{"d1", doc({"The harvest festival opened on Friday.", "Farmers brought pumpkins and corn.",
                   "A brass band played in the square.", "Children rode a small carousel.",
                   "The mayor thanked the volunteers.", "Rain was forecast for the weekend.",
                   "Stalls sold honey and cider.", "The festival closes on Sunday."})},
       {"d2", doc({"The museum reopened after renovation.", "Its new wing holds maritime maps.",
                   "Visitors queued before the doors opened.", "A cafe now overlooks the river.",
                   "Tickets are free for students.",
                   "Volcanic ash forced aviation authorities to help airlines reroute flights "
                   "around eruption plumes.",
                   "The curator gave a short tour.", "Evening hours start next month."})},
       {"d3", doc({"The chess club met in the library.", "Two members drew a long endgame.",
                   "A junior player won the blitz round.", "Coffee was served at noon.",
                   "The club plans a spring tournament.", "New boards were donated.",
                   "Members voted on a new logo.", "The next meeting is in March."})}});
}

}  // namespace qsum::test
