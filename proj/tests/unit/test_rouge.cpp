#include <catch_amalgamated.hpp>

#include <algorithm>

#include "support.hpp"

using namespace qsum;
using Catch::Matchers::WithinAbs;

namespace {

RougeReport score(const std::string& cand, std::vector<std::string> refs) {
  return evaluate_cluster(cand, refs);
}

void check_prf(const PRF& x, double p, double r) {
  CHECK_THAT(x.precision, WithinAbs(p, 1e-15));
  CHECK_THAT(x.recall, WithinAbs(r, 1e-15));
  const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  CHECK_THAT(x.f1, WithinAbs(f, 1e-15));
}

}  // namespace

TEST_CASE("ROUGE reference examples") {
  const auto cat = score("the cat sat", {"the cat slept"});
  check_prf(cat.rouge1.aggregate, 2.0 / 3, 2.0 / 3);
  check_prf(cat.rouge2.aggregate, 1.0 / 2, 1.0 / 2);

  check_prf(score("a b", {"a c"}).rouge_su4.aggregate, 1.0 / 3, 1.0 / 3);
  check_prf(score("a", {"a"}).rouge_su4.aggregate, 1.0, 1.0);

  const auto same = score("Coral reefs bleach in hot water.", {"Coral reefs bleach in hot water."});
  check_prf(same.rouge1.aggregate, 1.0, 1.0);
  check_prf(same.rouge2.aggregate, 1.0, 1.0);
  check_prf(same.rouge_su4.aggregate, 1.0, 1.0);

  const auto disjoint = score("alpha beta gamma", {"delta epsilon"});
  check_prf(disjoint.rouge1.aggregate, 0.0, 0.0);
  check_prf(disjoint.rouge2.aggregate, 0.0, 0.0);
  check_prf(disjoint.rouge_su4.aggregate, 0.0, 0.0);
}

TEST_CASE("ROUGE hand-counted pairs") {
  // Each expectation was counted by hand from the stemmed, punctuation-free
  // token lists.

  // cand [a b c d], ref [a b x d]: unigrams 3/4; bigrams ab 1 of 3.
  const auto r1 = score("a b c d", {"a b x d"});
  check_prf(r1.rouge1.aggregate, 3.0 / 4, 3.0 / 4);
  check_prf(r1.rouge2.aggregate, 1.0 / 3, 1.0 / 3);
  // SU4: 4 unigrams + 6 skip pairs = 10 units each; shared a,b,d,(a,b),(a,d),(b,d) = 6.
  check_prf(r1.rouge_su4.aggregate, 6.0 / 10, 6.0 / 10);

  // Clipping: cand [the the the the], ref [the cat]: min(4,1)=1.
  const auto r2 = score("the the the the", {"the cat"});
  check_prf(r2.rouge1.aggregate, 1.0 / 4, 1.0 / 2);
  check_prf(r2.rouge2.aggregate, 0.0, 0.0);

  // Stemming folds "cats"/"cat" and "running"/"run".
  const auto r3 = score("cats running", {"cat run"});
  check_prf(r3.rouge1.aggregate, 1.0, 1.0);
  check_prf(r3.rouge2.aggregate, 1.0, 1.0);

  // Punctuation is ignored: [x y], ref [x , y .] -> [x y].
  check_prf(score("x y", {"x, y."}).rouge2.aggregate, 1.0, 1.0);

  // Different lengths: cand [a b], ref [a b c d e]: R1 P=1, R=2/5; R2 P=1, R=1/4.
  const auto r5 = score("a b", {"a b c d e"});
  check_prf(r5.rouge1.aggregate, 1.0, 2.0 / 5);
  check_prf(r5.rouge2.aggregate, 1.0, 1.0 / 4);

  // Order matters for bigrams only: cand [b a], ref [a b].
  const auto r6 = score("b a", {"a b"});
  check_prf(r6.rouge1.aggregate, 1.0, 1.0);
  check_prf(r6.rouge2.aggregate, 0.0, 0.0);
  // SU4: {b,a,(b,a)} vs {a,b,(a,b)} -> 2/3.
  check_prf(r6.rouge_su4.aggregate, 2.0 / 3, 2.0 / 3);

  // Skip distance: in [a x x x x x b] the pair (a,b) has 5 words between, beyond the window.
  // cand [a b] units {a,b,(a,b)}; ref units: 7 unigrams + pairs within gap 4.
  // ref pairs: i=0..6, j up to i+5 -> 5+5+4+3+2+1+0... counted: from index 0: 5 pairs (1..5),
  // 1: 5 (2..6), 2: 4, 3: 3, 4: 2, 5: 1 -> 20. Total ref units 27, overlap {a, b} = 2.
  const auto r7 = score("a b", {"a x x x x x b"});
  check_prf(r7.rouge_su4.aggregate, 2.0 / 3, 2.0 / 27);

  // Gap exactly four still counts: ref [a x x x x b] -> pairs 5+4+3+2+1 = 15, units 21,
  // overlap {a, b, (a,b)} = 3.
  const auto r8 = score("a b", {"a x x x x b"});
  check_prf(r8.rouge_su4.aggregate, 3.0 / 3, 3.0 / 21);

  // Two references: R1 against [a b] gives P=R=1, against [c d] gives 0.
  // Means P=1/2, R=1/2.
  const auto r9 = score("a b", {"a b", "c d"});
  check_prf(r9.rouge1.aggregate, 1.0 / 2, 1.0 / 2);
  REQUIRE(r9.rouge1.per_reference.size() == 2);
  check_prf(r9.rouge1.per_reference[0], 1.0, 1.0);

  // Two references of different length: cand [a b c];
  // ref1 [a] -> P=1/3, R=1; ref2 [a b c d] -> P=1, R=3/4.
  // Means P=2/3, R=7/8.
  const auto r10 = score("a b c", {"a", "a b c d"});
  check_prf(r10.rouge1.aggregate, 2.0 / 3, 7.0 / 8);
  check_prf(r10.rouge1.per_reference[0], 1.0 / 3, 1.0);

  // Repeated bigram clipping: cand [a b a b], ref [a b]: bigrams ab x2, ba x1 vs ab x1 -> 1/3, 1/1.
  const auto r11 = score("a b a b", {"a b"});
  check_prf(r11.rouge2.aggregate, 1.0 / 3, 1.0);
}

TEST_CASE("ROUGE properties") {
  test::Rng rng;
  const std::vector<std::string> vocab{"reef", "coral", "heat", "ocean", "algae", "water", "fish", "the"};
  auto random_text = [&](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += vocab[rng.index(0, vocab.size() - 1)] + " ";
    return s;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const std::string x = random_text(rng.index(2, 30));
    const auto self = score(x, {x});
    CHECK(self.rouge1.aggregate.f1 == 1.0);
    CHECK(self.rouge2.aggregate.f1 == 1.0);
    CHECK(self.rouge_su4.aggregate.f1 == 1.0);

    const std::string cand = random_text(rng.index(1, 40));
    const std::string ref = random_text(rng.index(1, 40));
    const auto rep = score(cand, {ref});
    for (const auto* s : {&rep.rouge1, &rep.rouge2, &rep.rouge_su4}) {
      CHECK(s->aggregate.precision <= 1.0);
      CHECK(s->aggregate.recall <= 1.0);
    }

    // Appending a reference bigram never lowers recall.
    const Tokens rt = tokenize(ref);
    if (rt.size() >= 2) {
      const std::size_t i = rng.index(0, rt.size() - 2);
      const auto more = score(cand + " " + rt[i] + " " + rt[i + 1], {ref});
      CHECK(more.rouge1.aggregate.recall >= rep.rouge1.aggregate.recall);
      CHECK(more.rouge2.aggregate.recall >= rep.rouge2.aggregate.recall);
      CHECK(more.rouge_su4.aggregate.recall >= rep.rouge_su4.aggregate.recall);
    }

    // Reference order does not matter.
    std::vector<std::string> refs{ref, random_text(5), random_text(9)};
    const Json a = to_json(evaluate_cluster(cand, refs));
    std::shuffle(refs.begin(), refs.end(), rng.engine());
    const auto b = evaluate_cluster(cand, refs);
    CHECK(a["rouge_1"]["f1"] == to_json(b)["rouge_1"]["f1"]);
    CHECK(a["rouge_su4"]["recall"] == to_json(b)["rouge_su4"]["recall"]);
  }
}

TEST_CASE("words past the length limit never count") {
  std::string head;
  for (int i = 0; i < 250; ++i) head += "w" + std::to_string(i) + ", ";
  const std::string ref = "alpha beta gamma";
  const auto base = score(head, {ref});
  const auto padded = score(head + "alpha beta gamma", {ref});
  CHECK(to_json(padded) == to_json(base));
  CHECK(base.rouge1.aggregate.recall == 0.0);

  RougeOptions opts;
  opts.length_limit = 2;
  const std::vector<std::string> refs{"a b c"};
  check_prf(evaluate_cluster("a b c", refs, opts).rouge1.aggregate, 1.0, 2.0 / 3);
}

TEST_CASE("corpus macro-average") {
  std::map<std::string, std::string> sums{{"c1", "the cat sat"}};
  std::map<std::string, std::vector<std::string>> refs{{"c1", {"the cat sat"}}, {"c2", {"dog"}}};
  CHECK(evaluate_corpus(sums, refs).rouge1.f1 == 1.0);

  sums["c2"] = "bird";
  const auto two = evaluate_corpus(sums, refs);
  CHECK(two.rouge1.f1 == 0.5);
  CHECK(two.clusters.size() == 2);

  sums["c3"] = "x";
  CHECK_THROWS_AS(evaluate_corpus(sums, refs), ValidationError);
}

TEST_CASE("references load from a directory tree") {
  const auto refs = load_references(std::string(QSUM_SAMPLES_DIR) + "/refs");
  REQUIRE(refs.contains("reefs"));
  CHECK(refs.at("reefs").size() == 2);
  CHECK(refs.at("transit").size() == 1);
}
