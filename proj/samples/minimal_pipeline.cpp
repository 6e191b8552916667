// Builds a two-document cluster in memory, runs the default pipeline with the
// lexical fallback scorer and prints the summary followed by its ROUGE scores.

#include <iostream>

#include "qsum/qsum.hpp"

int main() {
  using namespace qsum;

  const Query query = make_query("storms", "Hurricane preparedness",
                                 "How do coastal towns prepare for hurricane season?");
  const Cluster cluster = make_cluster(
      "storms", query,
      {{"d1",
        "Coastal towns stock sandbags and generators before hurricane season. "
        "Officials publish evacuation routes in May. The fishing fleet moves to sheltered harbors."},
       {"d2",
        "The county held its annual hurricane preparedness drill on Saturday. "
        "Volunteers checked shelters and emergency radios. A bakery opened downtown."}});

  PipelineConfig config;
  config.budget = 40;
  const RunResult result = run_pipeline(config, cluster);

  for (const auto& s : result.summary.sentences) std::cout << "- " << s.raw_text << '\n';
  std::cout << result.summary.word_count << " words\n";

  const std::vector<std::string> refs = {
      "Towns prepare for hurricanes by stocking sandbags, publishing evacuation routes and "
      "checking shelters during preparedness drills."};
  const RougeReport rouge = evaluate_cluster(result.summary.text(), refs);
  std::cout << "ROUGE-1 F1 " << rouge.rouge1.aggregate.f1 << ", ROUGE-2 F1 "
            << rouge.rouge2.aggregate.f1 << '\n';
}
