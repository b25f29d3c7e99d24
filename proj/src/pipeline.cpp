#include "substan/pipeline.hpp"

#include <algorithm>
#include <utility>

namespace substan {

std::vector<ArgSpan> run_pipeline(const TaggerModel& tagger, const LinkerModel& linker,
                                  const Review& review) {
  const auto a = align_tokens(review.text, tokenizer_by_name(linker.config().training.tokenizer));
  std::vector<ArgSpan> out = predict_claims(tagger, review);
  const auto max_len = static_cast<std::size_t>(linker.config().training.max_len);
  std::vector<std::pair<double, ArgSpan>> candidates;
  for (const auto& q : build_queries(out, a)) {
    if (q.claim_tokens.size() + 2 >= max_len) continue;  // claim alone fills the budget
    const auto answer = predict_evidence(linker, q);
    if (auto ev = answer_to_span(answer, q.claim, a)) candidates.emplace_back(answer.score, *ev);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<ArgSpan> evidence;
  for (const auto& [score, ev] : candidates) {
    const bool clash = std::any_of(evidence.begin(), evidence.end(), [&](const ArgSpan& kept) {
      return kept.range().overlaps(ev.range());
    });
    if (!clash) evidence.push_back(ev);
  }
  out.insert(out.end(), evidence.begin(), evidence.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const ArgSpan& x, const ArgSpan& y) { return x.start < y.start; });
  return out;
}

}  // namespace substan
