#pragma once

#include <vector>

#include "substan/corpus.hpp"
#include "substan/linker.hpp"
#include "substan/tagger.hpp"

namespace substan {

// Claim tagging followed by evidence linkage on the predicted claims.
// Returns claim spans and their evidence spans, sorted by start. When two
// answers overlap, only the higher scoring one (earlier claim on ties) is
// kept and the other claim stays unsupported.
std::vector<ArgSpan> run_pipeline(const TaggerModel& tagger, const LinkerModel& linker,
                                  const Review& review);

}  // namespace substan
