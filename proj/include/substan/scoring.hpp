#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "substan/corpus.hpp"

namespace substan {

// Substantiation of one review. pct_supported is 100 for a claim-free
// review; score = pct_supported / 100 * review_len_words.
struct SubstanRecord {
  std::string review_id;
  std::string venue;
  int year = 0;
  int n_claims_pos = 0;
  int n_claims_neg = 0;
  int n_supported_pos = 0;
  int n_supported_neg = 0;
  double pct_supported = 100.0;
  std::size_t review_len_words = 0;
  double score = 0.0;

  int n_claims() const { return n_claims_pos + n_claims_neg; }
  int n_supported() const { return n_supported_pos + n_supported_neg; }
};

// A claim is supported iff an evidence span links to it. Length is the
// whitespace word count of the review text.
SubstanRecord substan_score(const AnnotatedReview& r);

// Per-group means. Claim counts and length average over all reviews of the
// group. Supported percentages average over reviews with at least one claim
// of the respective polarity (any polarity for "all"); nullopt when no
// review qualifies.
struct VenueStats {
  std::string venue;
  int year = 0;
  double claims_pos = 0.0;
  double claims_neg = 0.0;
  double claims_all = 0.0;
  std::optional<double> pct_supported_pos;
  std::optional<double> pct_supported_neg;
  std::optional<double> pct_supported_all;
  double review_len = 0.0;
  std::size_t n_reviews = 0;
};

VenueStats aggregate_stats(const std::vector<SubstanRecord>& records);

// Grouped by (venue, year), ordered by year then venue. Throws UsageError
// on an empty corpus.
std::vector<VenueStats> corpus_stats(const std::vector<AnnotatedReview>& corpus);

// Columns follow the dataset statistics table: venue, year, #claims
// (pos, neg, all), %supported (pos, neg, all), mean length, #reviews.
void write_stats_csv(std::ostream& out, const std::vector<VenueStats>& stats);
nlohmann::json to_json(const VenueStats& s);
nlohmann::json to_json(const SubstanRecord& r);

// Ranks starting at 1; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

struct Correlation {
  double rho = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

// Spearman's rho (Pearson correlation of average ranks) with a two-sided
// p-value from the t distribution with n - 2 degrees of freedom. Throws
// UsageError on length mismatch, n < 3, or a constant input.
Correlation spearman(std::span<const double> x, std::span<const double> y);
Correlation correlate_human(const std::vector<SubstanRecord>& records,
                            const std::vector<int>& ratings);

}  // namespace substan
