#include "substan/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "substan/errors.hpp"

namespace substan {

using nlohmann::json;

SubstanRecord substan_score(const AnnotatedReview& r) {
  SubstanRecord rec;
  rec.review_id = r.review.id;
  rec.venue = r.review.venue;
  rec.year = r.review.year;
  for (const auto& c : r.claims()) {
    const bool supported = r.evidence_for(c).has_value();
    if (is_positive(c.type)) {
      ++rec.n_claims_pos;
      rec.n_supported_pos += supported;
    } else {
      ++rec.n_claims_neg;
      rec.n_supported_neg += supported;
    }
  }
  rec.review_len_words = word_count(r.review.text);
  rec.pct_supported =
      rec.n_claims() == 0 ? 100.0 : 100.0 * rec.n_supported() / static_cast<double>(rec.n_claims());
  rec.score = rec.pct_supported / 100.0 * static_cast<double>(rec.review_len_words);
  return rec;
}

VenueStats aggregate_stats(const std::vector<SubstanRecord>& records) {
  VenueStats s;
  if (records.empty()) return s;
  s.venue = records.front().venue;
  s.year = records.front().year;
  s.n_reviews = records.size();
  const double n = static_cast<double>(records.size());
  double pos_sum = 0.0, neg_sum = 0.0, all_sum = 0.0;
  std::size_t pos_n = 0, neg_n = 0, all_n = 0;
  for (const auto& r : records) {
    s.claims_pos += r.n_claims_pos;
    s.claims_neg += r.n_claims_neg;
    s.claims_all += r.n_claims();
    s.review_len += static_cast<double>(r.review_len_words);
    if (r.n_claims_pos > 0) {
      pos_sum += 100.0 * r.n_supported_pos / r.n_claims_pos;
      ++pos_n;
    }
    if (r.n_claims_neg > 0) {
      neg_sum += 100.0 * r.n_supported_neg / r.n_claims_neg;
      ++neg_n;
    }
    if (r.n_claims() > 0) {
      all_sum += r.pct_supported;
      ++all_n;
    }
  }
  s.claims_pos /= n;
  s.claims_neg /= n;
  s.claims_all /= n;
  s.review_len /= n;
  if (pos_n) s.pct_supported_pos = pos_sum / static_cast<double>(pos_n);
  if (neg_n) s.pct_supported_neg = neg_sum / static_cast<double>(neg_n);
  if (all_n) s.pct_supported_all = all_sum / static_cast<double>(all_n);
  return s;
}

std::vector<VenueStats> corpus_stats(const std::vector<AnnotatedReview>& corpus) {
  if (corpus.empty()) throw UsageError("cannot compute statistics of an empty corpus");
  std::map<std::pair<int, std::string>, std::vector<SubstanRecord>> groups;
  for (const auto& r : corpus) {
    groups[{r.review.year, r.review.venue}].push_back(substan_score(r));
  }
  std::vector<VenueStats> out;
  for (const auto& [key, records] : groups) out.push_back(aggregate_stats(records));
  return out;
}

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string fixed(const std::optional<double>& v, int digits) {
  return v ? fixed(*v, digits) : std::string();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_stats_csv(std::ostream& out, const std::vector<VenueStats>& stats) {
  out << "venue,year,claims_pos,claims_neg,claims_all,pct_supported_pos,pct_supported_neg,"
         "pct_supported_all,review_len,n_reviews\n";
  for (const auto& s : stats) {
    out << csv_field(s.venue) << ',' << s.year << ',' << fixed(s.claims_pos, 2) << ','
        << fixed(s.claims_neg, 2) << ',' << fixed(s.claims_all, 2) << ','
        << fixed(s.pct_supported_pos, 2) << ',' << fixed(s.pct_supported_neg, 2) << ','
        << fixed(s.pct_supported_all, 2) << ',' << fixed(s.review_len, 0) << ',' << s.n_reviews
        << '\n';
  }
}

json to_json(const VenueStats& s) {
  const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"venue", s.venue},
          {"year", s.year},
          {"claims", {{"pos", s.claims_pos}, {"neg", s.claims_neg}, {"all", s.claims_all}}},
          {"pct_supported",
           {{"pos", opt(s.pct_supported_pos)},
            {"neg", opt(s.pct_supported_neg)},
            {"all", opt(s.pct_supported_all)}}},
          {"review_len", s.review_len},
          {"n_reviews", s.n_reviews}};
}

json to_json(const SubstanRecord& r) {
  return {{"review_id", r.review_id},
          {"venue", r.venue},
          {"year", r.year},
          {"n_claims_pos", r.n_claims_pos},
          {"n_claims_neg", r.n_claims_neg},
          {"n_supported_pos", r.n_supported_pos},
          {"n_supported_neg", r.n_supported_neg},
          {"pct_supported", r.pct_supported},
          {"review_len_words", r.review_len_words},
          {"score", r.score}};
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("correlation inputs differ in length");
  if (x.size() < 3) throw UsageError("correlation needs at least three observations");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw UsageError("correlation is undefined for a constant input");
  Correlation c;
  c.n = x.size();
  c.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::fabs(c.rho) >= 1.0) {
    c.p_value = 0.0;
  } else {
    const double dof = n - 2.0;
    const double t = c.rho * std::sqrt(dof / (1.0 - c.rho * c.rho));
    const boost::math::students_t dist(dof);
    c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
  }
  return c;
}

Correlation correlate_human(const std::vector<SubstanRecord>& records,
                            const std::vector<int>& ratings) {
  std::vector<double> scores, human;
  for (const auto& r : records) scores.push_back(r.score);
  for (int v : ratings) human.push_back(v);
  return spearman(scores, human);
}

}  // namespace substan
