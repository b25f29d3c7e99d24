#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "substan/agreement.hpp"
#include "substan/baselines.hpp"
#include "substan/corpus.hpp"
#include "substan/errors.hpp"
#include "substan/linker.hpp"
#include "substan/metrics.hpp"
#include "substan/pipeline.hpp"
#include "substan/plots.hpp"
#include "substan/scoring.hpp"
#include "substan/tagger.hpp"
#include "substan/version.hpp"

namespace substan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  out << s;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

json read_json(const fs::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::parse_error& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

// Records every input file and the resolved config of one invocation.
class Run {
 public:
  Run(std::string command, const std::string& out_dir) : command_(std::move(command)) {
    if (!out_dir.empty()) {
      dir_ = out_dir;
      fs::create_directories(dir_);
      return;
    }
    fs::create_directories("runs");
    for (int k = 1;; ++k) {
      std::ostringstream name;
      name << command_ << '-' << std::setw(3) << std::setfill('0') << k;
      const fs::path candidate = fs::path("runs") / name.str();
      if (fs::create_directory(candidate)) {
        dir_ = candidate;
        return;
      }
    }
  }

  const fs::path& dir() const { return dir_; }
  fs::path operator/(const std::string& name) const { return dir_ / name; }

  void input(const fs::path& p) {
    if (fs::is_directory(p)) {
      for (const char* f : {"config.json", "weights.bin"}) {
        if (fs::exists(p / f)) input(p / f);
      }
      return;
    }
    const std::string bytes = read_file(p);
    inputs_.push_back({{"path", p.string()}, {"bytes", bytes.size()}, {"fnv1a", hex64(fnv1a(bytes))}});
  }
  void config(json c) { config_ = std::move(c); }
  void seed(std::uint64_t s) { seed_ = s; }
  void output(const std::string& name) { outputs_.push_back(name); }

  void write_manifest() const {
    json m = {{"command", command_},
              {"inputs", inputs_},
              {"config", config_},
              {"config_hash", hex64(fnv1a(config_.dump()))},
              {"outputs", outputs_},
              {"versions", {{"substan", std::string(kVersion)}, {"nlohmann_json", "3"}}}};
    if (seed_) m["seed"] = *seed_;
    write_json(dir_ / "manifest.json", m);
  }

 private:
  std::string command_;
  fs::path dir_;
  json inputs_ = json::array();
  json config_ = json::object();
  std::optional<std::uint64_t> seed_;
  std::vector<std::string> outputs_;
};

// "a.b=value" with a JSON value, or a bare string when it does not parse.
void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError("override '" + assignment + "' is not of the form key=value");
  }
  std::string pointer = "/" + assignment.substr(0, eq);
  std::replace(pointer.begin(), pointer.end(), '.', '/');
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  const json::json_pointer ptr(pointer);
  if (!config.contains(ptr)) throw UsageError("unknown config key '" + assignment.substr(0, eq) + "'");
  config[ptr] = value;
}

json resolve_config(json defaults, const std::string& file, const std::vector<std::string>& sets) {
  if (!file.empty()) defaults.merge_patch(read_json(file));
  for (const auto& s : sets) apply_override(defaults, s);
  return defaults;
}

std::vector<AnnotatedReview> load(Run& run, const std::string& path) {
  run.input(path);
  return load_corpus(path);
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::vector<std::vector<ArgSpan>> parallel_map(
    std::size_t n, int workers, const std::function<std::vector<ArgSpan>(std::size_t)>& fn) {
  std::vector<std::vector<ArgSpan>> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const int k = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (k == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < k; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<AnnotatedReview> with_spans(const std::vector<AnnotatedReview>& corpus,
                                        std::vector<std::vector<ArgSpan>> spans) {
  std::vector<AnnotatedReview> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    AnnotatedReview r{corpus[i].review, std::move(spans[i])};
    std::stable_sort(r.spans.begin(), r.spans.end(),
                     [](const ArgSpan& a, const ArgSpan& b) { return a.start < b.start; });
    out.push_back(std::move(r));
  }
  return out;
}

// Predictions in gold order, matched by review id.
std::vector<std::vector<ArgSpan>> match_predictions(const std::vector<AnnotatedReview>& gold,
                                                    const std::vector<AnnotatedReview>& pred) {
  std::map<std::string, const AnnotatedReview*> by_id;
  for (const auto& p : pred) by_id[p.review.id] = &p;
  std::vector<std::vector<ArgSpan>> out;
  for (const auto& g : gold) {
    const auto it = by_id.find(g.review.id);
    if (it == by_id.end()) throw DataError("no prediction for review " + g.review.id);
    if (it->second->review.text != g.review.text) {
      throw DataError("prediction text differs from gold for review " + g.review.id);
    }
    out.push_back(it->second->spans);
  }
  return out;
}

json claim_report(const std::vector<AnnotatedReview>& gold,
                  const std::vector<std::vector<ArgSpan>>& pred, const Tokenizer& tokenizer) {
  SpanScorer scorer;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto a = align_tokens(gold[i].review.text, tokenizer);
    std::vector<ArgSpan> claims;
    for (const auto& s : pred[i]) {
      if (is_claim(s.type)) claims.push_back(s);
    }
    scorer.add(snap_to_tokens(gold[i].claims(), a), snap_to_tokens(claims, a));
  }
  return to_json(scorer.result());
}

// ---------------------------------------------------------------- commands

int cmd_validate(const std::string& path, bool multi, RatingRange ratings, const std::string& out_dir,
                 std::ostream& out) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  json report = json::array();
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  std::size_t records = 0;
  const auto add = [&](std::size_t ln, const std::string& id, const std::string& rule,
                       const std::string& message) {
    out << path << ':' << ln << ": " << (id.empty() ? "" : id + ": ") << rule << ": " << message
        << '\n';
    report.push_back({{"line", ln}, {"id", id}, {"rule", rule}, {"message", message}});
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++records;
    AnnotatedReview r;
    try {
      r = review_from_json(json::parse(line));
    } catch (const json::exception& e) {
      add(line_no, "", "malformed", e.what());
      continue;
    } catch (const DataError& e) {
      add(line_no, "", "malformed", e.what());
      continue;
    }
    const std::string key = multi ? r.review.id + "\x1f" + r.review.annotator_id.value_or("") : r.review.id;
    if (multi && !r.review.annotator_id) add(line_no, r.review.id, "missing-annotator", "record has no annotator_id");
    if (auto [it, fresh] = seen.emplace(key, line_no); !fresh) {
      add(line_no, r.review.id, "duplicate-id", "first seen on line " + std::to_string(it->second));
    }
    for (const auto& v : validate_review(r, ratings)) add(line_no, r.review.id, v.rule, describe(v));
  }
  out << records << " records, " << report.size() << " violations\n";
  if (!out_dir.empty()) {
    Run run("validate", out_dir);
    run.input(path);
    run.config({{"multi_annotator", multi}, {"rating_min", ratings.min}, {"rating_max", ratings.max}});
    write_json(run / "validation.json", {{"records", records}, {"violations", report}});
    run.output("validation.json");
    run.write_manifest();
  }
  return report.empty() ? kOk : kDataError;
}

int cmd_split(const std::string& corpus_path, double fraction, std::uint64_t seed,
              const std::string& out_dir, std::ostream& out) {
  Run run("split", out_dir);
  const auto corpus = load(run, corpus_path);
  const auto split = split_corpus(corpus, fraction, seed);
  save_corpus(run / "train.jsonl", split.train);
  save_corpus(run / "test.jsonl", split.test);
  run.config({{"test_fraction", fraction}});
  run.seed(seed);
  run.output("train.jsonl");
  run.output("test.jsonl");
  run.write_manifest();
  out << split.train.size() << " train, " << split.test.size() << " test -> " << run.dir().string()
      << '\n';
  return kOk;
}

struct TrainArgs {
  std::string train;
  std::string test;
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  int runs = 1;
  std::string compare;
  std::string out;
};

// Shared by both training commands: per-run models and scores, their mean,
// and an optional t-test against the runs of an earlier report.
template <typename Config, typename Train, typename Score>
int train_runs(const std::string& command, const TrainArgs& args, json defaults,
               Config (*parse)(const json&), std::uint64_t& (*seed_of)(Config&), Train train,
               Score score, const std::string& primary, std::ostream& out) {
  if (args.runs < 1) throw UsageError("--runs must be at least 1");
  json resolved = resolve_config(std::move(defaults), args.config, args.sets);
  Config config = parse(resolved);
  if (args.seed) seed_of(config) = *args.seed;
  config.validate();

  Run run(command, args.out);
  const auto corpus = load(run, args.train);
  std::vector<AnnotatedReview> test;
  if (!args.test.empty()) test = load(run, args.test);
  const std::uint64_t base_seed = seed_of(config);
  run.config(to_json(config));
  run.seed(base_seed);

  json runs = json::array();
  std::vector<double> primary_scores;
  for (int k = 0; k < args.runs; ++k) {
    Config c = config;
    seed_of(c) = base_seed + static_cast<std::uint64_t>(k);
    const auto model = train(corpus, c);
    const std::string name = args.runs == 1 ? "model" : "run-" + std::to_string(k + 1) + "/model";
    model.save(run / name);
    run.output(name);
    json entry = {{"run", k + 1}, {"seed", seed_of(c)}, {"model", name},
                  {"training_log", to_json(model.training_log())}};
    if (!test.empty()) {
      entry["test"] = score(model, test);
      primary_scores.push_back(entry["test"].at(json::json_pointer(primary)).template get<double>());
    }
    out << command << " run " << k + 1 << "/" << args.runs << " done";
    if (!test.empty()) out << ", " << primary << " = " << primary_scores.back();
    out << '\n';
    runs.push_back(entry);
  }

  json report = {{"runs", runs}, {"primary_metric", primary}};
  if (!primary_scores.empty()) {
    report["mean"] = mean_of(primary_scores);
    report["stddev"] = stddev_of(primary_scores);
    report["scores"] = primary_scores;
  }
  if (!args.compare.empty()) {
    run.input(args.compare);
    const json other = read_json(args.compare);
    const auto theirs = other.at("scores").get<std::vector<double>>();
    const auto t = two_sided_t_test(primary_scores, theirs);
    report["t_test"] = {{"against", args.compare}, {"t", t.t}, {"dof", t.dof}, {"p_value", t.p_value}};
  }
  write_json(run / "report.json", report);
  run.output("report.json");
  run.write_manifest();
  out << "wrote " << run.dir().string() << '\n';
  return kOk;
}

std::uint64_t& tagger_seed(TaggerConfig& c) { return c.seed; }
std::uint64_t& linker_seed(LinkerConfig& c) { return c.training.seed; }

int cmd_train_tagger(const TrainArgs& args, std::ostream& out) {
  const auto train = [](const std::vector<AnnotatedReview>& corpus, const TaggerConfig& c) {
    return train_tagger(corpus, c);
  };
  const auto score = [](const TaggerModel& model, const std::vector<AnnotatedReview>& test) {
    const Tokenizer tokenizer = tokenizer_by_name(model.config().tokenizer);
    std::vector<std::vector<ArgSpan>> pred;
    for (const auto& r : test) pred.push_back(predict_claims(model, r.review, tokenizer));
    return claim_report(test, pred, tokenizer);
  };
  return train_runs("train-tagger", args, to_json(TaggerConfig{}), &tagger_config_from_json,
                    &tagger_seed, train, score, "/macro/f1", out);
}

int cmd_train_linker(const TrainArgs& args, std::ostream& out) {
  const auto train = [](const std::vector<AnnotatedReview>& corpus, const LinkerConfig& c) {
    return train_linker(corpus, c);
  };
  const auto score = [](const LinkerModel& model, const std::vector<AnnotatedReview>& test) {
    return to_json(evaluate_linkage(model, test));
  };
  return train_runs("train-linker", args, to_json(LinkerConfig{}), &linker_config_from_json,
                    &linker_seed, train, score, "/exact_match", out);
}

int cmd_predict(const std::string& tagger_dir, const std::string& linker_dir,
                const std::string& corpus_path, int workers, const std::string& out_dir,
                std::ostream& out) {
  Run run("predict", out_dir);
  const auto corpus = load(run, corpus_path);
  run.input(tagger_dir);
  const TaggerModel tagger = TaggerModel::load(tagger_dir);
  std::optional<LinkerModel> linker;
  if (!linker_dir.empty()) {
    run.input(linker_dir);
    linker = LinkerModel::load(linker_dir);
  }
  const bool shared = default_backend().shareable_for_scoring();
  const int pool = shared ? workers : 1;
  auto spans = parallel_map(corpus.size(), pool, [&](std::size_t i) {
    if (linker) return run_pipeline(tagger, *linker, corpus[i].review);
    return predict_claims(tagger, corpus[i].review);
  });
  save_corpus(run / "predictions.jsonl", with_spans(corpus, std::move(spans)));
  run.config({{"tagger", tagger_dir}, {"linker", linker_dir}, {"workers", pool}});
  run.output("predictions.jsonl");
  run.write_manifest();
  out << "predicted " << corpus.size() << " reviews -> " << (run / "predictions.jsonl").string()
      << '\n';
  return kOk;
}

int cmd_evaluate(const std::string& gold_path, const std::string& pred_path,
                 const std::string& linker_dir, const std::string& tokenizer_name,
                 const std::string& out_dir, std::ostream& out) {
  Run run("evaluate", out_dir);
  const auto gold = load(run, gold_path);
  const auto pred = match_predictions(gold, load(run, pred_path));
  const Tokenizer tokenizer = tokenizer_by_name(tokenizer_name);
  json report = {{"claims", claim_report(gold, pred, tokenizer)}};
  const PipelineReport pipeline = pipeline_eval(gold, pred, tokenizer);
  report["pipeline"] = to_json(pipeline);
  if (!linker_dir.empty()) {
    run.input(linker_dir);
    report["linkage_gold_claims"] = to_json(evaluate_linkage(LinkerModel::load(linker_dir), gold));
  }
  write_json(run / "metrics.json", report);
  std::ofstream csv(run / "metrics.csv");
  write_metrics_csv(csv, report);
  plots::write_png(run / "confusion.png",
                   plots::confusion_heatmap(pipeline.confusion, "TOKEN CONFUSION", "GOLD", "PREDICTED"));
  run.config({{"tokenizer", tokenizer_name}, {"linker", linker_dir}});
  for (const char* f : {"metrics.json", "metrics.csv", "confusion.png"}) run.output(f);
  run.write_manifest();
  out << "claim macro F1 " << report["claims"]["macro"]["f1"].get<double>() << " -> "
      << run.dir().string() << '\n';
  return kOk;
}

int cmd_baseline(const std::string& corpus_path, const std::string& tokenizer_name,
                 const std::string& out_dir, std::ostream& out) {
  Run run("baseline", out_dir);
  const auto corpus = load(run, corpus_path);
  const Tokenizer tokenizer = tokenizer_by_name(tokenizer_name);
  std::vector<std::vector<ArgSpan>> pred;
  EvidenceScorer linkage;
  for (const auto& r : corpus) {
    const auto a = align_tokens(r.review.text, tokenizer);
    auto spans = sentiment_claim_baseline(r.review, segment_sentences, lexicon_sentiment);
    const auto claims = spans;
    for (const auto& c : claims) {
      const auto ans = similarity_evidence_baseline(r.review, c, segment_sentences, lexical_bertscore, a);
      if (auto ev = answer_to_span(ans, c, a)) spans.push_back(*ev);
    }
    pred.push_back(std::move(spans));
    for (const auto& q : build_queries(r, a)) {
      linkage.add(*q.gold, similarity_evidence_baseline(r.review, q.claim, segment_sentences,
                                                        lexical_bertscore, a));
    }
  }
  json report = {{"claims", claim_report(corpus, pred, tokenizer)},
                 {"linkage_gold_claims", to_json(linkage.mean())},
                 {"pipeline", to_json(pipeline_eval(corpus, pred, tokenizer))}};
  save_corpus(run / "predictions.jsonl", with_spans(corpus, std::move(pred)));
  write_json(run / "metrics.json", report);
  run.config({{"claims", "sentence-lexicon-sentiment"},
              {"evidence", "lexical-bertscore-most-similar-sentence"},
              {"tokenizer", tokenizer_name}});
  run.output("predictions.jsonl");
  run.output("metrics.json");
  run.write_manifest();
  out << "baseline claim macro F1 " << report["claims"]["macro"]["f1"].get<double>() << " -> "
      << run.dir().string() << '\n';
  return kOk;
}

int cmd_agreement(const std::string& corpus_path, const std::string& tokenizer_name,
                  const std::string& out_dir, std::ostream& out) {
  Run run("agreement", out_dir);
  run.input(corpus_path);
  const auto reviews = load_annotator_corpus(corpus_path);
  const Tokenizer tokenizer = tokenizer_by_name(tokenizer_name);
  const auto report = agreement_report(reviews, tokenizer);
  write_json(run / "agreement.json", to_json(report));
  run.output("agreement.json");
  for (const auto& [pair, confusion] : report.pair_confusion) {
    const std::string name = "confusion_" + pair.first + "_" + pair.second + ".png";
    plots::write_png(run / name, plots::confusion_heatmap(confusion, "ANNOTATOR CONFUSION",
                                                          pair.first, pair.second));
    run.output(name);
  }
  std::vector<AnnotatedReview> consensus;
  for (const auto& r : reviews) {
    if (r.layers.size() == 3) consensus.push_back(consensus_review(r, tokenizer));
  }
  if (!consensus.empty()) {
    save_corpus(run / "consensus.jsonl", consensus);
    run.output("consensus.jsonl");
  }
  run.config({{"tokenizer", tokenizer_name}});
  run.write_manifest();
  out << "u-alpha " << report.u_alpha << " over " << report.n_reviews << " reviews, "
      << consensus.size() << " consensus reviews -> " << run.dir().string() << '\n';
  return kOk;
}

int cmd_score(const std::string& corpus_path, const std::string& out_dir, std::ostream& out) {
  Run run("score", out_dir);
  const auto corpus = load(run, corpus_path);
  std::vector<SubstanRecord> records;
  std::ostringstream csv;
  csv << "review_id,venue,year,claims,supported,pct_supported,review_len,score\n";
  json items = json::array();
  std::vector<SubstanRecord> rated;
  std::vector<int> ratings;
  for (const auto& r : corpus) {
    const auto rec = substan_score(r);
    csv << rec.review_id << ',' << rec.venue << ',' << rec.year << ',' << rec.n_claims() << ','
        << rec.n_supported() << ',' << rec.pct_supported << ',' << rec.review_len_words << ','
        << rec.score << '\n';
    items.push_back(to_json(rec));
    if (r.review.human_substantiation) {
      rated.push_back(rec);
      ratings.push_back(*r.review.human_substantiation);
    }
  }
  json report = {{"records", items}};
  if (rated.size() >= 3) {
    try {
      const auto c = correlate_human(rated, ratings);
      report["correlation"] = {{"spearman_rho", c.rho}, {"p_value", c.p_value}, {"n", c.n}};
    } catch (const UsageError& e) {
      report["correlation"] = {{"skipped", e.what()}};
    }
  } else {
    report["correlation"] = {{"skipped", "fewer than 3 reviews carry human ratings"}};
  }
  write_text(run / "scores.csv", csv.str());
  write_json(run / "scores.json", report);
  run.output("scores.csv");
  run.output("scores.json");
  run.write_manifest();
  out << "scored " << corpus.size() << " reviews -> " << run.dir().string() << '\n';
  return kOk;
}

int cmd_stats(const std::string& corpus_path, const std::string& group_by,
              const std::string& out_dir, std::ostream& out) {
  Run run("stats", out_dir);
  auto corpus = load(run, corpus_path);
  if (group_by == "none") {
    for (auto& r : corpus) {
      r.review.venue = "ALL";
      r.review.year = 0;
    }
  } else if (group_by != "venue") {
    throw UsageError("--group-by must be venue or none");
  }
  const auto stats = corpus_stats(corpus);
  std::ostringstream csv;
  write_stats_csv(csv, stats);
  write_text(run / "stats.csv", csv.str());
  json j = json::array();
  for (const auto& s : stats) j.push_back(to_json(s));
  write_json(run / "stats.json", j);

  std::map<std::pair<int, std::string>, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& r : corpus) {
    const auto rec = substan_score(r);
    auto& g = groups[{r.review.year, r.review.venue}];
    g.first.push_back(static_cast<double>(rec.review_len_words));
    g.second.push_back(static_cast<double>(rec.n_claims()));
  }
  std::vector<std::pair<std::string, std::vector<double>>> lengths, claims;
  for (const auto& [key, v] : groups) {
    const std::string label = key.first ? key.second + " " + std::to_string(key.first) : key.second;
    lengths.emplace_back(label, v.first);
    claims.emplace_back(label, v.second);
  }
  plots::write_png(run / "review_length.png", plots::box_plot(lengths, "REVIEW LENGTH (WORDS)"));
  plots::write_png(run / "claims.png", plots::box_plot(claims, "CLAIMS PER REVIEW"));
  run.config({{"group_by", group_by}});
  for (const char* f : {"stats.csv", "stats.json", "review_length.png", "claims.png"}) run.output(f);
  run.write_manifest();
  out << csv.str();
  return kOk;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir,
               std::ostream& out) {
  Run run("report", out_dir);
  json summary = json::array();
  std::ostringstream md;
  md << "| run | command | config hash | seed | result |\n|---|---|---|---|---|\n";
  for (const auto& d : run_dirs) {
    const fs::path dir(d);
    if (!fs::exists(dir / "manifest.json")) throw DataError(d + " has no manifest.json");
    run.input(dir / "manifest.json");
    const json manifest = read_json(dir / "manifest.json");
    json entry = {{"run", d}, {"manifest", manifest}};
    std::string result;
    for (const char* f : {"report.json", "metrics.json", "agreement.json", "stats.json", "scores.json"}) {
      if (!fs::exists(dir / f)) continue;
      run.input(dir / f);
      const json j = read_json(dir / f);
      entry[fs::path(f).stem().string()] = j;
      if (result.empty()) {
        if (j.contains("mean")) result = "mean " + j["primary_metric"].get<std::string>() + " = " + j["mean"].dump();
        else if (j.contains("claims")) result = "claim macro F1 = " + j["claims"]["macro"]["f1"].dump();
        else if (j.contains("u_alpha")) result = "u-alpha = " + j["u_alpha"].dump();
      }
    }
    md << "| " << d << " | " << manifest.value("command", "") << " | "
       << manifest.value("config_hash", "") << " | "
       << (manifest.contains("seed") ? manifest["seed"].dump() : "") << " | " << result << " |\n";
    summary.push_back(entry);
  }
  write_json(run / "summary.json", summary);
  write_text(run / "summary.md", md.str());
  run.output("summary.json");
  run.output("summary.md");
  run.write_manifest();
  out << md.str();
  return kOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Claim and evidence extraction for peer reviews", "substan"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::function<int()> action;
  std::string out_dir;
  std::string tokenizer = "word_punct";

  auto* validate = app.add_subcommand("validate", "Check a corpus against the annotation invariants");
  std::string v_corpus;
  bool v_multi = false;
  RatingRange ratings;
  validate->add_option("corpus", v_corpus, "JSONL corpus")->required()->check(CLI::ExistingFile);
  validate->add_flag("--multi-annotator", v_multi, "Records carry annotator_id; ids may repeat");
  validate->add_option("--rating-min", ratings.min, "Lowest human rating");
  validate->add_option("--rating-max", ratings.max, "Highest human rating");
  validate->add_option("--out", out_dir, "Also write validation.json here");
  validate->callback([&] {
    action = [&] { return cmd_validate(v_corpus, v_multi, ratings, out_dir, out); };
  });

  auto* split = app.add_subcommand("split", "Seeded train/test split");
  std::string s_corpus;
  double fraction = 0.2;
  std::uint64_t s_seed = 42;
  split->add_option("corpus", s_corpus)->required()->check(CLI::ExistingFile);
  split->add_option("--test-fraction", fraction, "Fraction of reviews in the test part");
  split->add_option("--seed", s_seed);
  split->add_option("--out", out_dir);
  split->callback([&] { action = [&] { return cmd_split(s_corpus, fraction, s_seed, out_dir, out); }; });

  TrainArgs targs;
  std::uint64_t t_seed = 0;
  const auto add_train = [&](CLI::App* sub) {
    sub->add_option("--train", targs.train, "Training corpus")->required()->check(CLI::ExistingFile);
    sub->add_option("--test", targs.test, "Corpus scored after each run")->check(CLI::ExistingFile);
    sub->add_option("--config", targs.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--set", targs.sets, "Config override key=value (dotted keys for nesting)");
    sub->add_option("--seed", t_seed, "Seed of the first run");
    sub->add_option("--runs", targs.runs, "Independent runs with seeds seed, seed+1, ...");
    sub->add_option("--compare", targs.compare, "Earlier report.json to t-test against")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", targs.out);
  };
  auto* train_t = app.add_subcommand("train-tagger", "Train the claim tagger");
  add_train(train_t);
  train_t->callback([&] {
    if (train_t->count("--seed")) targs.seed = t_seed;
    action = [&] { return cmd_train_tagger(targs, out); };
  });
  auto* train_l = app.add_subcommand("train-linker", "Train the evidence linker");
  add_train(train_l);
  train_l->callback([&] {
    if (train_l->count("--seed")) targs.seed = t_seed;
    action = [&] { return cmd_train_linker(targs, out); };
  });

  auto* predict = app.add_subcommand("predict", "Tag claims and link evidence");
  std::string p_tagger, p_linker, p_corpus;
  int workers = 1;
  predict->add_option("--tagger", p_tagger, "Tagger model directory")->required()->check(CLI::ExistingDirectory);
  predict->add_option("--linker", p_linker, "Linker model directory")->check(CLI::ExistingDirectory);
  predict->add_option("--corpus", p_corpus)->required()->check(CLI::ExistingFile);
  predict->add_option("--workers", workers, "Worker threads over reviews");
  predict->add_option("--out", out_dir);
  predict->callback([&] {
    action = [&] { return cmd_predict(p_tagger, p_linker, p_corpus, workers, out_dir, out); };
  });

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against gold");
  std::string e_gold, e_pred, e_linker;
  evaluate->add_option("--gold", e_gold)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--pred", e_pred)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--linker", e_linker, "Also score this linker on gold claims")
      ->check(CLI::ExistingDirectory);
  evaluate->add_option("--tokenizer", tokenizer);
  evaluate->add_option("--out", out_dir);
  evaluate->callback([&] {
    action = [&] { return cmd_evaluate(e_gold, e_pred, e_linker, tokenizer, out_dir, out); };
  });

  auto* baseline = app.add_subcommand("baseline", "Sentiment claims and similarity evidence");
  std::string b_corpus;
  baseline->add_option("--corpus", b_corpus)->required()->check(CLI::ExistingFile);
  baseline->add_option("--tokenizer", tokenizer);
  baseline->add_option("--out", out_dir);
  baseline->callback([&] { action = [&] { return cmd_baseline(b_corpus, tokenizer, out_dir, out); }; });

  auto* agreement = app.add_subcommand("agreement", "Inter-annotator agreement and consensus");
  std::string a_corpus;
  agreement->add_option("--corpus", a_corpus, "Multi-annotator JSONL")->required()->check(CLI::ExistingFile);
  agreement->add_option("--tokenizer", tokenizer);
  agreement->add_option("--out", out_dir);
  agreement->callback([&] { action = [&] { return cmd_agreement(a_corpus, tokenizer, out_dir, out); }; });

  auto* score = app.add_subcommand("score", "Per-review substantiation scores");
  std::string sc_corpus;
  score->add_option("--corpus", sc_corpus)->required()->check(CLI::ExistingFile);
  score->add_option("--out", out_dir);
  score->callback([&] { action = [&] { return cmd_score(sc_corpus, out_dir, out); }; });

  auto* stats = app.add_subcommand("stats", "Corpus statistics per venue and year");
  std::string st_corpus, group_by = "venue";
  stats->add_option("--corpus", st_corpus)->required()->check(CLI::ExistingFile);
  stats->add_option("--group-by", group_by, "venue or none");
  stats->add_option("--out", out_dir);
  stats->callback([&] { action = [&] { return cmd_stats(st_corpus, group_by, out_dir, out); }; });

  auto* report = app.add_subcommand("report", "Summarize earlier run directories");
  std::vector<std::string> run_dirs;
  report->add_option("runs", run_dirs, "Run directories")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", out_dir);
  report->callback([&] { action = [&] { return cmd_report(run_dirs, out_dir, out); }; });

  std::vector<const char*> argv{"substan"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }
  try {
    return action();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace substan::cli
