#ifndef LSCD_EVAL_HPP
#define LSCD_EVAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lscd/common.hpp"
#include "lscd/corpus.hpp"
#include "lscd/measures.hpp"

namespace lscd {

// One gold row. score_text preserves the published decimal spelling so
// dumps reproduce the dataset tables byte for byte.
struct GoldEntry {
  std::string lexeme;
  std::string pos;
  double score = 0.0;
  long long freq_a = 0;
  long long freq_b = 0;
  std::string score_text;
};

struct GoldRanking {
  std::string name;  // "DURel", "SURel" or "custom"
  std::vector<GoldEntry> entries;
};

namespace detail {
struct GoldRow {
  const char* lexeme;
  const char* pos;
  const char* score;
  long long freq_a;
  long long freq_b;
};

inline GoldRanking make_gold(const char* name, std::span<const GoldRow> rows) {
  GoldRanking g;
  g.name = name;
  g.entries.reserve(rows.size());
  for (const auto& r : rows) {
    GoldEntry e;
    e.lexeme = r.lexeme;
    e.pos = r.pos;
    e.score_text = r.score;
    e.score = std::stod(e.score_text);
    e.freq_a = r.freq_a;
    e.freq_b = r.freq_b;
    g.entries.push_back(std::move(e));
  }
  return g;
}
}  // namespace detail

// Diachronic gold ranking (DTA 1750-1799 vs 1850-1899). Higher score =
// more change.
inline const GoldRanking& durel_gold() {
  static const detail::GoldRow rows[] = {
      {"Vorwort", "NN", "-1.58", 85, 273},
      {"Donnerwetter", "NN", "-1.84", 100, 89},
      {"Presse", "NN", "-1.88", 193, 1519},
      {"Feine", "NN", "-1.93", 112, 84},
      {"Anstalt", "NN", "-2.07", 425, 911},
      {"Feder", "NN", "-2.14", 1489, 3022},
      {"billig", "ADJ", "-2.43", 2073, 1705},
      {"Motiv", "NN", "-2.66", 104, 2551},
      {"Anstellung", "NN", "-2.68", 53, 499},
      {"packen", "VV", "-2.74", 279, 1057},
      {"locker", "ADJ", "-2.84", 454, 769},
      {"technisch", "ADJ", "-2.89", 25, 2177},
      {"geharnischt", "ADJ", "-3.0", 56, 117},
      {"Zufall", "NN", "-3.11", 2444, 1618},
      {"Bilanz", "NN", "-3.2", 51, 58},
      {"englisch", "ADJ", "-3.34", 1921, 7280},
      {"Reichstag", "NN", "-3.45", 609, 1781},
      {"Museum", "NN", "-3.73", 414, 1827},
      {"Abend", "NN", "-3.79", 4144, 4372},
  };
  static const GoldRanking g = detail::make_gold("DURel", rows);
  return g;
}

// Synchronic gold ranking (general language vs cooking domain).
inline const GoldRanking& surel_gold() {
  static const detail::GoldRow rows[] = {
      {"Schnee", "NN", "-1.05", 2228, 53},
      {"Strudel", "NN", "-1.05", 232, 46},
      {"schlagen", "VV", "-1.1", 14693, 309},
      {"Gericht", "NN", "-1.15", 13263, 1071},
      {"Schuß", "NN", "-1.42", 2153, 117},
      {"Hamburger", "NN", "-1.53", 5558, 46},
      {"abschrecken", "VV", "-1.75", 730, 170},
      {"Form", "NN", "-2.25", 36639, 851},
      {"trennen", "VV", "-2.65", 5771, 170},
      {"Glas", "NN", "-2.7", 3830, 863},
      {"Blech", "NN", "-2.95", 409, 145},
      {"Prise", "NN", "-3.1", 370, 622},
      {"Paprika", "NN", "-3.33", 377, 453},
      {"Mandel", "NN", "-3.45", 402, 274},
      {"Messer", "NN", "-3.5", 1774, 925},
      {"Rum", "NN", "-3.55", 244, 181},
      {"Salz", "NN", "-3.74", 3087, 5806},
      {"Eiweiß", "NN", "-3.75", 1075, 3037},
      {"Schokolade", "NN", "-3.98", 947, 251},
      {"Gemüse", "NN", "-4.0", 2696, 1224},
      {"Schnittlauch", "NN", "-4.0", 156, 247},
  };
  static const GoldRanking g = detail::make_gold("SURel", rows);
  return g;
}

// Custom gold: TSV with a header line (lexeme, pos, score, optionally
// freq_a and freq_b), one unique lexeme per row.
inline GoldRanking load_gold_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read gold file: " + path.string());
  GoldRanking g;
  g.name = "custom";
  std::string line;
  bool header_seen = false;
  std::size_t lineno = 0;
  std::map<std::string, bool> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_whitespace(line);
    if (!header_seen) {
      if (fields.empty() || fields[0] != "lexeme")
        throw DataError("gold file must start with a lexeme/pos/score header");
      header_seen = true;
      continue;
    }
    if (fields.size() < 3)
      throw DataError("gold line " + std::to_string(lineno) +
                      ": expected lexeme, pos and score");
    GoldEntry e;
    e.lexeme = fields[0];
    e.pos = fields[1];
    e.score_text = fields[2];
    try {
      e.score = std::stod(e.score_text);
    } catch (const std::exception&) {
      throw DataError("gold line " + std::to_string(lineno) + ": bad score");
    }
    if (fields.size() >= 5) {
      try {
        e.freq_a = std::stoll(fields[3]);
        e.freq_b = std::stoll(fields[4]);
      } catch (const std::exception&) {
        throw DataError("gold line " + std::to_string(lineno) + ": bad frequency");
      }
    }
    if (seen.count(e.lexeme))
      throw DataError("duplicate gold lexeme: " + e.lexeme);
    seen.emplace(e.lexeme, true);
    g.entries.push_back(std::move(e));
  }
  if (g.entries.empty())
    throw DataError("gold file has no data rows: " + path.string());
  return g;
}

inline std::string gold_to_tsv(const GoldRanking& g) {
  std::string out = "lexeme\tpos\tscore\tfreq_a\tfreq_b\n";
  for (const auto& e : g.entries) {
    out += e.lexeme + "\t" + e.pos + "\t" + e.score_text + "\t" +
           std::to_string(e.freq_a) + "\t" + std::to_string(e.freq_b) + "\n";
  }
  return out;
}

enum class GoldSourceKind { durel, surel, path };

inline GoldRanking load_gold(GoldSourceKind kind,
                             const std::filesystem::path& path = {}) {
  switch (kind) {
    case GoldSourceKind::durel:
      return durel_gold();
    case GoldSourceKind::surel:
      return surel_gold();
    case GoldSourceKind::path:
      return load_gold_tsv(path);
  }
  throw ConfigError("unknown gold source");
}

struct EvaluationReport {
  double rho = 0.0;
  std::size_t n = 0;                  // items present in both rankings
  std::vector<std::string> excluded;  // gold items missing a model score
  std::string config_hash;
  int iterations = 1;
};

// 1-based average ranks: tied values share the mean of the positions
// they occupy.
inline std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

// Tie-aware Spearman: Pearson correlation of average ranks. Average ranks
// are half-integers, so doubled ranks are exact integers and the moment
// sums below stay exact (in the 64-bit significand) far beyond any
// realistic n; the doubling cancels between numerator and denominator.
inline double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("rank correlation length mismatch");
  if (x.size() < 3) throw DataError("rank correlation needs at least 3 items");
  std::vector<double> rx = average_ranks(x);
  std::vector<double> ry = average_ranks(y);
  const std::size_t n = rx.size();
  // Identical or exactly reversed rank vectors must yield +/-1 exactly;
  // the sqrt in the general formula can miss that by an ulp.
  bool same = true, reversed = true;
  for (std::size_t i = 0; i < n; ++i) {
    same = same && rx[i] == ry[i];
    reversed = reversed && rx[i] + ry[i] == static_cast<double>(n + 1);
  }
  bool constant = true;
  for (std::size_t i = 1; i < n; ++i) constant = constant && rx[i] == rx[0];
  if (constant)
    throw NumericError("rank correlation undefined: a ranking is constant");
  if (same) return 1.0;
  if (reversed) return -1.0;
  long double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double a = 2.0L * static_cast<long double>(rx[i]);
    const long double b = 2.0L * static_cast<long double>(ry[i]);
    sx += a;
    sy += b;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  const long double nn = static_cast<long double>(n);
  const long double num = nn * sxy - sx * sy;
  const long double dxx = nn * sxx - sx * sx;
  const long double dyy = nn * syy - sy * sy;
  if (dxx == 0.0L || dyy == 0.0L)
    throw NumericError("rank correlation undefined: a ranking is constant");
  return static_cast<double>(num / (std::sqrt(dxx) * std::sqrt(dyy)));
}

// Evaluates predictions against gold over the intersection; gold items
// without a model score are excluded and listed, never imputed.
inline EvaluationReport spearman(const GoldRanking& gold,
                                 const ChangeScores& predicted) {
  EvaluationReport report;
  std::vector<double> gold_scores, pred_scores;
  for (const auto& e : gold.entries) {
    auto it = predicted.scores.find(e.lexeme);
    if (it == predicted.scores.end()) {
      report.excluded.push_back(e.lexeme);
    } else {
      gold_scores.push_back(e.score);
      pred_scores.push_back(it->second);
    }
  }
  if (gold_scores.size() < 3)
    throw DataError("fewer than 3 gold items have model scores (" +
                    std::to_string(gold_scores.size()) + " overlapping)");
  report.n = gold_scores.size();
  report.rho = spearman_rho(gold_scores, pred_scores);
  return report;
}

// Per-word arithmetic mean across runs of one configuration.
inline ChangeScores aggregate_iterations(std::span<const ChangeScores> runs) {
  if (runs.empty()) throw DataError("no runs to aggregate");
  ChangeScores out;
  out.measure = runs.front().measure;
  out.higher_means_more_change = runs.front().higher_means_more_change;
  for (const auto& run : runs) {
    if (run.measure != out.measure)
      throw DataError("aggregating runs of different measures");
    if (run.scores.size() != runs.front().scores.size())
      throw DataError("aggregating runs with mismatched word sets");
  }
  for (const auto& [word, score] : runs.front().scores) {
    double sum = score;
    for (std::size_t i = 1; i < runs.size(); ++i) {
      auto it = runs[i].scores.find(word);
      if (it == runs[i].scores.end())
        throw DataError("aggregating runs with mismatched word sets: " + word);
      sum += it->second;
    }
    out.scores[word] = sum / static_cast<double>(runs.size());
  }
  return out;
}

struct SyntheticBenchmark {
  Corpus corpus_a, corpus_b;
  GoldRanking gold;
  std::vector<std::string> targets;
};

// Desk-scale benchmark generator. Every pseudo-target t_i occurs in
// 5-token template sentences [c c t c c] whose contexts come from one
// of two disjoint style pools, "ca*" or "cb*". For a target with change
// score r, corpus A uses the ca style for (m+s)/2 of its m sentences
// and corpus B for (m-s)/2, where s = round(r*m): the style-mixture gap
// between the corpora is r, while the pooled mixture stays 50/50 for
// every target, so a shuffle control leaves no residual gradation.
// Sentence j shares its context draw indices across corpora; r=0 makes
// the corpora identical, r=1 makes the styles fully disjoint. Identical
// background sentences in both corpora use a separate filler
// vocabulary, which keeps the style words rare corpus-wide (association
// scores for minority-style contexts then stay positive instead of
// being clamped away). Gold change score = r_i; the gradation is
// square-root spaced over [0,1] because vector-space change scores grow
// quadratically in the mixture gap near zero, so this spacing keeps
// adjacent targets distinguishable along the whole scale.
inline SyntheticBenchmark synthesize_change_corpus(std::size_t n_targets,
                                                   std::size_t tokens_per_corpus,
                                                   std::uint64_t seed) {
  if (n_targets < 5) throw ConfigError("synthetic benchmark needs >= 5 targets");
  constexpr std::size_t kPool = 40;
  constexpr std::size_t kSentLen = 5;
  const std::size_t per_target =
      (tokens_per_corpus * 2 / 5) / (kSentLen * n_targets);
  if (per_target < 4)
    throw ConfigError("tokens_per_corpus too small for the target count");

  auto pool_word = [](const char* prefix, std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%s%02zu", prefix, i);
    return std::string(buf);
  };

  SyntheticBenchmark bench;
  bench.gold.name = "custom";
  bench.corpus_a.label = "synth_a";
  bench.corpus_b.label = "synth_b";

  Rng rng(derive_seed(seed, stream::kSynth));
  for (std::size_t t = 0; t < n_targets; ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "t%03zu", t);
    const std::string target(name);
    bench.targets.push_back(target);

    const double r =
        std::sqrt(static_cast<double>(t) / static_cast<double>(n_targets - 1));
    const std::size_t gap =
        static_cast<std::size_t>(std::lround(r * static_cast<double>(per_target)));
    const std::size_t old_b = (per_target - gap) / 2;
    const std::size_t old_a = old_b + gap;

    GoldEntry entry;
    entry.lexeme = target;
    entry.pos = "NN";
    entry.score = r;
    entry.score_text = format_double(r, 6);
    entry.freq_a = static_cast<long long>(per_target);
    entry.freq_b = static_cast<long long>(per_target);
    bench.gold.entries.push_back(std::move(entry));

    for (std::size_t s = 0; s < per_target; ++s) {
      std::size_t draw[4];
      for (auto& d : draw) d = static_cast<std::size_t>(rng.below(kPool));
      const char* pool_a = s < old_a ? "ca" : "cb";
      const char* pool_b = s < old_b ? "ca" : "cb";
      Sentence sa{pool_word(pool_a, draw[0]), pool_word(pool_a, draw[1]), target,
                  pool_word(pool_a, draw[2]), pool_word(pool_a, draw[3])};
      Sentence sb{pool_word(pool_b, draw[0]), pool_word(pool_b, draw[1]), target,
                  pool_word(pool_b, draw[2]), pool_word(pool_b, draw[3])};
      bench.corpus_a.sentences.push_back(std::move(sa));
      bench.corpus_b.sentences.push_back(std::move(sb));
    }
  }

  // Identical background in both corpora: two thirds from a disjoint
  // filler vocabulary (keeping style words rare corpus-wide, so
  // association scores for minority-style contexts stay positive
  // instead of being clamped away), one third pure-style sentences that
  // anchor the two pools as separate regions.
  constexpr std::size_t kFiller = 40;
  const std::size_t used = n_targets * per_target * kSentLen;
  const std::size_t n_background =
      tokens_per_corpus > used ? (tokens_per_corpus - used) / kSentLen : 0;
  for (std::size_t s = 0; s < n_background; ++s) {
    const bool pool_sentence = s % 3 == 2;
    const char* prefix = !pool_sentence ? "f" : (s % 6 == 2 ? "ca" : "cb");
    const std::size_t width = pool_sentence ? kPool : kFiller;
    Sentence sent;
    sent.reserve(kSentLen);
    for (std::size_t i = 0; i < kSentLen; ++i)
      sent.push_back(pool_word(prefix, static_cast<std::size_t>(rng.below(width))));
    bench.corpus_a.sentences.push_back(sent);
    bench.corpus_b.sentences.push_back(std::move(sent));
  }

  Rng rng_a(derive_seed(seed, stream::kSynth, 1));
  Rng rng_b(derive_seed(seed, stream::kSynth, 2));
  rng_a.shuffle(bench.corpus_a.sentences);
  rng_b.shuffle(bench.corpus_b.sentences);
  bench.corpus_a.recount_tokens();
  bench.corpus_b.recount_tokens();
  bench.corpus_a.refresh_raw_stats();
  bench.corpus_b.refresh_raw_stats();
  return bench;
}

}  // namespace lscd

#endif  // LSCD_EVAL_HPP
