#ifndef LSCD_CORPUS_HPP
#define LSCD_CORPUS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lscd/common.hpp"

namespace lscd {

using Sentence = std::vector<std::string>;

// Frequency profile of a corpus before thresholding. Dispersion measures
// normalize against these constants, not against the thresholded corpus.
struct RawCorpusStats {
  std::size_t token_count = 0;
  std::size_t type_count = 0;
  std::unordered_map<std::string, std::size_t> freq;
};

struct Corpus {
  std::vector<Sentence> sentences;
  std::size_t token_count = 0;
  std::string label;
  RawCorpusStats raw;

  void recount_tokens() {
    token_count = 0;
    for (const auto& s : sentences) token_count += s.size();
  }

  // Rebuilds the raw profile from the current content. Used after
  // corpus transforms, where the transformed corpus is the new ground
  // truth for normalization.
  void refresh_raw_stats() {
    raw.freq.clear();
    raw.token_count = 0;
    for (const auto& s : sentences)
      for (const auto& t : s) {
        ++raw.freq[t];
        ++raw.token_count;
      }
    raw.type_count = raw.freq.size();
  }
};

namespace detail {
struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const {
    return std::hash<std::string_view>{}(s);
  }
};
struct StringEq {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const {
    return a == b;
  }
};
}  // namespace detail

// Word <-> index mapping with per-word frequencies. Construction
// preserves the order it is given; the factories define the two
// canonical orders used in this library.
class Vocabulary {
 public:
  Vocabulary() = default;

  explicit Vocabulary(std::vector<std::pair<std::string, std::size_t>> entries) {
    words_.reserve(entries.size());
    freqs_.reserve(entries.size());
    for (auto& [w, f] : entries) {
      if (index_.count(w))
        throw DataError("duplicate word in vocabulary: " + w);
      index_.emplace(w, words_.size());
      words_.push_back(std::move(w));
      freqs_.push_back(f);
    }
  }

  // Frequency descending, ties by word ascending. The order used for
  // corpus-derived vocabularies.
  static Vocabulary by_frequency(
      const std::unordered_map<std::string, std::size_t>& counts) {
    std::vector<std::pair<std::string, std::size_t>> entries(counts.begin(),
                                                             counts.end());
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    return Vocabulary(std::move(entries));
  }

  // Word ascending. The order used for shared vocabularies.
  static Vocabulary lexicographic(
      std::vector<std::pair<std::string, std::size_t>> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return Vocabulary(std::move(entries));
  }

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  const std::string& word(std::size_t index) const { return words_.at(index); }
  std::size_t freq(std::size_t index) const { return freqs_.at(index); }
  const std::vector<std::string>& words() const { return words_; }

  std::optional<std::size_t> find(std::string_view w) const {
    auto it = index_.find(w);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(std::string_view w) const { return index_.find(w) != index_.end(); }

  std::size_t at(std::string_view w) const {
    auto idx = find(w);
    if (!idx) throw DataError("word not in vocabulary: " + std::string(w));
    return *idx;
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::size_t> freqs_;
  std::unordered_map<std::string, std::size_t, detail::StringHash,
                     detail::StringEq>
      index_;
};

struct LoadedCorpus {
  Corpus corpus;
  Vocabulary vocab;
};

// One sentence per line, tokens separated by whitespace. Tokens whose
// corpus frequency falls below min_count are removed; sentences emptied
// by the removal are dropped. min_count = 0 keeps everything.
inline LoadedCorpus load_corpus(const std::filesystem::path& path,
                                std::size_t min_count,
                                std::string label = std::string()) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read corpus file: " + path.string());

  Corpus corpus;
  corpus.label = label.empty() ? path.filename().string() : std::move(label);

  std::string line;
  while (std::getline(in, line)) {
    auto tokens = split_whitespace(line);
    if (tokens.empty()) continue;
    corpus.raw.token_count += tokens.size();
    for (const auto& t : tokens) ++corpus.raw.freq[t];
    corpus.sentences.push_back(std::move(tokens));
  }
  corpus.raw.type_count = corpus.raw.freq.size();

  std::unordered_map<std::string, std::size_t> kept;
  for (const auto& [w, f] : corpus.raw.freq)
    if (f >= min_count) kept.emplace(w, f);

  if (min_count > 1) {
    std::vector<Sentence> filtered;
    filtered.reserve(corpus.sentences.size());
    for (auto& sent : corpus.sentences) {
      Sentence s;
      s.reserve(sent.size());
      for (auto& t : sent)
        if (kept.count(t)) s.push_back(std::move(t));
      if (!s.empty()) filtered.push_back(std::move(s));
    }
    corpus.sentences = std::move(filtered);
  }
  corpus.recount_tokens();

  if (corpus.sentences.empty())
    throw DataError("corpus empty after thresholding: " + path.string());

  return LoadedCorpus{std::move(corpus), Vocabulary::by_frequency(kept)};
}

// Vocabulary of the current content; used after transforms that change
// frequencies (shuffle control, downsampling, target injection).
inline Vocabulary build_vocabulary(const Corpus& corpus,
                                   std::size_t min_count = 0) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& s : corpus.sentences)
    for (const auto& t : s) ++counts[t];
  std::unordered_map<std::string, std::size_t> kept;
  for (const auto& [w, f] : counts)
    if (f >= min_count) kept.emplace(w, f);
  if (kept.empty()) throw DataError("corpus empty after thresholding");
  return Vocabulary::by_frequency(kept);
}

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::string out;
  for (const auto& sent : corpus.sentences) {
    for (std::size_t i = 0; i < sent.size(); ++i) {
      if (i) out += ' ';
      out += sent[i];
    }
    out += '\n';
  }
  atomic_write_file(path, out);
}

inline std::vector<std::string> load_targets(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read target list: " + path.string());
  std::vector<std::string> targets;
  std::unordered_set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = split_whitespace(line);
    if (tokens.empty()) continue;
    if (seen.insert(tokens.front()).second) targets.push_back(tokens.front());
  }
  if (targets.empty()) throw DataError("target list is empty: " + path.string());
  return targets;
}

struct WindowPolicy {
  enum class Mode { fixed, dynamic };
  std::size_t size = 10;
  Mode mode = Mode::fixed;
};

// Emits (target, context) index pairs. Fixed mode uses the symmetric
// window i-n..i+n clipped at sentence bounds; dynamic mode draws an
// effective size uniformly from 1..n per target position, in corpus
// order, one draw per position. Out-of-vocabulary tokens are removed
// before positions are assigned.
template <class Sink>
void extract_windows(const Corpus& corpus, const Vocabulary& vocab,
                     const WindowPolicy& policy, std::uint64_t seed,
                     Sink&& sink) {
  if (policy.size < 1) throw ConfigError("window size must be >= 1");
  Rng rng(derive_seed(seed, stream::kWindows));
  std::vector<std::uint32_t> ids;
  for (const auto& sent : corpus.sentences) {
    ids.clear();
    for (const auto& t : sent)
      if (auto idx = vocab.find(t)) ids.push_back(static_cast<std::uint32_t>(*idx));
    const std::size_t n = ids.size();
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t eff = policy.size;
      if (policy.mode == WindowPolicy::Mode::dynamic)
        eff = 1 + static_cast<std::size_t>(rng.below(policy.size));
      const std::size_t lo = i > eff ? i - eff : 0;
      const std::size_t hi = std::min(i + eff, n ? n - 1 : 0);
      for (std::size_t j = lo; j <= hi && n; ++j)
        if (j != i) sink(ids[i], ids[j]);
    }
  }
}

inline std::vector<std::pair<std::uint32_t, std::uint32_t>> collect_windows(
    const Corpus& corpus, const Vocabulary& vocab, const WindowPolicy& policy,
    std::uint64_t seed) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  extract_windows(corpus, vocab, policy, seed,
                  [&](std::uint32_t w, std::uint32_t c) { pairs.emplace_back(w, c); });
  return pairs;
}

// Removes occurrences of frequent words before pair generation: an
// occurrence of w survives with probability min(1, sqrt(t / f(w)))
// where f(w) is w's relative frequency. Sentences emptied by the
// removal are dropped.
inline Corpus subsample_occurrences(const Corpus& corpus, const Vocabulary& vocab,
                                    double t_sub, std::uint64_t seed) {
  if (t_sub <= 0) throw ConfigError("subsampling threshold must be positive");
  if (corpus.token_count == 0) throw DataError("subsample of empty corpus");
  Rng rng(derive_seed(seed, stream::kSubsample));
  const double total = static_cast<double>(corpus.token_count);

  Corpus out;
  out.label = corpus.label;
  out.raw = corpus.raw;
  out.sentences.reserve(corpus.sentences.size());
  for (const auto& sent : corpus.sentences) {
    Sentence s;
    s.reserve(sent.size());
    for (const auto& t : sent) {
      double keep = 1.0;
      if (auto idx = vocab.find(t)) {
        const double f = static_cast<double>(vocab.freq(*idx)) / total;
        if (f > t_sub) keep = std::sqrt(t_sub / f);
      }
      if (keep >= 1.0 || rng.unit() < keep) s.push_back(t);
    }
    if (!s.empty()) out.sentences.push_back(std::move(s));
  }
  out.recount_tokens();
  return out;
}

// Builds the mixed corpus for word injection: corpus_a unchanged,
// corpus_b with every target occurrence rewritten to target+suffix, then
// a seeded shuffle of sentence order. Fails if the placeholder token
// already occurs anywhere.
inline Corpus inject_targets(const Corpus& corpus_a, const Corpus& corpus_b,
                             const std::vector<std::string>& targets,
                             const std::string& suffix, std::uint64_t seed) {
  if (suffix.empty()) throw ConfigError("placeholder suffix must be non-empty");

  std::unordered_map<std::string, std::string> rewrite;
  std::unordered_set<std::string> placeholders;
  for (const auto& t : targets) {
    rewrite.emplace(t, t + suffix);
    placeholders.insert(t + suffix);
  }
  for (const Corpus* c : {&corpus_a, &corpus_b})
    for (const auto& sent : c->sentences)
      for (const auto& tok : sent)
        if (placeholders.count(tok))
          throw DataError("placeholder token already present in corpus: " + tok);

  Corpus mixed;
  mixed.label = corpus_a.label + "+" + corpus_b.label;
  mixed.sentences.reserve(corpus_a.sentences.size() + corpus_b.sentences.size());
  for (const auto& sent : corpus_a.sentences) mixed.sentences.push_back(sent);
  for (const auto& sent : corpus_b.sentences) {
    Sentence s;
    s.reserve(sent.size());
    for (const auto& tok : sent) {
      auto it = rewrite.find(tok);
      s.push_back(it == rewrite.end() ? tok : it->second);
    }
    mixed.sentences.push_back(std::move(s));
  }
  Rng rng(derive_seed(seed, stream::kInject));
  rng.shuffle(mixed.sentences);
  mixed.recount_tokens();

  mixed.raw.token_count = corpus_a.raw.token_count + corpus_b.raw.token_count;
  mixed.raw.freq = corpus_a.raw.freq;
  for (const auto& [w, f] : corpus_b.raw.freq) {
    auto it = rewrite.find(w);
    mixed.raw.freq[it == rewrite.end() ? w : it->second] += f;
  }
  mixed.raw.type_count = mixed.raw.freq.size();
  return mixed;
}

namespace detail {
inline std::size_t occurrences(const Sentence& sent, const std::string& word) {
  std::size_t n = 0;
  for (const auto& t : sent)
    if (t == word) ++n;
  return n;
}

// Pulls every sentence containing `word` out of `corpus`, preserving the
// order of the remaining sentences. Returns (sentence, occurrence count).
inline std::vector<std::pair<Sentence, std::size_t>> extract_target_sentences(
    Corpus& corpus, const std::string& word) {
  std::vector<std::pair<Sentence, std::size_t>> pool;
  std::vector<Sentence> rest;
  rest.reserve(corpus.sentences.size());
  for (auto& sent : corpus.sentences) {
    const std::size_t occ = occurrences(sent, word);
    if (occ > 0)
      pool.emplace_back(std::move(sent), occ);
    else
      rest.push_back(std::move(sent));
  }
  corpus.sentences = std::move(rest);
  return pool;
}
}  // namespace detail

// Control condition: per target, pools that target's sentences from both
// corpora, shuffles the pool, and re-splits it greedily so each corpus
// receives close to its original occurrence count (deviation bounded by
// the largest per-sentence multiplicity). Targets are processed in list
// order; ties go to corpus_a. Sentences without any target never move.
inline std::pair<Corpus, Corpus> shuffle_control(
    const Corpus& corpus_a, const Corpus& corpus_b,
    const std::vector<std::string>& targets, std::uint64_t seed) {
  Corpus ca = corpus_a;
  Corpus cb = corpus_b;
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    const std::string& t = targets[ti];
    auto pool_a = detail::extract_target_sentences(ca, t);
    auto pool_b = detail::extract_target_sentences(cb, t);
    if (pool_a.empty() && pool_b.empty()) continue;

    long long quota_a = 0, quota_b = 0;
    for (const auto& [s, occ] : pool_a) quota_a += static_cast<long long>(occ);
    for (const auto& [s, occ] : pool_b) quota_b += static_cast<long long>(occ);

    auto pool = std::move(pool_a);
    pool.insert(pool.end(), std::make_move_iterator(pool_b.begin()),
                std::make_move_iterator(pool_b.end()));
    Rng rng(derive_seed(seed, stream::kShuffle, ti));
    rng.shuffle(pool);

    for (auto& [sent, occ] : pool) {
      if (quota_a >= quota_b) {
        ca.sentences.push_back(std::move(sent));
        quota_a -= static_cast<long long>(occ);
      } else {
        cb.sentences.push_back(std::move(sent));
        quota_b -= static_cast<long long>(occ);
      }
    }
  }
  ca.recount_tokens();
  cb.recount_tokens();
  ca.refresh_raw_stats();
  cb.refresh_raw_stats();
  return {std::move(ca), std::move(cb)};
}

// Caps every target's occurrence count per corpus near n_target by
// randomly retaining that target's sentences until the retained
// occurrences first reach n_target. Corpora with fewer occurrences are
// left alone.
inline std::pair<Corpus, Corpus> downsample_targets(
    const Corpus& corpus_a, const Corpus& corpus_b,
    const std::vector<std::string>& targets, std::size_t n_target,
    std::uint64_t seed) {
  if (n_target < 1) throw ConfigError("downsample target count must be >= 1");
  Corpus out[2] = {corpus_a, corpus_b};
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    const std::string& t = targets[ti];
    for (std::size_t side = 0; side < 2; ++side) {
      Corpus& c = out[side];
      std::size_t total = 0;
      for (const auto& sent : c.sentences) total += detail::occurrences(sent, t);
      if (total <= n_target) continue;

      auto pool = detail::extract_target_sentences(c, t);
      Rng rng(derive_seed(seed, stream::kDownsample, ti * 2 + side));
      rng.shuffle(pool);
      std::size_t kept = 0;
      for (auto& [sent, occ] : pool) {
        if (kept >= n_target) break;
        kept += occ;
        c.sentences.push_back(std::move(sent));
      }
    }
  }
  out[0].recount_tokens();
  out[1].recount_tokens();
  out[0].refresh_raw_stats();
  out[1].refresh_raw_stats();
  return {std::move(out[0]), std::move(out[1])};
}

}  // namespace lscd

#endif  // LSCD_CORPUS_HPP
