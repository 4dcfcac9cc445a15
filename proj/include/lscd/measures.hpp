#ifndef LSCD_MEASURES_HPP
#define LSCD_MEASURES_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lscd/common.hpp"
#include "lscd/cooc.hpp"
#include "lscd/corpus.hpp"
#include "lscd/spaces.hpp"

namespace lscd {

// Ranked change predictions. All measures here grow with change, so
// higher_means_more_change stays true; the flag exists so score files
// remain self-describing.
struct ChangeScores {
  std::string measure;
  bool higher_means_more_change = true;
  std::map<std::string, double> scores;
};

// Dense vectors and matrix rows (any orientation).
template <class DX, class DY>
double cosine_distance(const Eigen::MatrixBase<DX>& x,
                       const Eigen::MatrixBase<DY>& y) {
  if (x.size() != y.size()) throw DataError("cosine of different dimensionalities");
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0)
    throw NumericError("cosine distance undefined for zero vector");
  double dot = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) dot += x(i) * y(i);
  return 1.0 - dot / (nx * ny);
}

// Sparse rows as sorted (column, value) cells.
inline double cosine_distance(const std::vector<std::pair<std::uint32_t, double>>& x,
                              const std::vector<std::pair<std::uint32_t, double>>& y) {
  double dot = 0.0, nx = 0.0, ny = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i].first == y[j].first) {
      dot += x[i].second * y[j].second;
      ++i;
      ++j;
    } else if (x[i].first < y[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  for (const auto& [c, v] : x) nx += v * v;
  for (const auto& [c, v] : y) ny += v * v;
  if (nx == 0.0 || ny == 0.0)
    throw NumericError("cosine distance undefined for zero vector");
  return 1.0 - dot / (std::sqrt(nx) * std::sqrt(ny));
}

// Jensen-Shannon distance in log base 2: sqrt of the mean of the two
// KL divergences against the midpoint. Bounded in [0, 1]; disjoint
// supports reach exactly 1.
inline double jensen_shannon_distance(std::span<const double> p,
                                      std::span<const double> q) {
  if (p.size() != q.size())
    throw DataError("jsd of distributions with different lengths");
  if (p.empty()) throw DataError("jsd of empty distributions");
  double sp = 0.0, sq = 0.0;
  for (double v : p) {
    if (v < 0) throw DataError("jsd input has negative probability");
    sp += v;
  }
  for (double v : q) {
    if (v < 0) throw DataError("jsd input has negative probability");
    sq += v;
  }
  if (std::abs(sp - 1.0) > 1e-6 || std::abs(sq - 1.0) > 1e-6)
    throw DataError("jsd inputs must sum to 1");

  double divergence = 0.0;  // (KL(p||m) + KL(q||m)) / 2, with 0 log 0 = 0
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0) divergence += 0.5 * p[i] * std::log2(p[i] / m);
    if (q[i] > 0) divergence += 0.5 * q[i] * std::log2(q[i] / m);
  }
  if (divergence < 0) divergence = 0;  // guard rounding just below zero
  return std::sqrt(divergence);
}

// Absolute difference of log relative frequencies; the corpus sizes
// are the full pre-threshold token counts.
inline double frequency_difference(std::size_t freq_a, std::size_t tokens_a,
                                   std::size_t freq_b, std::size_t tokens_b) {
  if (tokens_a == 0 || tokens_b == 0) throw DataError("empty corpus in fd");
  if (freq_a == 0 || freq_b == 0)
    throw DataError("fd undefined for a word absent from a corpus");
  return std::abs(std::log(static_cast<double>(freq_a) /
                           static_cast<double>(tokens_a)) -
                  std::log(static_cast<double>(freq_b) /
                           static_cast<double>(tokens_b)));
}

inline double frequency_difference(const std::string& word, const Corpus& a,
                                   const Corpus& b) {
  auto ita = a.raw.freq.find(word);
  auto itb = b.raw.freq.find(word);
  return frequency_difference(ita == a.raw.freq.end() ? 0 : ita->second,
                              a.raw.token_count,
                              itb == b.raw.freq.end() ? 0 : itb->second,
                              b.raw.token_count);
}

// Absolute difference of log relative context-type counts: nonzero
// dimensions of each row against the full pre-threshold type count of
// its corpus.
inline double type_difference(std::size_t nnz_x, std::size_t types_a,
                              std::size_t nnz_y, std::size_t types_b) {
  if (types_a == 0 || types_b == 0) throw DataError("empty corpus in td");
  if (nnz_x == 0 || nnz_y == 0)
    throw DataError("td undefined for a word with no contexts");
  return std::abs(std::log(static_cast<double>(nnz_x) /
                           static_cast<double>(types_a)) -
                  std::log(static_cast<double>(nnz_y) /
                           static_cast<double>(types_b)));
}

// Natural-log entropy of the L1-normalized non-negative vector. A
// single nonzero entry has entropy 0.
inline double vector_entropy(std::span<const double> x) {
  double total = 0.0;
  std::size_t nonzero = 0;
  for (double v : x) {
    if (v < 0) throw DataError("entropy of vector with negative entries");
    if (v > 0) ++nonzero;
    total += v;
  }
  if (nonzero == 0) throw DataError("entropy of zero vector");
  if (nonzero == 1) return 0.0;
  double h = 0.0;
  for (double v : x)
    if (v > 0) {
      const double pr = v / total;
      h -= pr * std::log(pr);
    }
  return h;
}

inline std::size_t count_nonzero(std::span<const double> x) {
  std::size_t n = 0;
  for (double v : x)
    if (v != 0.0) ++n;
  return n;
}

// Absolute difference of vector entropies. The normalized variant
// divides each entropy by log of its nonzero count (a single-type
// vector normalizes with divisor 1, keeping the value 0).
inline double entropy_difference(std::span<const double> x,
                                 std::span<const double> y, bool normalized) {
  double hx = vector_entropy(x);
  double hy = vector_entropy(y);
  if (normalized) {
    const std::size_t nx = count_nonzero(x);
    const std::size_t ny = count_nonzero(y);
    hx /= nx > 1 ? std::log(static_cast<double>(nx)) : 1.0;
    hy /= ny > 1 ? std::log(static_cast<double>(ny)) : 1.0;
  }
  return std::abs(hx - hy);
}

namespace detail {

// Shared LND core: per space, rank all candidates by similarity to the
// probe word, take the k nearest (ties at the cut broken by candidate
// index), then compare the two second-order similarity vectors over the
// union of both neighborhoods.
template <class SimA, class SimB>
double lnd_from_similarities(std::size_t n_candidates, const SimA& sim_a,
                             const SimB& sim_b, std::size_t k) {
  if (k < 1) throw ConfigError("lnd neighborhood size must be >= 1");
  if (n_candidates == 0)
    throw DataError("lnd has no candidate neighbors");

  std::vector<double> sa(n_candidates), sb(n_candidates);
  for (std::size_t i = 0; i < n_candidates; ++i) {
    sa[i] = sim_a(i);
    sb[i] = sim_b(i);
  }

  const std::size_t kk = std::min(k, n_candidates);
  auto top_k = [&](const std::vector<double>& sims) {
    std::vector<std::uint32_t> order(n_candidates);
    for (std::size_t i = 0; i < n_candidates; ++i)
      order[i] = static_cast<std::uint32_t>(i);
    std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
      if (sims[x] != sims[y]) return sims[x] > sims[y];
      return x < y;
    });
    order.resize(kk);
    return order;
  };

  std::vector<std::uint32_t> hood = top_k(sa);
  std::vector<std::uint32_t> hood_b = top_k(sb);
  hood.insert(hood.end(), hood_b.begin(), hood_b.end());
  std::sort(hood.begin(), hood.end());
  hood.erase(std::unique(hood.begin(), hood.end()), hood.end());

  Eigen::VectorXd va(static_cast<Eigen::Index>(hood.size()));
  Eigen::VectorXd vb(static_cast<Eigen::Index>(hood.size()));
  for (std::size_t i = 0; i < hood.size(); ++i) {
    va(static_cast<Eigen::Index>(i)) = sa[hood[i]];
    vb(static_cast<Eigen::Index>(i)) = sb[hood[i]];
  }
  return cosine_distance(va, vb);
}

// Probe-to-candidate similarity: a zero probe is an error, a zero
// candidate row just has nothing in common with anything.
template <class DX, class DY>
double probe_cosine_sim(const Eigen::MatrixBase<DX>& probe,
                        const Eigen::MatrixBase<DY>& cand) {
  if (probe.size() != cand.size())
    throw DataError("cosine of different dimensionalities");
  const double np = probe.norm();
  if (np == 0.0)
    throw NumericError("cosine similarity undefined for zero vector");
  const double nc = cand.norm();
  if (nc == 0.0) return 0.0;
  double dot = 0.0;
  for (Eigen::Index i = 0; i < probe.size(); ++i) dot += probe(i) * cand(i);
  return dot / (np * nc);
}

inline double probe_cosine_sim(
    const std::vector<std::pair<std::uint32_t, double>>& probe,
    const std::vector<std::pair<std::uint32_t, double>>& cand) {
  if (probe.empty())
    throw NumericError("cosine similarity undefined for zero vector");
  if (cand.empty()) return 0.0;
  return 1.0 - cosine_distance(probe, cand);
}

}  // namespace detail

// LND between two embedding spaces: the probe word's neighborhoods are
// computed within each space over the shared vocabulary (excluding the
// probe), so no cross-space alignment is needed. word_b names the probe
// row in B; it defaults to the same word.
inline double local_neighborhood_distance(const EmbeddingMatrix& A,
                                          const EmbeddingMatrix& B,
                                          const std::string& word_a,
                                          const std::string& word_b,
                                          std::size_t k) {
  auto ia = A.vocab.find(word_a);
  auto ib = B.vocab.find(word_b);
  if (!ia) throw DataError("lnd probe word missing from space A: " + word_a);
  if (!ib) throw DataError("lnd probe word missing from space B: " + word_b);

  // Candidates: shared vocabulary minus both probe words, in
  // lexicographic order (the tie-break index order).
  std::vector<std::pair<std::size_t, std::size_t>> cand;
  {
    std::vector<std::pair<std::string, std::size_t>> entries;
    for (std::size_t i = 0; i < A.vocab.size(); ++i) {
      const auto& w = A.vocab.word(i);
      if (w == word_a || w == word_b) continue;
      if (B.vocab.contains(w)) entries.emplace_back(w, 0);
    }
    Vocabulary shared = Vocabulary::lexicographic(std::move(entries));
    cand.reserve(shared.size());
    for (std::size_t i = 0; i < shared.size(); ++i)
      cand.emplace_back(A.vocab.at(shared.word(i)), B.vocab.at(shared.word(i)));
  }
  if (cand.empty()) throw DataError("lnd has no candidate neighbors");

  Eigen::VectorXd xa = A.rows.row(static_cast<Eigen::Index>(*ia));
  Eigen::VectorXd xb = B.rows.row(static_cast<Eigen::Index>(*ib));
  return detail::lnd_from_similarities(
      cand.size(),
      [&](std::size_t i) {
        return detail::probe_cosine_sim(
            xa, A.rows.row(static_cast<Eigen::Index>(cand[i].first)).transpose());
      },
      [&](std::size_t i) {
        return detail::probe_cosine_sim(
            xb, B.rows.row(static_cast<Eigen::Index>(cand[i].second)).transpose());
      },
      k);
}

inline double local_neighborhood_distance(const EmbeddingMatrix& A,
                                          const EmbeddingMatrix& B,
                                          const std::string& word, std::size_t k) {
  return local_neighborhood_distance(A, B, word, word, k);
}

// Sparse LND over count or PPMI matrices.
inline double local_neighborhood_distance(const CoocMatrix& A, const CoocMatrix& B,
                                          const std::string& word_a,
                                          const std::string& word_b,
                                          std::size_t k) {
  auto ia = A.row_vocab().find(word_a);
  auto ib = B.row_vocab().find(word_b);
  if (!ia) throw DataError("lnd probe word missing from space A: " + word_a);
  if (!ib) throw DataError("lnd probe word missing from space B: " + word_b);

  std::vector<std::pair<std::size_t, std::size_t>> cand;
  {
    std::vector<std::pair<std::string, std::size_t>> entries;
    for (std::size_t i = 0; i < A.row_vocab().size(); ++i) {
      const auto& w = A.row_vocab().word(i);
      if (w == word_a || w == word_b) continue;
      if (B.row_vocab().contains(w)) entries.emplace_back(w, 0);
    }
    Vocabulary shared = Vocabulary::lexicographic(std::move(entries));
    cand.reserve(shared.size());
    for (std::size_t i = 0; i < shared.size(); ++i)
      cand.emplace_back(A.row_vocab().at(shared.word(i)),
                        B.row_vocab().at(shared.word(i)));
  }
  if (cand.empty()) throw DataError("lnd has no candidate neighbors");

  const auto& xa = A.row(*ia);
  const auto& xb = B.row(*ib);
  return detail::lnd_from_similarities(
      cand.size(),
      [&](std::size_t i) { return detail::probe_cosine_sim(xa, A.row(cand[i].first)); },
      [&](std::size_t i) { return detail::probe_cosine_sim(xb, B.row(cand[i].second)); },
      k);
}

inline double local_neighborhood_distance(const CoocMatrix& A, const CoocMatrix& B,
                                          const std::string& word, std::size_t k) {
  return local_neighborhood_distance(A, B, word, word, k);
}

// Scores file: measure-stamped header, then word <tab> score rows in
// descending score order (ties by word) at lossless precision.
inline void write_scores_tsv(const ChangeScores& scores,
                             const std::string& config_hash,
                             const std::filesystem::path& path) {
  std::vector<std::pair<std::string, double>> rows(scores.scores.begin(),
                                                   scores.scores.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::string out = "word\t" + scores.measure + ":" + config_hash + "\n";
  for (const auto& [w, s] : rows) out += w + "\t" + format_double(s) + "\n";
  atomic_write_file(path, out);
}

}  // namespace lscd

#endif  // LSCD_MEASURES_HPP
