#ifndef LSCD_SPACES_HPP
#define LSCD_SPACES_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lscd/common.hpp"
#include "lscd/cooc.hpp"
#include "lscd/corpus.hpp"

namespace lscd {

using RowMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One parameter bundle for every space builder. Fields a given builder
// does not use are ignored: alpha/shift feed PPMI, eigen_weight feeds
// SVD, ri_nonzeros feeds random indexing, the rest feed SGNS.
struct SpaceConfig {
  std::size_t dim = 300;
  int shift = 1;                    // PPMI shift / SGNS negative samples
  double alpha = 0.75;              // context smoothing exponent
  std::optional<double> subsample;  // occurrence subsampling threshold
  double eigen_weight = 0.0;        // singular value exponent
  std::uint32_t ri_nonzeros = 2;    // nonzeros per random vector
  int epochs = 5;
  WindowPolicy window{10, WindowPolicy::Mode::fixed};
  double lr_initial = 0.025;
  double lr_final = 0.0001;
  bool smooth_negatives = false;  // 0.75-smoothed negative distribution
  int workers = 1;
  std::uint64_t seed = 1;
};

struct EmbeddingMatrix {
  Vocabulary vocab;
  RowMatrixXd rows;

  std::size_t dim() const { return static_cast<std::size_t>(rows.cols()); }
};

inline Eigen::MatrixXd to_dense(const CoocMatrix& m) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (const auto& [c, v] : m.row(r))
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
  return out;
}

// Positive pointwise mutual information with context distribution
// smoothing and a shift constant:
//   cell(w,c) = max(log(#(w,c) * Z_alpha / (#(w) * #(c)^alpha)) - log k, 0)
// where Z_alpha sums #(c)^alpha over contexts. Zero cells stay zero, so
// the sparsity pattern never grows.
inline CoocMatrix ppmi_transform(const CoocMatrix& counts, int k, double alpha) {
  if (k < 1) throw ConfigError("ppmi shift k must be >= 1");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw ConfigError("ppmi smoothing alpha must be in (0, 1]");
  if (counts.total() <= 0.0) throw DataError("ppmi of empty co-occurrence matrix");

  double z_alpha = 0.0;
  std::vector<double> col_alpha(counts.cols());
  for (std::size_t c = 0; c < counts.cols(); ++c) {
    col_alpha[c] = std::pow(counts.col_sum(c), alpha);
    z_alpha += col_alpha[c];
  }
  const double log_k = std::log(static_cast<double>(k));

  CoocMatrix out(counts.row_vocab(), counts.col_vocab());
  std::vector<CoocMatrix::Cell> cells;
  for (std::size_t r = 0; r < counts.rows(); ++r) {
    cells.clear();
    const double row_total = counts.row_sum(r);
    for (const auto& [c, v] : counts.row(r)) {
      const double pmi =
          std::log(v * z_alpha / (row_total * col_alpha[c])) - log_k;
      if (pmi > 0.0) cells.emplace_back(c, pmi);
    }
    out.set_row(r, cells);
  }
  out.finalize();
  return out;
}

// Truncated SVD of the (sparse) input: the d strongest left singular
// vectors scaled by their singular values raised to eigen_weight.
// Inputs of rank below d are zero-padded in the trailing columns.
inline EmbeddingMatrix svd_reduce(const CoocMatrix& matrix, std::size_t d,
                                  double eigen_weight) {
  if (d < 1) throw ConfigError("svd dimensionality must be >= 1");
  if (d > std::min(matrix.rows(), matrix.cols()))
    throw ConfigError("svd dimensionality exceeds matrix rank bound");
  if (eigen_weight < 0.0 || eigen_weight > 1.0)
    throw ConfigError("singular value exponent must be in [0, 1]");

  Eigen::MatrixXd dense = to_dense(matrix);
  if (!dense.allFinite()) throw NumericError("svd input is not finite");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(dense,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double tol = std::max(matrix.rows(), matrix.cols()) * sv(0) *
                     std::numeric_limits<double>::epsilon();

  EmbeddingMatrix out;
  out.vocab = matrix.row_vocab();
  out.rows = RowMatrixXd::Zero(static_cast<Eigen::Index>(matrix.rows()),
                               static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) {
    const double s = sv(static_cast<Eigen::Index>(j));
    if (s <= tol) break;  // rank deficit: remaining columns stay zero
    const double scale = eigen_weight == 0.0 ? 1.0 : std::pow(s, eigen_weight);
    out.rows.col(static_cast<Eigen::Index>(j)) =
        svd.matrixU().col(static_cast<Eigen::Index>(j)) * scale;
  }
  return out;
}

// Ternary random projection matrix: every row has exactly
// nonzeros_per_row entries from {-1, +1} at distinct positions.
struct RandomMatrix {
  std::size_t dim = 0;
  std::uint32_t nonzeros_per_row = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::pair<std::uint32_t, std::int8_t>>> rows;
};

inline RandomMatrix make_random_matrix(const Vocabulary& vocab, std::size_t d,
                                       std::uint32_t s, std::uint64_t seed) {
  if (d < 1) throw ConfigError("random index dimensionality must be >= 1");
  if (s < 1) throw ConfigError("random vectors need at least one nonzero");
  if (s > d) throw ConfigError("more nonzeros than dimensions");

  RandomMatrix rm;
  rm.dim = d;
  rm.nonzeros_per_row = s;
  rm.seed = seed;
  rm.rows.resize(vocab.size());

  Rng rng(derive_seed(seed, stream::kRandomMatrix));
  std::vector<std::uint32_t> positions(d);
  for (auto& row : rm.rows) {
    for (std::size_t i = 0; i < d; ++i) positions[i] = static_cast<std::uint32_t>(i);
    // Partial Fisher-Yates: exactly s distinct positions per row.
    row.reserve(s);
    for (std::uint32_t i = 0; i < s; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(d - i));
      std::swap(positions[i], positions[j]);
      const std::int8_t sign = (rng.next() & 1) ? std::int8_t{1} : std::int8_t{-1};
      row.emplace_back(positions[i], sign);
    }
    std::sort(row.begin(), row.end());
  }
  return rm;
}

// Projects a sparse count matrix through a random matrix whose rows
// index the count matrix's columns.
inline EmbeddingMatrix random_index(const CoocMatrix& counts,
                                    const RandomMatrix& R) {
  if (R.rows.size() != counts.cols())
    throw DataError("random matrix rows must match context vocabulary");
  EmbeddingMatrix out;
  out.vocab = counts.row_vocab();
  out.rows = RowMatrixXd::Zero(static_cast<Eigen::Index>(counts.rows()),
                               static_cast<Eigen::Index>(R.dim));
  for (std::size_t r = 0; r < counts.rows(); ++r)
    for (const auto& [c, v] : counts.row(r))
      for (const auto& [pos, sign] : R.rows[c])
        out.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(pos)) +=
            v * static_cast<double>(sign);
  return out;
}

// Full random indexing path: optional occurrence subsampling at pair
// generation time, counting, then projection.
inline EmbeddingMatrix random_index(const Corpus& corpus, const Vocabulary& vocab,
                                    const WindowPolicy& policy, std::size_t d,
                                    std::uint32_t s, std::optional<double> t_sub,
                                    std::uint64_t seed) {
  const Corpus* source = &corpus;
  Corpus subsampled;
  if (t_sub) {
    subsampled = subsample_occurrences(corpus, vocab, *t_sub, seed);
    source = &subsampled;
  }
  CoocMatrix counts = count_matrix(*source, vocab, policy, seed);
  RandomMatrix R = make_random_matrix(vocab, d, s, seed);
  return random_index(counts, R);
}

// Text persistence: "|V| d" header, then one word plus d coordinates per
// line at 17 significant digits (lossless for doubles).
inline void save_embedding(const EmbeddingMatrix& m,
                           const std::filesystem::path& path) {
  std::string out = std::to_string(m.vocab.size()) + " " +
                    std::to_string(m.dim()) + "\n";
  for (std::size_t r = 0; r < m.vocab.size(); ++r) {
    out += m.vocab.word(r);
    for (std::size_t c = 0; c < m.dim(); ++c) {
      out += ' ';
      out += format_double(
          m.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    }
    out += '\n';
  }
  atomic_write_file(path, out);
}

inline EmbeddingMatrix load_embedding(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read embedding file: " + path.string());
  std::size_t n = 0, d = 0;
  if (!(in >> n >> d)) throw DataError("bad embedding header: " + path.string());

  std::vector<std::pair<std::string, std::size_t>> entries;
  entries.reserve(n);
  RowMatrixXd rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < n; ++r) {
    std::string word;
    if (!(in >> word))
      throw DataError("truncated embedding file: " + path.string());
    entries.emplace_back(word, 0);
    for (std::size_t c = 0; c < d; ++c) {
      double v = 0;
      if (!(in >> v))
        throw DataError("truncated embedding row: " + word);
      rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  EmbeddingMatrix m;
  m.vocab = Vocabulary(std::move(entries));
  m.rows = std::move(rows);
  return m;
}

}  // namespace lscd

#endif  // LSCD_SPACES_HPP
