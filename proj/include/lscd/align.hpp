#ifndef LSCD_ALIGN_HPP
#define LSCD_ALIGN_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lscd/common.hpp"
#include "lscd/cooc.hpp"
#include "lscd/corpus.hpp"
#include "lscd/sgns.hpp"
#include "lscd/spaces.hpp"

namespace lscd {

// Two sparse matrices over one row vocabulary and one column vocabulary;
// row i of both refers to shared_vocab.word(i).
struct SparseAlignedPair {
  Vocabulary shared_vocab;
  CoocMatrix a, b;
  std::string method;
};

// Dense counterpart with a common coordinate system.
struct DenseAlignedPair {
  Vocabulary shared_vocab;
  RowMatrixXd a, b;
  std::string method;
};

enum class ProcrustesVariant { op, op_minus, op_plus };

// Ablation switches for the extra OP+ steps. Defaults reproduce the
// full variant; turning all three off reduces OP+ to OP up to a shared
// rotation of both sides (cosine distances match OP exactly).
struct OpPlusOptions {
  bool whiten = true;
  double reweight_exponent = 0.5;
  bool dewhiten = true;
};

struct ProcrustesSolution {
  Eigen::MatrixXd rotation;  // the orthogonal mapping factor U V^T
  double residual = 0.0;     // squared Frobenius distance after alignment
  ProcrustesVariant variant = ProcrustesVariant::op;
};

struct ProcrustesResult {
  DenseAlignedPair pair;
  ProcrustesSolution solution;
};

namespace detail {

// Lexicographically ordered intersection; frequencies are the minimum
// of the two sides (only the word set matters downstream).
inline Vocabulary shared_vocabulary(const Vocabulary& a, const Vocabulary& b) {
  std::vector<std::pair<std::string, std::size_t>> entries;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (auto j = b.find(a.word(i)))
      entries.emplace_back(a.word(i), std::min(a.freq(i), b.freq(*j)));
  return Vocabulary::lexicographic(std::move(entries));
}

inline Vocabulary union_vocabulary(const Vocabulary& a, const Vocabulary& b) {
  std::map<std::string, std::size_t> merged;
  for (std::size_t i = 0; i < a.size(); ++i) merged[a.word(i)] += a.freq(i);
  for (std::size_t i = 0; i < b.size(); ++i) merged[b.word(i)] += b.freq(i);
  std::vector<std::pair<std::string, std::size_t>> entries(merged.begin(),
                                                           merged.end());
  return Vocabulary::lexicographic(std::move(entries));
}

// Symmetric PSD matrix power via eigendecomposition. Eigenvalues at or
// below the relative tolerance contribute zero, so negative powers act
// as a pseudo-inverse on rank-deficient input.
inline Eigen::MatrixXd symmetric_power(const Eigen::MatrixXd& m, double power) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success)
    throw NumericError("eigendecomposition failed in matrix power");
  const auto& vals = es.eigenvalues();
  const double tol = std::max(vals.cwiseAbs().maxCoeff(), 0.0) * 1e-12;
  Eigen::VectorXd powered(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    powered(i) = vals(i) > tol ? std::pow(vals(i), power) : 0.0;
  return es.eigenvectors() * powered.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

// CI alignment: restrict both matrices to the shared context columns
// (and shared target rows) in lexicographic order, values copied.
inline SparseAlignedPair column_intersect(const CoocMatrix& A,
                                          const CoocMatrix& B) {
  Vocabulary shared_rows = detail::shared_vocabulary(A.row_vocab(), B.row_vocab());
  Vocabulary shared_cols = detail::shared_vocabulary(A.col_vocab(), B.col_vocab());
  if (shared_cols.empty())
    throw DataError("column intersection is empty: no shared context words");
  if (shared_rows.empty())
    throw DataError("no shared target words between the matrices");

  auto restrict_matrix = [&](const CoocMatrix& m) {
    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> triplets;
    for (std::size_t r = 0; r < shared_rows.size(); ++r) {
      const std::size_t src_row = m.row_vocab().at(shared_rows.word(r));
      for (const auto& [c, v] : m.row(src_row)) {
        if (auto nc = shared_cols.find(m.col_vocab().word(c)))
          triplets.emplace_back(static_cast<std::uint32_t>(r),
                                static_cast<std::uint32_t>(*nc), v);
      }
    }
    return CoocMatrix::from_triplets(shared_rows, shared_cols, triplets);
  };

  SparseAlignedPair out;
  out.shared_vocab = shared_rows;
  out.a = restrict_matrix(A);
  out.b = restrict_matrix(B);
  out.method = "ci";
  return out;
}

// SRV alignment: one random matrix over the union context vocabulary;
// each side is projected through the sub-rows matching its own context
// words, so a context word shared by both corpora contributes the same
// random vector to both projections.
inline DenseAlignedPair shared_random_align(const CoocMatrix& A,
                                            const CoocMatrix& B, std::size_t d,
                                            std::uint32_t s, std::uint64_t seed) {
  Vocabulary ctx_union = detail::union_vocabulary(A.col_vocab(), B.col_vocab());
  RandomMatrix R = make_random_matrix(ctx_union, d, s, seed);

  Vocabulary shared_rows = detail::shared_vocabulary(A.row_vocab(), B.row_vocab());
  if (shared_rows.empty())
    throw DataError("no shared target words between the matrices");

  auto project = [&](const CoocMatrix& m) {
    RowMatrixXd out = RowMatrixXd::Zero(
        static_cast<Eigen::Index>(shared_rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < shared_rows.size(); ++r) {
      const std::size_t src_row = m.row_vocab().at(shared_rows.word(r));
      for (const auto& [c, v] : m.row(src_row)) {
        const std::size_t u = ctx_union.at(m.col_vocab().word(c));
        for (const auto& [pos, sign] : R.rows[u])
          out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(pos)) +=
              v * static_cast<double>(sign);
      }
    }
    return out;
  };

  DenseAlignedPair out;
  out.shared_vocab = shared_rows;
  out.a = project(A);
  out.b = project(B);
  out.method = "srv";
  return out;
}

// Restriction to the shared vocabulary with no transform; the "none"
// alignment used to compare independently learned low-dimensional
// spaces as-is.
inline DenseAlignedPair restrict_to_shared(const EmbeddingMatrix& A,
                                           const EmbeddingMatrix& B) {
  if (A.dim() != B.dim())
    throw DataError("embedding dimensionalities differ");
  Vocabulary shared = detail::shared_vocabulary(A.vocab, B.vocab);
  if (shared.empty()) throw DataError("no shared words between the spaces");
  DenseAlignedPair out;
  out.shared_vocab = shared;
  const Eigen::Index d = static_cast<Eigen::Index>(A.dim());
  out.a.resize(static_cast<Eigen::Index>(shared.size()), d);
  out.b.resize(static_cast<Eigen::Index>(shared.size()), d);
  for (std::size_t r = 0; r < shared.size(); ++r) {
    out.a.row(static_cast<Eigen::Index>(r)) =
        A.rows.row(static_cast<Eigen::Index>(A.vocab.at(shared.word(r))));
    out.b.row(static_cast<Eigen::Index>(r)) =
        B.rows.row(static_cast<Eigen::Index>(B.vocab.at(shared.word(r))));
  }
  out.method = "none";
  return out;
}

// Orthogonal Procrustes alignment over the shared-vocabulary dictionary.
// OP: length-normalize rows, mean-center columns, then map B by
// W* = U V^T where B^T A = U S V^T; OP- skips the centering; OP+ wraps
// the mapping in whitening, singular value re-weighting and opposite-
// side de-whitening. Words with a zero vector on either side are
// excluded from the dictionary with a warning.
inline ProcrustesResult orthogonal_procrustes(
    const EmbeddingMatrix& A, const EmbeddingMatrix& B, ProcrustesVariant variant,
    const OpPlusOptions& options = OpPlusOptions{}) {
  if (A.dim() != B.dim())
    throw DataError("embedding dimensionalities differ");
  Vocabulary shared = detail::shared_vocabulary(A.vocab, B.vocab);
  if (shared.empty()) throw DataError("no shared words to align on");

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (std::size_t i = 0; i < shared.size(); ++i) {
    const auto& w = shared.word(i);
    const double na = A.rows.row(static_cast<Eigen::Index>(A.vocab.at(w))).norm();
    const double nb = B.rows.row(static_cast<Eigen::Index>(B.vocab.at(w))).norm();
    if (na == 0.0 || nb == 0.0)
      std::cerr << "warning: excluding zero vector for '" << w
                << "' from alignment dictionary\n";
    else
      kept.emplace_back(w, shared.freq(i));
  }
  if (kept.empty()) throw DataError("alignment dictionary is empty");
  Vocabulary dict = Vocabulary::lexicographic(std::move(kept));

  const Eigen::Index n = static_cast<Eigen::Index>(dict.size());
  const Eigen::Index d = static_cast<Eigen::Index>(A.dim());
  RowMatrixXd Ma(n, d), Mb(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& w = dict.word(static_cast<std::size_t>(r));
    Ma.row(r) = A.rows.row(static_cast<Eigen::Index>(A.vocab.at(w)));
    Mb.row(r) = B.rows.row(static_cast<Eigen::Index>(B.vocab.at(w)));
    Ma.row(r) /= Ma.row(r).norm();
    Mb.row(r) /= Mb.row(r).norm();
  }
  if (!Ma.allFinite() || !Mb.allFinite())
    throw NumericError("non-finite embedding input to alignment");
  if (variant != ProcrustesVariant::op_minus) {
    Ma.rowwise() -= Ma.colwise().mean();
    Mb.rowwise() -= Mb.colwise().mean();
  }

  ProcrustesResult result;
  result.pair.shared_vocab = dict;
  result.pair.method = variant == ProcrustesVariant::op        ? "op"
                       : variant == ProcrustesVariant::op_minus ? "op-"
                                                                 : "op+";
  result.solution.variant = variant;

  if (variant != ProcrustesVariant::op_plus) {
    Eigen::MatrixXd M = Mb.transpose() * Ma;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXd W = svd.matrixU() * svd.matrixV().transpose();
    result.pair.a = Ma;
    result.pair.b = Mb * W;
    result.solution.rotation = W;
    result.solution.residual = (result.pair.b - result.pair.a).squaredNorm();
    return result;
  }

  // OP+ pipeline. Covariances of the preprocessed sides feed both the
  // whitening and the final de-whitening.
  Eigen::MatrixXd cov_a = Ma.transpose() * Ma;
  Eigen::MatrixXd cov_b = Mb.transpose() * Mb;
  Eigen::MatrixXd A1 = Ma, B1 = Mb;
  if (options.whiten) {
    A1 = Ma * detail::symmetric_power(cov_a, -0.5);
    B1 = Mb * detail::symmetric_power(cov_b, -0.5);
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(B1.transpose() * A1,
                                     Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd& U = svd.matrixU();
  const Eigen::MatrixXd& V = svd.matrixV();
  Eigen::MatrixXd A2 = A1 * V;
  Eigen::MatrixXd B2 = B1 * U;

  if (options.reweight_exponent != 0.0) {
    Eigen::VectorXd weights(svd.singularValues().size());
    for (Eigen::Index i = 0; i < weights.size(); ++i)
      weights(i) = svd.singularValues()(i) > 0
                       ? std::pow(svd.singularValues()(i), options.reweight_exponent)
                       : 0.0;
    A2 *= weights.asDiagonal();
    B2 *= weights.asDiagonal();
  }

  if (options.dewhiten) {
    // Each side takes on the covariance structure of the opposite side,
    // conjugated into the common mapped basis.
    A2 *= U.transpose() * detail::symmetric_power(cov_b, 0.5) * U;
    B2 *= V.transpose() * detail::symmetric_power(cov_a, 0.5) * V;
  }

  result.pair.a = A2;
  result.pair.b = B2;
  result.solution.rotation = U * V.transpose();
  result.solution.residual = (result.pair.b - result.pair.a).squaredNorm();
  return result;
}

// VI alignment: train SGNS on corpus_a, then continue training on
// corpus_b starting from corpus_a's word and context matrices. Words
// unseen in corpus_a get a fresh seeded-random init. The two spaces
// share a coordinate system by construction.
inline DenseAlignedPair vector_initialization_align(
    const Corpus& corpus_a, const Corpus& corpus_b, const Vocabulary& vocab_a,
    const Vocabulary& vocab_b, const SpaceConfig& cfg,
    std::optional<int> epochs_b = std::nullopt) {
  SgnsModel model_a = train_sgns_model(corpus_a, vocab_a, cfg);

  const Eigen::Index d = static_cast<Eigen::Index>(cfg.dim);
  SgnsModel init_b;
  init_b.vocab = vocab_b;
  init_b.words.resize(static_cast<Eigen::Index>(vocab_b.size()), d);
  init_b.contexts = RowMatrixXd::Zero(static_cast<Eigen::Index>(vocab_b.size()), d);
  Rng rng(derive_seed(cfg.seed, stream::kViInit));
  const double scale = 1.0 / static_cast<double>(cfg.dim);
  for (std::size_t r = 0; r < vocab_b.size(); ++r) {
    if (auto src = vocab_a.find(vocab_b.word(r))) {
      init_b.words.row(static_cast<Eigen::Index>(r)) =
          model_a.words.row(static_cast<Eigen::Index>(*src));
      init_b.contexts.row(static_cast<Eigen::Index>(r)) =
          model_a.contexts.row(static_cast<Eigen::Index>(*src));
    } else {
      for (Eigen::Index c = 0; c < d; ++c)
        init_b.words(static_cast<Eigen::Index>(r), c) = (rng.unit() - 0.5) * scale;
    }
  }

  SpaceConfig cfg_b = cfg;
  cfg_b.seed = derive_seed(cfg.seed, stream::kSideB);
  if (epochs_b) cfg_b.epochs = *epochs_b;
  SgnsModel model_b = train_sgns_model(corpus_b, vocab_b, cfg_b, &init_b);

  DenseAlignedPair out = restrict_to_shared(
      EmbeddingMatrix{vocab_a, std::move(model_a.words)},
      EmbeddingMatrix{vocab_b, std::move(model_b.words)});
  out.method = "vi";
  return out;
}

// Text export: d rows of d rotation entries, then the residual and
// variant, tab-separated.
inline void save_procrustes(const ProcrustesSolution& solution,
                            const std::filesystem::path& path) {
  std::string out;
  for (Eigen::Index r = 0; r < solution.rotation.rows(); ++r) {
    for (Eigen::Index c = 0; c < solution.rotation.cols(); ++c) {
      if (c) out += '\t';
      out += format_double(solution.rotation(r, c));
    }
    out += '\n';
  }
  out += "residual\t" + format_double(solution.residual) + '\n';
  out += "variant\t";
  out += solution.variant == ProcrustesVariant::op        ? "op"
         : solution.variant == ProcrustesVariant::op_minus ? "op-"
                                                            : "op+";
  out += '\n';
  atomic_write_file(path, out);
}

}  // namespace lscd

#endif  // LSCD_ALIGN_HPP
