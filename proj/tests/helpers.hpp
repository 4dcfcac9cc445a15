#ifndef LSCD_TESTS_HELPERS_HPP
#define LSCD_TESTS_HELPERS_HPP

#include <unistd.h>

#include <Eigen/Dense>
#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "lscd/common.hpp"
#include "lscd/corpus.hpp"
#include "lscd/spaces.hpp"

namespace lscd::test {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("lscd_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path write_file(const std::filesystem::path& path,
                                        const std::string& content) {
  atomic_write_file(path, content);
  return path;
}

inline Corpus make_corpus(std::vector<Sentence> sentences,
                          std::string label = "test") {
  Corpus c;
  c.sentences = std::move(sentences);
  c.label = std::move(label);
  c.recount_tokens();
  c.refresh_raw_stats();
  return c;
}

// Embedding over the given words (frequency 1 each, order preserved).
inline EmbeddingMatrix make_embedding(const std::vector<std::string>& words,
                                      const RowMatrixXd& rows) {
  std::vector<std::pair<std::string, std::size_t>> entries;
  for (const auto& w : words) entries.emplace_back(w, 1);
  return EmbeddingMatrix{Vocabulary(std::move(entries)), rows};
}

inline RowMatrixXd random_rows(std::size_t n, std::size_t d, Rng& rng,
                               double lo = -1.0, double hi = 1.0) {
  RowMatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(lo, hi);
  return m;
}

// Random orthogonal matrix via QR of a random square matrix. Column sign
// fixing makes the distribution proper Haar, and flipping one sign half
// the time mixes in reflections.
inline Eigen::MatrixXd random_orthogonal(std::size_t d, Rng& rng,
                                         bool allow_reflection = true) {
  Eigen::MatrixXd g(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < g.rows(); ++r)
    for (Eigen::Index c = 0; c < g.cols(); ++c) g(r, c) = rng.uniform(-1.0, 1.0);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < q.cols(); ++i)
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  if (allow_reflection && (rng.next() & 1)) q.col(0) = -q.col(0);
  return q;
}

}  // namespace lscd::test

#endif  // LSCD_TESTS_HELPERS_HPP
