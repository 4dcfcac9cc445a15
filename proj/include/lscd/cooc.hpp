#ifndef LSCD_COOC_HPP
#define LSCD_COOC_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lscd/common.hpp"
#include "lscd/corpus.hpp"

namespace lscd {

// Sparse row-major matrix over (row vocabulary x column vocabulary).
// Cells are non-negative; marginals always reflect the stored cells.
class CoocMatrix {
 public:
  using Cell = std::pair<std::uint32_t, double>;

  CoocMatrix() = default;
  CoocMatrix(Vocabulary row_vocab, Vocabulary col_vocab)
      : row_vocab_(std::move(row_vocab)),
        col_vocab_(std::move(col_vocab)),
        rows_(row_vocab_.size()) {
    finalize();
  }

  static CoocMatrix from_triplets(
      Vocabulary row_vocab, Vocabulary col_vocab,
      const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>&
          triplets) {
    CoocMatrix m(std::move(row_vocab), std::move(col_vocab));
    std::vector<std::map<std::uint32_t, double>> acc(m.rows());
    for (const auto& [r, c, v] : triplets) {
      if (r >= m.rows() || c >= m.cols())
        throw DataError("triplet index out of range");
      if (v < 0) throw DataError("negative cell value");
      acc[r][c] += v;
    }
    for (std::size_t r = 0; r < m.rows(); ++r)
      m.rows_[r] = std::vector<Cell>(acc[r].begin(), acc[r].end());
    m.finalize();
    return m;
  }

  std::size_t rows() const { return row_vocab_.size(); }
  std::size_t cols() const { return col_vocab_.size(); }
  const Vocabulary& row_vocab() const { return row_vocab_; }
  const Vocabulary& col_vocab() const { return col_vocab_; }

  const std::vector<Cell>& row(std::size_t r) const { return rows_.at(r); }

  double cell(std::size_t r, std::size_t c) const {
    const auto& row = rows_.at(r);
    auto it = std::lower_bound(
        row.begin(), row.end(), c,
        [](const Cell& cell, std::size_t col) { return cell.first < col; });
    return (it != row.end() && it->first == c) ? it->second : 0.0;
  }

  double row_sum(std::size_t r) const { return row_sums_.at(r); }
  double col_sum(std::size_t c) const { return col_sums_.at(c); }
  double total() const { return total_; }

  std::size_t row_nnz(std::size_t r) const { return rows_.at(r).size(); }
  std::size_t nnz() const {
    std::size_t n = 0;
    for (const auto& row : rows_) n += row.size();
    return n;
  }

  // Rebuilds a row from (col, value) cells; zero-valued cells are
  // dropped so sparsity never grows. Caller must refinalize.
  void set_row(std::size_t r, std::vector<Cell> cells) {
    std::sort(cells.begin(), cells.end());
    cells.erase(std::remove_if(cells.begin(), cells.end(),
                               [](const Cell& c) { return c.second == 0.0; }),
                cells.end());
    rows_.at(r) = std::move(cells);
  }

  void finalize() {
    rows_.resize(row_vocab_.size());
    row_sums_.assign(rows(), 0.0);
    col_sums_.assign(cols(), 0.0);
    total_ = 0.0;
    for (std::size_t r = 0; r < rows(); ++r) {
      for (const auto& [c, v] : rows_[r]) {
        row_sums_[r] += v;
        col_sums_[c] += v;
        total_ += v;
      }
    }
  }

 private:
  Vocabulary row_vocab_, col_vocab_;
  std::vector<std::vector<Cell>> rows_;
  std::vector<double> row_sums_, col_sums_;
  double total_ = 0.0;
};

// Square count matrix over one vocabulary from a (target, context)
// pair stream.
inline CoocMatrix count_matrix(
    std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs,
    const Vocabulary& vocab) {
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> triplets;
  triplets.reserve(pairs.size());
  for (const auto& [w, c] : pairs) triplets.emplace_back(w, c, 1.0);
  return CoocMatrix::from_triplets(vocab, vocab, triplets);
}

inline CoocMatrix count_matrix(const Corpus& corpus, const Vocabulary& vocab,
                               const WindowPolicy& policy, std::uint64_t seed) {
  std::vector<std::map<std::uint32_t, double>> acc(vocab.size());
  extract_windows(corpus, vocab, policy, seed,
                  [&](std::uint32_t w, std::uint32_t c) { acc[w][c] += 1.0; });
  CoocMatrix m(vocab, vocab);
  for (std::size_t r = 0; r < vocab.size(); ++r)
    m.set_row(r, std::vector<CoocMatrix::Cell>(acc[r].begin(), acc[r].end()));
  m.finalize();
  return m;
}

// TSV persistence: row_word <tab> col_word <tab> value, cells in row-major
// canonical order. Vocabularies are reconstructed on load with marginal
// frequencies.
inline void save_cooc_tsv(const CoocMatrix& m, const std::filesystem::path& path) {
  std::string out;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (const auto& [c, v] : m.row(r)) {
      out += m.row_vocab().word(r);
      out += '\t';
      out += m.col_vocab().word(c);
      out += '\t';
      out += format_double(v);
      out += '\n';
    }
  atomic_write_file(path, out);
}

inline CoocMatrix load_cooc_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read matrix file: " + path.string());
  std::vector<std::tuple<std::string, std::string, double>> entries;
  std::map<std::string, double> row_totals, col_totals;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_whitespace(line);
    if (fields.size() != 3)
      throw DataError("matrix line " + std::to_string(lineno) +
                      ": expected 3 fields");
    double v = 0;
    try {
      v = std::stod(fields[2]);
    } catch (const std::exception&) {
      throw DataError("matrix line " + std::to_string(lineno) + ": bad value");
    }
    row_totals[fields[0]] += v;
    col_totals[fields[1]] += v;
    entries.emplace_back(fields[0], fields[1], v);
  }

  std::vector<std::pair<std::string, std::size_t>> rv, cv;
  for (const auto& [w, s] : row_totals)
    rv.emplace_back(w, static_cast<std::size_t>(s + 0.5));
  for (const auto& [w, s] : col_totals)
    cv.emplace_back(w, static_cast<std::size_t>(s + 0.5));
  Vocabulary row_vocab = Vocabulary::lexicographic(std::move(rv));
  Vocabulary col_vocab = Vocabulary::lexicographic(std::move(cv));

  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> triplets;
  triplets.reserve(entries.size());
  for (const auto& [rw, cw, v] : entries)
    triplets.emplace_back(static_cast<std::uint32_t>(row_vocab.at(rw)),
                          static_cast<std::uint32_t>(col_vocab.at(cw)), v);
  return CoocMatrix::from_triplets(std::move(row_vocab), std::move(col_vocab),
                                   triplets);
}

}  // namespace lscd

#endif  // LSCD_COOC_HPP
