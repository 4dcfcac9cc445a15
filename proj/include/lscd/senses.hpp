#ifndef LSCD_SENSES_HPP
#define LSCD_SENSES_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lscd/common.hpp"

namespace lscd {

// One word's sense (or topic) distribution in one corpus period.
struct SenseDistribution {
  std::string word;
  std::string period;
  std::vector<double> probs;
};

// TSV rows: word <tab> period <tab> p_1 .. p_K. Every word must appear
// with exactly two periods and one K; probabilities must sum to 1
// within 1e-6 and are renormalized exactly on load. The pair is ordered
// by period label ascending.
inline std::map<std::string, std::pair<SenseDistribution, SenseDistribution>>
load_sense_distributions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read sense distributions: " + path.string());

  std::map<std::string, std::vector<SenseDistribution>> grouped;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_whitespace(line);
    if (fields.size() < 3)
      throw DataError("sense line " + std::to_string(lineno) +
                      ": expected word, period and probabilities");
    SenseDistribution d;
    d.word = fields[0];
    d.period = fields[1];
    double sum = 0.0;
    for (std::size_t i = 2; i < fields.size(); ++i) {
      double p = 0;
      try {
        p = std::stod(fields[i]);
      } catch (const std::exception&) {
        throw DataError("sense line " + std::to_string(lineno) +
                        ": bad probability");
      }
      if (p < 0)
        throw DataError("sense line " + std::to_string(lineno) +
                        ": negative probability");
      d.probs.push_back(p);
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw DataError("sense distribution for '" + d.word + "' period '" +
                      d.period + "' sums to " + format_double(sum, 12) +
                      ", not 1");
    for (double& p : d.probs) p /= sum;
    grouped[d.word].push_back(std::move(d));
  }
  if (grouped.empty())
    throw DataError("sense distribution file is empty: " + path.string());

  std::map<std::string, std::pair<SenseDistribution, SenseDistribution>> out;
  for (auto& [word, ds] : grouped) {
    if (ds.size() != 2)
      throw DataError("word '" + word + "' has " + std::to_string(ds.size()) +
                      " periods, expected 2");
    if (ds[0].period == ds[1].period)
      throw DataError("word '" + word + "' repeats period '" + ds[0].period + "'");
    if (ds[0].probs.size() != ds[1].probs.size())
      throw DataError("word '" + word + "' has mismatched sense counts");
    if (ds[0].period > ds[1].period) std::swap(ds[0], ds[1]);
    out.emplace(word, std::make_pair(std::move(ds[0]), std::move(ds[1])));
  }
  return out;
}

}  // namespace lscd

#endif  // LSCD_SENSES_HPP
