#ifndef LSCD_SGNS_HPP
#define LSCD_SGNS_HPP

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <utility>
#include <vector>

#include "lscd/common.hpp"
#include "lscd/corpus.hpp"
#include "lscd/spaces.hpp"

namespace lscd {

// Contribution of one (word, context) sample to the skip-gram
// negative-sampling objective: log sigma(c.w) for an observed pair,
// log sigma(-c.w) for a drawn negative.
inline double sgns_pair_objective(const Eigen::Ref<const Eigen::VectorXd>& w,
                                  const Eigen::Ref<const Eigen::VectorXd>& c,
                                  bool observed) {
  const double dot = c.dot(w);
  const double z = observed ? dot : -dot;
  // log(sigma(z)) computed stably on both tails.
  if (z > 0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

// Analytic gradients of sgns_pair_objective with respect to both
// vectors: d/dw = (label - sigma(c.w)) c, and symmetrically for c,
// with label 1 for observed pairs and 0 for negatives.
inline void sgns_pair_gradient(const Eigen::Ref<const Eigen::VectorXd>& w,
                               const Eigen::Ref<const Eigen::VectorXd>& c,
                               bool observed, Eigen::VectorXd& grad_w,
                               Eigen::VectorXd& grad_c) {
  const double dot = c.dot(w);
  const double sig = 1.0 / (1.0 + std::exp(-dot));
  const double coeff = (observed ? 1.0 : 0.0) - sig;
  grad_w = coeff * c;
  grad_c = coeff * w;
}

namespace detail {

// Walker alias method over a fixed weight vector. Construction and
// sampling are deterministic: stacks are filled in index order and one
// sample consumes exactly two RNG draws.
class AliasSampler {
 public:
  explicit AliasSampler(const std::vector<double>& weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw DataError("alias sampler over empty support");
    double total = 0;
    for (double w : weights) {
      if (w < 0) throw NumericError("negative sampling weight");
      total += w;
    }
    if (total <= 0) throw DataError("alias sampler needs positive mass");

    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      small.pop_back();
      const std::uint32_t l = large.back();
      large.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (std::uint32_t i : large) prob_[i] = 1.0;
    for (std::uint32_t i : small) prob_[i] = 1.0;
  }

  std::uint32_t sample(Rng& rng) const {
    const std::size_t i = static_cast<std::size_t>(rng.below(prob_.size()));
    return rng.unit() < prob_[i] ? static_cast<std::uint32_t>(i) : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

// Regenerates the epoch's pair stream: occurrence subsampling first,
// then dynamic windows, both from per-epoch seeds so every pass over an
// epoch sees the identical stream.
template <class Sink>
void sgns_epoch_pairs(const Corpus& corpus, const Vocabulary& vocab,
                      const SpaceConfig& cfg, std::uint64_t epoch_seed,
                      Sink&& sink) {
  if (cfg.subsample) {
    Corpus sub = subsample_occurrences(corpus, vocab, *cfg.subsample, epoch_seed);
    extract_windows(sub, vocab, cfg.window, epoch_seed, sink);
  } else {
    extract_windows(corpus, vocab, cfg.window, epoch_seed, sink);
  }
}

}  // namespace detail

struct SgnsModel {
  Vocabulary vocab;
  RowMatrixXd words;     // trained word vectors (the space)
  RowMatrixXd contexts;  // context vectors, needed to continue training
};

struct SgnsStats {
  std::vector<double> epoch_loss;  // mean negative objective per sample
  std::size_t total_pairs = 0;
};

// Trains skip-gram with negative sampling. Observed pairs stream from
// seeded dynamic windows with optional occurrence subsampling; each pair
// draws `shift` negatives from the empirical context distribution of the
// first epoch's stream (raised to 0.75 when smooth_negatives is set).
// The learning rate decays linearly from lr_initial to lr_final across
// all pair updates. With workers == 1 training is bit-reproducible;
// more workers race on the shared matrices (word2vec-style hogwild) and
// reproducibility is deliberately given up.
inline SgnsModel train_sgns_model(const Corpus& corpus, const Vocabulary& vocab,
                                  const SpaceConfig& cfg,
                                  const SgnsModel* init = nullptr,
                                  SgnsStats* stats = nullptr) {
  if (cfg.dim < 1) throw ConfigError("sgns dimensionality must be >= 1");
  if (cfg.shift < 1) throw ConfigError("sgns needs at least one negative sample");
  if (cfg.epochs < 0) throw ConfigError("sgns epochs must be >= 0");
  if (cfg.epochs == 0 && init == nullptr)
    throw ConfigError("sgns epochs must be >= 1 when training from scratch");
  if (cfg.workers < 1) throw ConfigError("sgns needs at least one worker");
  if (corpus.sentences.empty()) throw DataError("sgns training corpus is empty");

  const Eigen::Index n = static_cast<Eigen::Index>(vocab.size());
  const Eigen::Index d = static_cast<Eigen::Index>(cfg.dim);

  SgnsModel model;
  model.vocab = vocab;
  if (init != nullptr) {
    if (init->words.rows() != n || init->words.cols() != d ||
        init->contexts.rows() != n || init->contexts.cols() != d)
      throw ConfigError("sgns init matrices do not match vocabulary/dim");
    model.words = init->words;
    model.contexts = init->contexts;
  } else {
    // word2vec convention: words uniform in [-0.5/d, 0.5/d], contexts zero.
    model.words.resize(n, d);
    Rng rng(derive_seed(cfg.seed, stream::kInit));
    const double scale = 1.0 / static_cast<double>(cfg.dim);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < d; ++c)
        model.words(r, c) = (rng.unit() - 0.5) * scale;
    model.contexts = RowMatrixXd::Zero(n, d);
  }

  if (stats != nullptr) {
    stats->epoch_loss.clear();
    stats->total_pairs = 0;
  }
  if (cfg.epochs == 0) return model;

  // Pre-pass: pair totals per epoch for the decay schedule, context
  // counts of epoch 0 for the negative distribution.
  std::vector<std::size_t> epoch_pairs(static_cast<std::size_t>(cfg.epochs), 0);
  std::vector<double> context_counts(vocab.size(), 0.0);
  for (int e = 0; e < cfg.epochs; ++e) {
    const std::uint64_t epoch_seed = derive_seed(cfg.seed, stream::kWindows, e);
    detail::sgns_epoch_pairs(corpus, vocab, cfg, epoch_seed,
                             [&](std::uint32_t, std::uint32_t c) {
                               ++epoch_pairs[static_cast<std::size_t>(e)];
                               if (e == 0) context_counts[c] += 1.0;
                             });
  }
  std::size_t total_pairs = 0;
  for (std::size_t p : epoch_pairs) total_pairs += p;
  if (total_pairs == 0) throw DataError("sgns has no training pairs");
  if (stats != nullptr) stats->total_pairs = total_pairs;

  if (cfg.smooth_negatives)
    for (double& c : context_counts)
      c = c > 0 ? std::pow(c, 0.75) : 0.0;
  detail::AliasSampler negatives(context_counts);

  const double lr0 = cfg.lr_initial;
  const double lr1 = cfg.lr_final;
  const double denom =
      total_pairs > 1 ? static_cast<double>(total_pairs - 1) : 1.0;

  std::atomic<std::size_t> pair_counter{0};
  std::vector<double> epoch_loss_sum(static_cast<std::size_t>(cfg.epochs), 0.0);

  // One worker's pass over a shard of the epoch stream. Gradients for
  // the word vector accumulate across the positive and its negatives;
  // each touched context vector updates immediately (word2vec order).
  auto train_range = [&](int epoch, std::size_t begin, std::size_t end,
                         std::uint64_t neg_seed, double& loss_sum) {
    Rng neg_rng(neg_seed);
    Eigen::VectorXd accum(d);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> buffer;
    buffer.reserve(end - begin);
    {
      std::size_t idx = 0;
      const std::uint64_t epoch_seed =
          derive_seed(cfg.seed, stream::kWindows, static_cast<std::uint64_t>(epoch));
      detail::sgns_epoch_pairs(corpus, vocab, cfg, epoch_seed,
                               [&](std::uint32_t w, std::uint32_t c) {
                                 if (idx >= begin && idx < end)
                                   buffer.emplace_back(w, c);
                                 ++idx;
                               });
    }
    for (const auto& [w, c] : buffer) {
      const std::size_t t = pair_counter.fetch_add(1, std::memory_order_relaxed);
      const double lr = lr0 + (lr1 - lr0) * (static_cast<double>(t) / denom);

      auto wv = model.words.row(static_cast<Eigen::Index>(w));
      accum.setZero();

      {
        auto cv = model.contexts.row(static_cast<Eigen::Index>(c));
        const double dot = cv.dot(wv);
        const double sig = 1.0 / (1.0 + std::exp(-dot));
        loss_sum += dot > 0 ? std::log1p(std::exp(-dot))
                            : std::log1p(std::exp(dot)) - dot;
        const double g = (1.0 - sig) * lr;
        accum += g * cv.transpose();
        cv += g * wv;
      }
      for (int neg = 0; neg < cfg.shift; ++neg) {
        const std::uint32_t nc = negatives.sample(neg_rng);
        auto cv = model.contexts.row(static_cast<Eigen::Index>(nc));
        const double dot = cv.dot(wv);
        const double sig = 1.0 / (1.0 + std::exp(-dot));
        loss_sum += dot > 0 ? dot + std::log1p(std::exp(-dot))
                            : std::log1p(std::exp(dot));
        const double g = (0.0 - sig) * lr;
        accum += g * cv.transpose();
        cv += g * wv;
      }
      wv += accum.transpose();
    }
  };

  for (int e = 0; e < cfg.epochs; ++e) {
    const std::size_t pairs_e = epoch_pairs[static_cast<std::size_t>(e)];
    if (pairs_e == 0) continue;
    if (cfg.workers == 1) {
      double loss = 0.0;
      train_range(e, 0, pairs_e,
                  derive_seed(cfg.seed, stream::kNegatives,
                              static_cast<std::uint64_t>(e)),
                  loss);
      epoch_loss_sum[static_cast<std::size_t>(e)] = loss;
    } else {
      const std::size_t nw = static_cast<std::size_t>(cfg.workers);
      std::vector<double> losses(nw, 0.0);
      std::vector<std::thread> threads;
      threads.reserve(nw);
      for (std::size_t w = 0; w < nw; ++w) {
        const std::size_t begin = pairs_e * w / nw;
        const std::size_t end = pairs_e * (w + 1) / nw;
        threads.emplace_back(train_range, e, begin, end,
                             derive_seed(cfg.seed, stream::kNegatives,
                                         static_cast<std::uint64_t>(e) * 1000 + w),
                             std::ref(losses[w]));
      }
      for (auto& t : threads) t.join();
      double loss = 0.0;
      for (double l : losses) loss += l;
      epoch_loss_sum[static_cast<std::size_t>(e)] = loss;
    }
  }

  if (stats != nullptr) {
    stats->epoch_loss.resize(static_cast<std::size_t>(cfg.epochs));
    for (int e = 0; e < cfg.epochs; ++e) {
      const std::size_t pe = epoch_pairs[static_cast<std::size_t>(e)];
      const double samples =
          static_cast<double>(pe) * (1.0 + static_cast<double>(cfg.shift));
      stats->epoch_loss[static_cast<std::size_t>(e)] =
          pe ? epoch_loss_sum[static_cast<std::size_t>(e)] / samples : 0.0;
    }
  }
  return model;
}

inline EmbeddingMatrix train_sgns(const Corpus& corpus, const Vocabulary& vocab,
                                  const SpaceConfig& cfg,
                                  const SgnsModel* init = nullptr,
                                  SgnsStats* stats = nullptr) {
  SgnsModel model = train_sgns_model(corpus, vocab, cfg, init, stats);
  return EmbeddingMatrix{std::move(model.vocab), std::move(model.words)};
}

}  // namespace lscd

#endif  // LSCD_SGNS_HPP
