#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "lscd/sgns.hpp"

using namespace lscd;
using lscd::test::make_corpus;

namespace {

// Two synthetic-topic corpus: x and y share contexts, z lives elsewhere.
Corpus topic_corpus(int blocks) {
  std::vector<Sentence> sentences;
  for (int i = 0; i < blocks; ++i) {
    sentences.push_back({"x", "food", "eat", "x", "drink"});
    sentences.push_back({"y", "food", "drink", "y", "eat"});
    sentences.push_back({"z", "metal", "forge", "z", "anvil"});
  }
  return make_corpus(std::move(sentences));
}

}  // namespace

TEST_CASE("pair objective matches closed forms and survives extreme inputs") {
  Eigen::VectorXd w(2), c(2);
  w << 1.0, 0.0;
  c << 1.0, 0.0;
  // dot = 1: log sigma(1) observed, log sigma(-1) negative.
  CHECK(sgns_pair_objective(w, c, true) ==
        Catch::Approx(std::log(1.0 / (1.0 + std::exp(-1.0)))).margin(1e-15));
  CHECK(sgns_pair_objective(w, c, false) ==
        Catch::Approx(std::log(1.0 / (1.0 + std::exp(1.0)))).margin(1e-15));

  // Orthogonal vectors: sigma(0) = 1/2 either way.
  Eigen::VectorXd o(2);
  o << 0.0, 1.0;
  CHECK(sgns_pair_objective(w, o, true) == Catch::Approx(std::log(0.5)).margin(1e-15));

  // Tails: no overflow, correct asymptotics.
  Eigen::VectorXd big = 50.0 * w;
  const double far = sgns_pair_objective(big, w, true);
  CHECK(std::isfinite(far));
  CHECK(far == Catch::Approx(0.0).margin(1e-15));
  const double deep = sgns_pair_objective(big, w, false);
  CHECK(std::isfinite(deep));
  CHECK(deep == Catch::Approx(-50.0).margin(1e-10));
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(123);
  const double eps = 1e-6;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t d = 1 + rng.below(8);
    Eigen::VectorXd w(static_cast<Eigen::Index>(d)), c(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      w(i) = rng.uniform(-2.0, 2.0);
      c(i) = rng.uniform(-2.0, 2.0);
    }
    const bool observed = rng.next() & 1;

    Eigen::VectorXd gw, gc;
    sgns_pair_gradient(w, c, observed, gw, gc);

    for (Eigen::Index i = 0; i < w.size(); ++i) {
      Eigen::VectorXd wp = w, wm = w;
      wp(i) += eps;
      wm(i) -= eps;
      const double num_w = (sgns_pair_objective(wp, c, observed) -
                            sgns_pair_objective(wm, c, observed)) / (2 * eps);
      const double scale_w = std::max(1.0, std::abs(gw(i)));
      CHECK(std::abs(num_w - gw(i)) / scale_w <= 1e-4);

      Eigen::VectorXd cp = c, cm = c;
      cp(i) += eps;
      cm(i) -= eps;
      const double num_c = (sgns_pair_objective(w, cp, observed) -
                            sgns_pair_objective(w, cm, observed)) / (2 * eps);
      const double scale_c = std::max(1.0, std::abs(gc(i)));
      CHECK(std::abs(num_c - gc(i)) / scale_c <= 1e-4);
    }
  }
}

TEST_CASE("alias sampler reproduces its weight distribution") {
  const std::vector<double> weights{1.0, 3.0, 0.0, 6.0};
  detail::AliasSampler sampler(weights);
  Rng rng(8);
  std::vector<std::size_t> hits(weights.size(), 0);
  const std::size_t n_draws = 200000;
  for (std::size_t i = 0; i < n_draws; ++i) ++hits[sampler.sample(rng)];

  CHECK(hits[2] == 0);  // zero-weight bucket never drawn
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double expected = weights[i] / total;
    const double got = static_cast<double>(hits[i]) / n_draws;
    CHECK(std::abs(got - expected) <= 0.01);
  }

  // Deterministic given the RNG state.
  Rng r1(5), r2(5);
  for (int i = 0; i < 100; ++i) CHECK(sampler.sample(r1) == sampler.sample(r2));

  CHECK_THROWS_AS(detail::AliasSampler({}), DataError);
  CHECK_THROWS_AS(detail::AliasSampler({0.0, 0.0}), DataError);
  CHECK_THROWS_AS(detail::AliasSampler({1.0, -0.5}), NumericError);
}

TEST_CASE("single-worker training is bit-reproducible") {
  Corpus corpus = topic_corpus(8);
  Vocabulary vocab = build_vocabulary(corpus);
  SpaceConfig cfg;
  cfg.dim = 12;
  cfg.shift = 3;
  cfg.epochs = 3;
  cfg.window = {3, WindowPolicy::Mode::dynamic};
  cfg.seed = 77;
  cfg.workers = 1;

  SgnsModel a = train_sgns_model(corpus, vocab, cfg);
  SgnsModel b = train_sgns_model(corpus, vocab, cfg);
  CHECK((a.words.array() == b.words.array()).all());
  CHECK((a.contexts.array() == b.contexts.array()).all());

  cfg.seed = 78;
  SgnsModel c = train_sgns_model(corpus, vocab, cfg);
  CHECK_FALSE((a.words.array() == c.words.array()).all());
}

TEST_CASE("zero-epoch training with an initial model is the identity") {
  Corpus corpus = topic_corpus(3);
  Vocabulary vocab = build_vocabulary(corpus);
  SpaceConfig cfg;
  cfg.dim = 6;
  cfg.epochs = 2;
  cfg.window = {2, WindowPolicy::Mode::fixed};
  cfg.seed = 3;

  SgnsModel trained = train_sgns_model(corpus, vocab, cfg);
  SpaceConfig frozen = cfg;
  frozen.epochs = 0;
  SgnsModel same = train_sgns_model(corpus, vocab, frozen, &trained);
  CHECK((same.words.array() == trained.words.array()).all());
  CHECK((same.contexts.array() == trained.contexts.array()).all());
}

TEST_CASE("training rejects bad configuration and data") {
  Corpus corpus = topic_corpus(2);
  Vocabulary vocab = build_vocabulary(corpus);
  SpaceConfig cfg;
  cfg.dim = 4;
  cfg.epochs = 1;
  cfg.window = {2, WindowPolicy::Mode::fixed};

  SpaceConfig bad = cfg;
  bad.dim = 0;
  CHECK_THROWS_AS(train_sgns_model(corpus, vocab, bad), ConfigError);
  bad = cfg;
  bad.shift = 0;
  CHECK_THROWS_AS(train_sgns_model(corpus, vocab, bad), ConfigError);
  bad = cfg;
  bad.epochs = 0;  // nothing to do and nothing to return
  CHECK_THROWS_AS(train_sgns_model(corpus, vocab, bad), ConfigError);
  bad = cfg;
  bad.workers = 0;
  CHECK_THROWS_AS(train_sgns_model(corpus, vocab, bad), ConfigError);

  Corpus empty;
  empty.label = "empty";
  CHECK_THROWS_AS(train_sgns_model(empty, vocab, cfg), DataError);

  // Initial model must match the requested shape.
  SgnsModel wrong;
  wrong.vocab = vocab;
  wrong.words = RowMatrixXd::Zero(static_cast<Eigen::Index>(vocab.size()), 9);
  wrong.contexts = wrong.words;
  CHECK_THROWS_AS(train_sgns_model(corpus, vocab, cfg, &wrong), ConfigError);
}

TEST_CASE("training separates topics") {
  Corpus corpus = topic_corpus(40);
  Vocabulary vocab = build_vocabulary(corpus);
  SpaceConfig cfg;
  cfg.dim = 10;
  cfg.shift = 5;
  cfg.epochs = 12;
  cfg.window = {4, WindowPolicy::Mode::fixed};
  cfg.seed = 9;

  EmbeddingMatrix emb = train_sgns(corpus, vocab, cfg);
  auto vec = [&](const std::string& w) { return emb.rows.row(static_cast<Eigen::Index>(emb.vocab.at(w))); };
  auto cos = [](const auto& x, const auto& y) {
    return x.dot(y) / (x.norm() * y.norm());
  };
  // x and y share their contexts; z does not.
  CHECK(cos(vec("x"), vec("y")) > cos(vec("x"), vec("z")));
}

TEST_CASE("epoch loss improves over training") {
  Corpus corpus = topic_corpus(25);
  Vocabulary vocab = build_vocabulary(corpus);
  std::size_t improved = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    SpaceConfig cfg;
    cfg.dim = 8;
    cfg.shift = 2;
    cfg.epochs = 6;
    cfg.window = {3, WindowPolicy::Mode::fixed};
    cfg.seed = seed;
    SgnsStats stats;
    train_sgns_model(corpus, vocab, cfg, nullptr, &stats);
    REQUIRE(stats.epoch_loss.size() == 6);
    CHECK(stats.total_pairs > 0);
    if (stats.epoch_loss.back() < stats.epoch_loss.front()) ++improved;
  }
  CHECK(improved >= 2);  // loss is stochastic; demand a majority
}
