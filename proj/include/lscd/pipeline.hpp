#ifndef LSCD_PIPELINE_HPP
#define LSCD_PIPELINE_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "lscd/align.hpp"
#include "lscd/common.hpp"
#include "lscd/cooc.hpp"
#include "lscd/corpus.hpp"
#include "lscd/eval.hpp"
#include "lscd/measures.hpp"
#include "lscd/senses.hpp"
#include "lscd/sgns.hpp"
#include "lscd/spaces.hpp"

namespace lscd {

enum class Space { count, ppmi, svd, ri, sgns, sense_dist };
enum class Align { ci, srv, op, op_minus, op_plus, vi, wi, none };
enum class MeasureKind { cd, lnd, jsd, fd, td, hd, hd_norm };
enum class Control { none, shuffle, shuffle_downsample };

inline const char* to_string(Space s) {
  switch (s) {
    case Space::count: return "count";
    case Space::ppmi: return "ppmi";
    case Space::svd: return "svd";
    case Space::ri: return "ri";
    case Space::sgns: return "sgns";
    case Space::sense_dist: return "sense-dist";
  }
  return "?";
}

inline const char* to_string(Align a) {
  switch (a) {
    case Align::ci: return "ci";
    case Align::srv: return "srv";
    case Align::op: return "op";
    case Align::op_minus: return "op-";
    case Align::op_plus: return "op+";
    case Align::vi: return "vi";
    case Align::wi: return "wi";
    case Align::none: return "none";
  }
  return "?";
}

inline const char* to_string(MeasureKind m) {
  switch (m) {
    case MeasureKind::cd: return "cd";
    case MeasureKind::lnd: return "lnd";
    case MeasureKind::jsd: return "jsd";
    case MeasureKind::fd: return "fd";
    case MeasureKind::td: return "td";
    case MeasureKind::hd: return "hd";
    case MeasureKind::hd_norm: return "hd-norm";
  }
  return "?";
}

inline const char* to_string(Control c) {
  switch (c) {
    case Control::none: return "none";
    case Control::shuffle: return "shuffle";
    case Control::shuffle_downsample: return "shuffle+downsample";
  }
  return "?";
}

inline Space parse_space(const std::string& s) {
  if (s == "count") return Space::count;
  if (s == "ppmi") return Space::ppmi;
  if (s == "svd") return Space::svd;
  if (s == "ri") return Space::ri;
  if (s == "sgns") return Space::sgns;
  if (s == "sense-dist" || s == "sense_dist") return Space::sense_dist;
  throw ConfigError("unknown space: " + s);
}

inline Align parse_align(const std::string& s) {
  if (s == "ci") return Align::ci;
  if (s == "srv") return Align::srv;
  if (s == "op") return Align::op;
  if (s == "op-" || s == "op_minus") return Align::op_minus;
  if (s == "op+" || s == "op_plus") return Align::op_plus;
  if (s == "vi") return Align::vi;
  if (s == "wi") return Align::wi;
  if (s == "none") return Align::none;
  throw ConfigError("unknown alignment: " + s);
}

inline MeasureKind parse_measure(const std::string& s) {
  if (s == "cd") return MeasureKind::cd;
  if (s == "lnd") return MeasureKind::lnd;
  if (s == "jsd") return MeasureKind::jsd;
  if (s == "fd") return MeasureKind::fd;
  if (s == "td") return MeasureKind::td;
  if (s == "hd") return MeasureKind::hd;
  if (s == "hd-norm" || s == "hd_norm") return MeasureKind::hd_norm;
  throw ConfigError("unknown measure: " + s);
}

inline Control parse_control(const std::string& s) {
  if (s == "none") return Control::none;
  if (s == "shuffle") return Control::shuffle;
  if (s == "shuffle+downsample" || s == "shuffle_downsample")
    return Control::shuffle_downsample;
  throw ConfigError("unknown control condition: " + s);
}

struct GoldSpec {
  enum class Kind { none, durel, surel, path } kind = Kind::none;
  std::string path;
};

struct PipelineConfig {
  std::string corpus_a_path, corpus_b_path;
  std::string targets_path;
  std::string sense_dist_path;
  std::string label_a = "C_a", label_b = "C_b";
  std::size_t min_count_a = 1, min_count_b = 1;

  Space space = Space::sgns;
  Align align = Align::op;
  MeasureKind measure = MeasureKind::cd;
  SpaceConfig space_cfg;
  bool window_mode_explicit = false;

  GoldSpec gold;
  int iterations = 1;
  std::uint64_t seed = 1;
  std::string out_dir;

  Control control = Control::none;
  std::size_t downsample_n = 50;
  std::size_t lnd_neighbors = 25;
  bool wi_mean_center = false;
  std::string wi_suffix = "_";
  OpPlusOptions op_plus;
  std::optional<int> vi_epochs_b;
};

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long long n = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

inline double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

}  // namespace detail

// Flat key=value configuration text: one pair per line, '#' starts a
// comment, blank lines ignored.
inline std::map<std::string, std::string> parse_config_text(
    const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key=value");
    std::string key = trim(trimmed.substr(0, eq));
    std::string value = trim(trimmed.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

// Builds a config from key=value pairs; unknown keys are errors so
// typos never silently change an experiment.
inline PipelineConfig make_pipeline_config(
    const std::map<std::string, std::string>& kv) {
  PipelineConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "corpus_a") cfg.corpus_a_path = value;
    else if (key == "corpus_b") cfg.corpus_b_path = value;
    else if (key == "targets") cfg.targets_path = value;
    else if (key == "sense_dist") cfg.sense_dist_path = value;
    else if (key == "label_a") cfg.label_a = value;
    else if (key == "label_b") cfg.label_b = value;
    else if (key == "min_count") {
      cfg.min_count_a = cfg.min_count_b =
          static_cast<std::size_t>(detail::parse_int(key, value));
    } else if (key == "min_count_a")
      cfg.min_count_a = static_cast<std::size_t>(detail::parse_int(key, value));
    else if (key == "min_count_b")
      cfg.min_count_b = static_cast<std::size_t>(detail::parse_int(key, value));
    else if (key == "space") cfg.space = parse_space(value);
    else if (key == "align") cfg.align = parse_align(value);
    else if (key == "measure") cfg.measure = parse_measure(value);
    else if (key == "dim")
      cfg.space_cfg.dim = static_cast<std::size_t>(detail::parse_int(key, value));
    else if (key == "k")
      cfg.space_cfg.shift = static_cast<int>(detail::parse_int(key, value));
    else if (key == "alpha") cfg.space_cfg.alpha = detail::parse_real(key, value);
    else if (key == "subsample") {
      if (value == "none" || value.empty())
        cfg.space_cfg.subsample.reset();
      else
        cfg.space_cfg.subsample = detail::parse_real(key, value);
    } else if (key == "p")
      cfg.space_cfg.eigen_weight = detail::parse_real(key, value);
    else if (key == "s")
      cfg.space_cfg.ri_nonzeros =
          static_cast<std::uint32_t>(detail::parse_int(key, value));
    else if (key == "epochs")
      cfg.space_cfg.epochs = static_cast<int>(detail::parse_int(key, value));
    else if (key == "window")
      cfg.space_cfg.window.size =
          static_cast<std::size_t>(detail::parse_int(key, value));
    else if (key == "window_mode") {
      cfg.window_mode_explicit = true;
      if (value == "fixed") cfg.space_cfg.window.mode = WindowPolicy::Mode::fixed;
      else if (value == "dynamic")
        cfg.space_cfg.window.mode = WindowPolicy::Mode::dynamic;
      else
        throw ConfigError("window_mode: expected fixed or dynamic");
    } else if (key == "lr_initial")
      cfg.space_cfg.lr_initial = detail::parse_real(key, value);
    else if (key == "lr_final")
      cfg.space_cfg.lr_final = detail::parse_real(key, value);
    else if (key == "smooth_negatives")
      cfg.space_cfg.smooth_negatives = detail::parse_bool(key, value);
    else if (key == "workers")
      cfg.space_cfg.workers = static_cast<int>(detail::parse_int(key, value));
    else if (key == "gold") {
      if (value == "none" || value.empty()) cfg.gold.kind = GoldSpec::Kind::none;
      else if (value == "durel") cfg.gold.kind = GoldSpec::Kind::durel;
      else if (value == "surel") cfg.gold.kind = GoldSpec::Kind::surel;
      else {
        cfg.gold.kind = GoldSpec::Kind::path;
        cfg.gold.path = value;
      }
    } else if (key == "iterations")
      cfg.iterations = static_cast<int>(detail::parse_int(key, value));
    else if (key == "seed")
      cfg.seed = static_cast<std::uint64_t>(detail::parse_int(key, value));
    else if (key == "out") cfg.out_dir = value;
    else if (key == "control") cfg.control = parse_control(value);
    else if (key == "downsample_n")
      cfg.downsample_n = static_cast<std::size_t>(detail::parse_int(key, value));
    else if (key == "lnd_k")
      cfg.lnd_neighbors = static_cast<std::size_t>(detail::parse_int(key, value));
    else if (key == "wi_mean_center")
      cfg.wi_mean_center = detail::parse_bool(key, value);
    else if (key == "wi_suffix") cfg.wi_suffix = value;
    else if (key == "opplus_whiten")
      cfg.op_plus.whiten = detail::parse_bool(key, value);
    else if (key == "opplus_reweight")
      cfg.op_plus.reweight_exponent = detail::parse_real(key, value);
    else if (key == "opplus_dewhiten")
      cfg.op_plus.dewhiten = detail::parse_bool(key, value);
    else if (key == "vi_epochs_b") {
      if (value == "none" || value.empty()) cfg.vi_epochs_b.reset();
      else cfg.vi_epochs_b = static_cast<int>(detail::parse_int(key, value));
    } else
      throw ConfigError("unknown config key: " + key);
  }
  // Default window mode follows the space: sampled windows for SGNS,
  // fixed windows for the count-based spaces.
  if (!cfg.window_mode_explicit)
    cfg.space_cfg.window.mode = cfg.space == Space::sgns
                                    ? WindowPolicy::Mode::dynamic
                                    : WindowPolicy::Mode::fixed;
  return cfg;
}

// Canonical settings echo: every key, sorted, one per line. Hashing
// this string yields the configuration hash stamped into outputs, and
// feeding it back through parse_config_text reproduces the run.
inline std::string config_echo(const PipelineConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["corpus_a"] = cfg.corpus_a_path;
  kv["corpus_b"] = cfg.corpus_b_path;
  kv["targets"] = cfg.targets_path;
  kv["sense_dist"] = cfg.sense_dist_path;
  kv["label_a"] = cfg.label_a;
  kv["label_b"] = cfg.label_b;
  kv["min_count_a"] = std::to_string(cfg.min_count_a);
  kv["min_count_b"] = std::to_string(cfg.min_count_b);
  kv["space"] = to_string(cfg.space);
  kv["align"] = to_string(cfg.align);
  kv["measure"] = to_string(cfg.measure);
  kv["dim"] = std::to_string(cfg.space_cfg.dim);
  kv["k"] = std::to_string(cfg.space_cfg.shift);
  kv["alpha"] = format_double(cfg.space_cfg.alpha);
  kv["subsample"] =
      cfg.space_cfg.subsample ? format_double(*cfg.space_cfg.subsample) : "none";
  kv["p"] = format_double(cfg.space_cfg.eigen_weight);
  kv["s"] = std::to_string(cfg.space_cfg.ri_nonzeros);
  kv["epochs"] = std::to_string(cfg.space_cfg.epochs);
  kv["window"] = std::to_string(cfg.space_cfg.window.size);
  kv["window_mode"] =
      cfg.space_cfg.window.mode == WindowPolicy::Mode::fixed ? "fixed" : "dynamic";
  kv["lr_initial"] = format_double(cfg.space_cfg.lr_initial);
  kv["lr_final"] = format_double(cfg.space_cfg.lr_final);
  kv["smooth_negatives"] = cfg.space_cfg.smooth_negatives ? "true" : "false";
  kv["workers"] = std::to_string(cfg.space_cfg.workers);
  switch (cfg.gold.kind) {
    case GoldSpec::Kind::none: kv["gold"] = "none"; break;
    case GoldSpec::Kind::durel: kv["gold"] = "durel"; break;
    case GoldSpec::Kind::surel: kv["gold"] = "surel"; break;
    case GoldSpec::Kind::path: kv["gold"] = cfg.gold.path; break;
  }
  kv["iterations"] = std::to_string(cfg.iterations);
  kv["seed"] = std::to_string(cfg.seed);
  kv["out"] = cfg.out_dir;
  kv["control"] = to_string(cfg.control);
  kv["downsample_n"] = std::to_string(cfg.downsample_n);
  kv["lnd_k"] = std::to_string(cfg.lnd_neighbors);
  kv["wi_mean_center"] = cfg.wi_mean_center ? "true" : "false";
  kv["wi_suffix"] = cfg.wi_suffix;
  kv["opplus_whiten"] = cfg.op_plus.whiten ? "true" : "false";
  kv["opplus_reweight"] = format_double(cfg.op_plus.reweight_exponent);
  kv["opplus_dewhiten"] = cfg.op_plus.dewhiten ? "true" : "false";
  kv["vi_epochs_b"] =
      cfg.vi_epochs_b ? std::to_string(*cfg.vi_epochs_b) : "none";
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

namespace detail {

inline bool space_align_marked(Space s, Align a) {
  switch (s) {
    case Space::count:
    case Space::ppmi:
      return a == Align::ci || a == Align::wi;
    case Space::svd:
      return a == Align::op || a == Align::op_minus || a == Align::op_plus ||
             a == Align::wi || a == Align::none;
    case Space::ri:
      return a == Align::srv || a == Align::op || a == Align::op_minus ||
             a == Align::op_plus || a == Align::wi || a == Align::none;
    case Space::sgns:
      return a == Align::op || a == Align::op_minus || a == Align::op_plus ||
             a == Align::vi || a == Align::wi || a == Align::none;
    case Space::sense_dist:
      return a == Align::none;
  }
  return false;
}

inline bool space_measure_marked(Space s, MeasureKind m) {
  switch (s) {
    case Space::count:
      return m == MeasureKind::cd || m == MeasureKind::lnd ||
             m == MeasureKind::td || m == MeasureKind::hd ||
             m == MeasureKind::hd_norm;
    case Space::ppmi:
    case Space::svd:
    case Space::ri:
    case Space::sgns:
      return m == MeasureKind::cd || m == MeasureKind::lnd;
    case Space::sense_dist:
      return m == MeasureKind::jsd || m == MeasureKind::hd ||
             m == MeasureKind::hd_norm;
  }
  return false;
}

}  // namespace detail

// Combination admissibility: the representation/alignment/measure
// matrix, with two documented extensions — align=none for the
// low-dimensional spaces (and sense distributions, which need no
// alignment), and fd as a corpus-direct measure requiring space=count
// with align=none.
inline bool combination_allowed(Space s, Align a, MeasureKind m) {
  if (m == MeasureKind::fd) return s == Space::count && a == Align::none;
  return detail::space_align_marked(s, a) && detail::space_measure_marked(s, m);
}

// Returns the full list of problems; an empty list means the config is
// runnable.
inline std::vector<std::string> validate_config(const PipelineConfig& cfg) {
  std::vector<std::string> errors;
  const Space s = cfg.space;
  const Align a = cfg.align;
  const MeasureKind m = cfg.measure;
  const std::string triple = std::string("(") + to_string(s) + ", " +
                             to_string(a) + ", " + to_string(m) + ")";

  if (m == MeasureKind::fd) {
    if (s != Space::count || a != Align::none)
      errors.push_back(triple +
                       ": fd is computed directly from the corpus and runs only "
                       "as space=count with align=none");
  } else {
    if (!detail::space_align_marked(s, a)) {
      std::string rule;
      switch (a) {
        case Align::ci: rule = "ci aligns the sparse spaces (count, ppmi)"; break;
        case Align::srv: rule = "srv applies only to ri"; break;
        case Align::op:
        case Align::op_minus:
        case Align::op_plus:
          rule = "op variants apply only to the low-dimensional spaces "
                 "(svd, ri, sgns)";
          break;
        case Align::vi: rule = "vi applies only to sgns"; break;
        case Align::wi: rule = "wi applies to vector spaces, not sense-dist"; break;
        case Align::none:
          rule = "align=none is the no-alignment extension for svd, ri, sgns "
                 "and sense-dist";
          break;
      }
      errors.push_back(triple + ": " + rule);
    }
    if (!detail::space_measure_marked(s, m)) {
      std::string rule;
      switch (m) {
        case MeasureKind::cd:
        case MeasureKind::lnd:
          rule = std::string(to_string(m)) + " applies to vector spaces only";
          break;
        case MeasureKind::jsd:
          rule = "jsd compares sense distributions only";
          break;
        case MeasureKind::td:
          rule = "td runs on raw count rows only";
          break;
        case MeasureKind::hd:
        case MeasureKind::hd_norm:
          rule = "entropy difference runs on raw count rows or sense "
                 "distributions";
          break;
        case MeasureKind::fd: rule = "unreachable"; break;
      }
      errors.push_back(triple + ": " + rule);
    }
  }

  if (s == Space::sense_dist) {
    if (cfg.sense_dist_path.empty())
      errors.push_back("sense_dist: path to the sense distribution file required");
    if (cfg.control != Control::none)
      errors.push_back("control conditions need corpora, not sense distributions");
  } else {
    if (cfg.corpus_a_path.empty()) errors.push_back("corpus_a: path required");
    if (cfg.corpus_b_path.empty()) errors.push_back("corpus_b: path required");
    if (cfg.targets_path.empty()) errors.push_back("targets: path required");
  }
  if (cfg.gold.kind == GoldSpec::Kind::path && cfg.gold.path.empty())
    errors.push_back("gold: path required");

  const SpaceConfig& sc = cfg.space_cfg;
  if (sc.dim < 1) errors.push_back("dim must be >= 1");
  if (sc.shift < 1) errors.push_back("k must be >= 1");
  if (!(sc.alpha > 0.0) || sc.alpha > 1.0)
    errors.push_back("alpha must be in (0, 1]");
  if (sc.subsample && *sc.subsample <= 0.0)
    errors.push_back("subsample must be positive or none");
  if (sc.eigen_weight < 0.0 || sc.eigen_weight > 1.0)
    errors.push_back("p must be in [0, 1]");
  if (sc.ri_nonzeros < 1) errors.push_back("s must be >= 1");
  if (s == Space::ri && sc.ri_nonzeros > sc.dim)
    errors.push_back("s cannot exceed dim");
  if (sc.epochs < 1) errors.push_back("epochs must be >= 1");
  if (sc.window.size < 1) errors.push_back("window must be >= 1");
  if (sc.lr_initial <= 0.0 || sc.lr_final <= 0.0 || sc.lr_final > sc.lr_initial)
    errors.push_back("learning rate must decay: 0 < lr_final <= lr_initial");
  if (sc.workers < 1) errors.push_back("workers must be >= 1");
  if (cfg.iterations < 1) errors.push_back("iterations must be >= 1");
  if (cfg.downsample_n < 1) errors.push_back("downsample_n must be >= 1");
  if (cfg.lnd_neighbors < 1) errors.push_back("lnd_k must be >= 1");
  if (cfg.vi_epochs_b && *cfg.vi_epochs_b < 0)
    errors.push_back("vi_epochs_b must be >= 0");
  if (cfg.wi_suffix.empty()) errors.push_back("wi_suffix must be non-empty");
  if (cfg.wi_mean_center) {
    if (a != Align::wi)
      errors.push_back("wi_mean_center applies only with align=wi");
    else if (s == Space::count || s == Space::ppmi || s == Space::sense_dist)
      errors.push_back("wi_mean_center applies to dense spaces (svd, ri, sgns)");
  }
  return errors;
}

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct ResultReport {
  ChangeScores scores;
  std::optional<EvaluationReport> evaluation;
  std::vector<double> iteration_rhos;
  std::vector<StageTiming> timings;
  std::string config_echo;
  std::string config_hash;
  std::size_t n_targets = 0;
  std::optional<ProcrustesSolution> procrustes;
};

namespace detail {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& timings) : timings_(timings) {}

  template <class Fn>
  auto run(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(stage, start);
      } else {
        auto result = fn();
        record(stage, start);
        return result;
      }
    } catch (ConfigError& e) {
      throw ConfigError(stage + " stage: " + e.what());
    } catch (DataError& e) {
      throw DataError(stage + " stage: " + e.what());
    } catch (NumericError& e) {
      throw NumericError(stage + " stage: " + e.what());
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    for (auto& t : timings_)
      if (t.stage == stage) {
        t.seconds += secs;
        return;
      }
    timings_.push_back({stage, secs});
  }

  std::vector<StageTiming>& timings_;
};

// Dense rows for one iteration's two sides, plus the sparse matrices
// they came from when the space is count-based.
struct IterationSpaces {
  std::optional<CoocMatrix> sparse_a, sparse_b;
  std::optional<EmbeddingMatrix> dense_a, dense_b;
};

inline EmbeddingMatrix build_dense_space(const Corpus& corpus,
                                         const Vocabulary& vocab, Space space,
                                         const SpaceConfig& sc) {
  switch (space) {
    case Space::svd: {
      CoocMatrix counts = count_matrix(corpus, vocab, sc.window, sc.seed);
      CoocMatrix weighted = ppmi_transform(counts, sc.shift, sc.alpha);
      return svd_reduce(weighted, sc.dim, sc.eigen_weight);
    }
    case Space::ri:
      return random_index(corpus, vocab, sc.window, sc.dim, sc.ri_nonzeros,
                          sc.subsample, sc.seed);
    case Space::sgns:
      return train_sgns(corpus, vocab, sc);
    default:
      throw ConfigError("not a dense space");
  }
}

inline CoocMatrix build_sparse_space(const Corpus& corpus, const Vocabulary& vocab,
                                     Space space, const SpaceConfig& sc) {
  CoocMatrix counts = count_matrix(corpus, vocab, sc.window, sc.seed);
  if (space == Space::ppmi) return ppmi_transform(counts, sc.shift, sc.alpha);
  return counts;
}

}  // namespace detail

// Executes one full experiment. Stage order: load, control transform,
// WI mixing, space building, alignment, measuring, evaluation; with
// iterations > 1 the space/alignment/measure stages repeat with seeds
// seed+i and the per-word scores are averaged.
inline ResultReport run_pipeline(const PipelineConfig& cfg) {
  {
    auto errors = validate_config(cfg);
    if (!errors.empty()) {
      std::string joined = "invalid configuration:";
      for (const auto& e : errors) joined += "\n  - " + e;
      throw ConfigError(joined);
    }
  }

  ResultReport report;
  report.config_echo = config_echo(cfg);
  report.config_hash = hex64(fnv1a64(report.config_echo));
  detail::StageClock clock(report.timings);

  std::optional<GoldRanking> gold;
  if (cfg.gold.kind != GoldSpec::Kind::none)
    gold = clock.run("load", [&] {
      switch (cfg.gold.kind) {
        case GoldSpec::Kind::durel: return durel_gold();
        case GoldSpec::Kind::surel: return surel_gold();
        default: return load_gold_tsv(cfg.gold.path);
      }
    });

  std::vector<ChangeScores> runs;
  runs.reserve(static_cast<std::size_t>(cfg.iterations));

  if (cfg.space == Space::sense_dist) {
    auto senses = clock.run("load",
                            [&] { return load_sense_distributions(cfg.sense_dist_path); });
    std::vector<std::string> targets;
    if (!cfg.targets_path.empty()) {
      targets = clock.run("load", [&] { return load_targets(cfg.targets_path); });
    } else {
      for (const auto& [word, dists] : senses) targets.push_back(word);
    }
    report.n_targets = targets.size();

    ChangeScores scores;
    scores.measure = to_string(cfg.measure);
    clock.run("measure", [&] {
      for (const auto& t : targets) {
        auto it = senses.find(t);
        if (it == senses.end()) continue;
        const auto& [pa, pb] = it->second;
        try {
          if (cfg.measure == MeasureKind::jsd)
            scores.scores[t] = jensen_shannon_distance(pa.probs, pb.probs);
          else
            scores.scores[t] = entropy_difference(
                pa.probs, pb.probs, cfg.measure == MeasureKind::hd_norm);
        } catch (const NumericError&) {
          // Degenerate distribution for this word: leave it unscored.
        }
      }
    });
    for (int i = 0; i < cfg.iterations; ++i) runs.push_back(scores);
  } else {
    auto loaded_a = clock.run("load", [&] {
      return load_corpus(cfg.corpus_a_path, cfg.min_count_a, cfg.label_a);
    });
    auto loaded_b = clock.run("load", [&] {
      return load_corpus(cfg.corpus_b_path, cfg.min_count_b, cfg.label_b);
    });
    auto targets =
        clock.run("load", [&] { return load_targets(cfg.targets_path); });
    report.n_targets = targets.size();

    Corpus corpus_a = std::move(loaded_a.corpus);
    Corpus corpus_b = std::move(loaded_b.corpus);
    Vocabulary vocab_a = std::move(loaded_a.vocab);
    Vocabulary vocab_b = std::move(loaded_b.vocab);

    if (cfg.control != Control::none) {
      clock.run("control", [&] {
        auto shuffled = shuffle_control(corpus_a, corpus_b, targets, cfg.seed);
        corpus_a = std::move(shuffled.first);
        corpus_b = std::move(shuffled.second);
        if (cfg.control == Control::shuffle_downsample) {
          auto down = downsample_targets(corpus_a, corpus_b, targets,
                                         cfg.downsample_n, cfg.seed);
          corpus_a = std::move(down.first);
          corpus_b = std::move(down.second);
        }
        vocab_a = build_vocabulary(corpus_a);
        vocab_b = build_vocabulary(corpus_b);
      });
    }

    // WI mixing happens once; iteration seeds only vary model training.
    Corpus mixed;
    Vocabulary vocab_mixed;
    if (cfg.align == Align::wi) {
      clock.run("mix", [&] {
        mixed = inject_targets(corpus_a, corpus_b, targets, cfg.wi_suffix,
                               cfg.seed);
        vocab_mixed = build_vocabulary(mixed);
      });
    }

    for (int it = 0; it < cfg.iterations; ++it) {
      SpaceConfig sc = cfg.space_cfg;
      sc.seed = cfg.seed + static_cast<std::uint64_t>(it);
      ChangeScores scores;
      scores.measure = to_string(cfg.measure);

      if (cfg.measure == MeasureKind::fd) {
        clock.run("measure", [&] {
          for (const auto& t : targets) {
            auto ia = corpus_a.raw.freq.find(t);
            auto ib = corpus_b.raw.freq.find(t);
            if (ia == corpus_a.raw.freq.end() || ib == corpus_b.raw.freq.end())
              continue;
            scores.scores[t] =
                frequency_difference(ia->second, corpus_a.raw.token_count,
                                     ib->second, corpus_b.raw.token_count);
          }
        });
        runs.push_back(std::move(scores));
        continue;
      }

      if (cfg.align == Align::wi) {
        // Single mixed space; each target is scored against its
        // placeholder twin.
        std::optional<CoocMatrix> sparse;
        std::optional<EmbeddingMatrix> dense;
        clock.run("space", [&] {
          if (cfg.space == Space::count || cfg.space == Space::ppmi)
            sparse = detail::build_sparse_space(mixed, vocab_mixed, cfg.space, sc);
          else
            dense = detail::build_dense_space(mixed, vocab_mixed, cfg.space, sc);
          if (dense && cfg.wi_mean_center) {
            const Eigen::RowVectorXd mean = dense->rows.colwise().mean();
            dense->rows.rowwise() -= mean;
          }
        });
        clock.run("measure", [&] {
          for (const auto& t : targets) {
            const std::string twin = t + cfg.wi_suffix;
            try {
              if (sparse) {
                auto iw = sparse->row_vocab().find(t);
                auto ip = sparse->row_vocab().find(twin);
                if (!iw || !ip) continue;
                if (cfg.measure == MeasureKind::cd)
                  scores.scores[t] =
                      cosine_distance(sparse->row(*iw), sparse->row(*ip));
                else if (cfg.measure == MeasureKind::lnd)
                  scores.scores[t] = local_neighborhood_distance(
                      *sparse, *sparse, t, twin, cfg.lnd_neighbors);
                else if (cfg.measure == MeasureKind::td)
                  scores.scores[t] = type_difference(
                      sparse->row_nnz(*iw), mixed.raw.type_count,
                      sparse->row_nnz(*ip), mixed.raw.type_count);
                else {
                  std::vector<double> x, y;
                  for (const auto& [c, v] : sparse->row(*iw)) x.push_back(v);
                  for (const auto& [c, v] : sparse->row(*ip)) y.push_back(v);
                  scores.scores[t] = entropy_difference(
                      x, y, cfg.measure == MeasureKind::hd_norm);
                }
              } else {
                auto iw = dense->vocab.find(t);
                auto ip = dense->vocab.find(twin);
                if (!iw || !ip) continue;
                if (cfg.measure == MeasureKind::cd)
                  scores.scores[t] = cosine_distance(
                      dense->rows.row(static_cast<Eigen::Index>(*iw)),
                      dense->rows.row(static_cast<Eigen::Index>(*ip)));
                else
                  scores.scores[t] = local_neighborhood_distance(
                      *dense, *dense, t, twin, cfg.lnd_neighbors);
              }
            } catch (const NumericError&) {
              // Zero or degenerate vectors: the target stays unscored.
            } catch (const DataError&) {
              // Rows with no contexts at all behave the same way.
            }
          }
        });
        runs.push_back(std::move(scores));
        continue;
      }

      // Two-sided path. Dispersion measures and LND read the spaces
      // directly (no cross-space coordinates involved); CD goes through
      // the configured alignment.
      detail::IterationSpaces spaces;
      clock.run("space", [&] {
        if (cfg.space == Space::count || cfg.space == Space::ppmi) {
          spaces.sparse_a =
              detail::build_sparse_space(corpus_a, vocab_a, cfg.space, sc);
          spaces.sparse_b =
              detail::build_sparse_space(corpus_b, vocab_b, cfg.space, sc);
        } else if (cfg.align == Align::srv) {
          // The shared random projection is the alignment; it consumes
          // count matrices, optionally subsampled at pair time.
          auto counts_for = [&](const Corpus& c, const Vocabulary& v,
                                std::uint64_t side_seed) {
            if (sc.subsample) {
              Corpus sub = subsample_occurrences(c, v, *sc.subsample, side_seed);
              return count_matrix(sub, v, sc.window, side_seed);
            }
            return count_matrix(c, v, sc.window, side_seed);
          };
          spaces.sparse_a =
              counts_for(corpus_a, vocab_a, derive_seed(sc.seed, stream::kSideA));
          spaces.sparse_b =
              counts_for(corpus_b, vocab_b, derive_seed(sc.seed, stream::kSideB));
        } else if (cfg.align != Align::vi) {
          SpaceConfig sa = sc;
          sa.seed = derive_seed(sc.seed, stream::kSideA);
          SpaceConfig sb = sc;
          sb.seed = derive_seed(sc.seed, stream::kSideB);
          spaces.dense_a =
              detail::build_dense_space(corpus_a, vocab_a, cfg.space, sa);
          spaces.dense_b =
              detail::build_dense_space(corpus_b, vocab_b, cfg.space, sb);
        }
      });

      if (cfg.measure == MeasureKind::lnd) {
        // LND compares neighborhoods within each space, so coordinate
        // re-mappings (ci, op variants, none) are skipped. srv and vi are
        // different: they determine how the spaces are built.
        if (cfg.align == Align::srv || cfg.align == Align::vi) {
          clock.run("align", [&] {
            DenseAlignedPair pair =
                cfg.align == Align::srv
                    ? shared_random_align(*spaces.sparse_a, *spaces.sparse_b,
                                          sc.dim, sc.ri_nonzeros, sc.seed)
                    : vector_initialization_align(corpus_a, corpus_b, vocab_a,
                                                  vocab_b, sc, cfg.vi_epochs_b);
            spaces.sparse_a.reset();
            spaces.sparse_b.reset();
            spaces.dense_a = EmbeddingMatrix{pair.shared_vocab, std::move(pair.a)};
            spaces.dense_b =
                EmbeddingMatrix{std::move(pair.shared_vocab), std::move(pair.b)};
          });
        }
        clock.run("measure", [&] {
          for (const auto& t : targets) {
            try {
              if (spaces.sparse_a) {
                if (!spaces.sparse_a->row_vocab().contains(t) ||
                    !spaces.sparse_b->row_vocab().contains(t))
                  continue;
                scores.scores[t] = local_neighborhood_distance(
                    *spaces.sparse_a, *spaces.sparse_b, t, cfg.lnd_neighbors);
              } else {
                if (!spaces.dense_a->vocab.contains(t) ||
                    !spaces.dense_b->vocab.contains(t))
                  continue;
                scores.scores[t] = local_neighborhood_distance(
                    *spaces.dense_a, *spaces.dense_b, t, cfg.lnd_neighbors);
              }
            } catch (const NumericError&) {
            }
          }
        });
        runs.push_back(std::move(scores));
        continue;
      }

      if (cfg.measure == MeasureKind::td || cfg.measure == MeasureKind::hd ||
          cfg.measure == MeasureKind::hd_norm) {
        clock.run("measure", [&] {
          for (const auto& t : targets) {
            auto ia = spaces.sparse_a->row_vocab().find(t);
            auto ib = spaces.sparse_b->row_vocab().find(t);
            if (!ia || !ib) continue;
            try {
              if (cfg.measure == MeasureKind::td) {
                scores.scores[t] = type_difference(
                    spaces.sparse_a->row_nnz(*ia), corpus_a.raw.type_count,
                    spaces.sparse_b->row_nnz(*ib), corpus_b.raw.type_count);
              } else {
                std::vector<double> x, y;
                for (const auto& [c, v] : spaces.sparse_a->row(*ia))
                  x.push_back(v);
                for (const auto& [c, v] : spaces.sparse_b->row(*ib))
                  y.push_back(v);
                scores.scores[t] = entropy_difference(
                    x, y, cfg.measure == MeasureKind::hd_norm);
              }
            } catch (const DataError&) {
              // Word with no contexts in one matrix: unscored.
            }
          }
        });
        runs.push_back(std::move(scores));
        continue;
      }

      // Cosine distance through the configured alignment.
      std::optional<SparseAlignedPair> sparse_pair;
      std::optional<DenseAlignedPair> dense_pair;
      clock.run("align", [&] {
        switch (cfg.align) {
          case Align::ci:
            sparse_pair = column_intersect(*spaces.sparse_a, *spaces.sparse_b);
            break;
          case Align::srv:
            dense_pair = shared_random_align(*spaces.sparse_a, *spaces.sparse_b,
                                             sc.dim, sc.ri_nonzeros, sc.seed);
            break;
          case Align::op:
          case Align::op_minus:
          case Align::op_plus: {
            const ProcrustesVariant variant =
                cfg.align == Align::op        ? ProcrustesVariant::op
                : cfg.align == Align::op_minus ? ProcrustesVariant::op_minus
                                                : ProcrustesVariant::op_plus;
            auto result = orthogonal_procrustes(*spaces.dense_a, *spaces.dense_b,
                                                variant, cfg.op_plus);
            if (it == 0) report.procrustes = result.solution;
            dense_pair = std::move(result.pair);
            break;
          }
          case Align::vi:
            dense_pair = vector_initialization_align(
                corpus_a, corpus_b, vocab_a, vocab_b, sc, cfg.vi_epochs_b);
            break;
          case Align::none:
            dense_pair = restrict_to_shared(*spaces.dense_a, *spaces.dense_b);
            break;
          case Align::wi:
            break;  // handled above
        }
      });

      clock.run("measure", [&] {
        for (const auto& t : targets) {
          try {
            if (sparse_pair) {
              auto idx = sparse_pair->shared_vocab.find(t);
              if (!idx) continue;
              scores.scores[t] = cosine_distance(sparse_pair->a.row(*idx),
                                                 sparse_pair->b.row(*idx));
            } else {
              auto idx = dense_pair->shared_vocab.find(t);
              if (!idx) continue;
              scores.scores[t] = cosine_distance(
                  dense_pair->a.row(static_cast<Eigen::Index>(*idx)),
                  dense_pair->b.row(static_cast<Eigen::Index>(*idx)));
            }
          } catch (const NumericError&) {
            // Zero vector for this target: unscored, later excluded.
          }
        }
      });
      runs.push_back(std::move(scores));
    }
  }

  if (gold) {
    for (const auto& run : runs) {
      try {
        report.iteration_rhos.push_back(spearman(*gold, run).rho);
      } catch (const DataError&) {
        break;  // too few overlapping items; final spearman will report
      }
    }
  }

  report.scores = clock.run("aggregate", [&] { return aggregate_iterations(runs); });

  if (gold) {
    report.evaluation = clock.run("evaluate", [&] {
      EvaluationReport ev = spearman(*gold, report.scores);
      ev.config_hash = report.config_hash;
      ev.iterations = cfg.iterations;
      return ev;
    });
  }

  if (!cfg.out_dir.empty()) {
    clock.run("write", [&] {
      namespace fs = std::filesystem;
      const fs::path dir(cfg.out_dir);
      write_scores_tsv(report.scores, report.config_hash, dir / "scores.tsv");

      std::string rep;
      rep += "metric\tvalue\n";
      rep += "config_hash\t" + report.config_hash + "\n";
      rep += std::string("space\t") + to_string(cfg.space) + "\n";
      rep += std::string("align\t") + to_string(cfg.align) + "\n";
      rep += std::string("measure\t") + to_string(cfg.measure) + "\n";
      rep += "iterations\t" + std::to_string(cfg.iterations) + "\n";
      rep += "targets\t" + std::to_string(report.n_targets) + "\n";
      rep += "scored\t" + std::to_string(report.scores.scores.size()) + "\n";
      if (report.evaluation) {
        const auto& ev = *report.evaluation;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", ev.rho);
        rep += "rho\t" + std::string(buf) + "\n";
        rep += "rho_n\t" + std::to_string(ev.n) + "\n";
        if (report.iteration_rhos.size() > 1) {
          auto [lo, hi] = std::minmax_element(report.iteration_rhos.begin(),
                                              report.iteration_rhos.end());
          std::snprintf(buf, sizeof buf, "%.6f", *lo);
          rep += "rho_low\t" + std::string(buf) + "\n";
          std::snprintf(buf, sizeof buf, "%.6f", *hi);
          rep += "rho_high\t" + std::string(buf) + "\n";
        }
        rep += "excluded\t" + std::to_string(ev.excluded.size()) + "\n";
        for (const auto& w : ev.excluded) rep += "excluded_word\t" + w + "\n";
      }
      atomic_write_file(dir / "report.tsv", rep);
      atomic_write_file(dir / "config.txt", report.config_echo);
      if (report.procrustes)
        save_procrustes(*report.procrustes, dir / "procrustes.txt");
    });
  }
  return report;
}

}  // namespace lscd

#endif  // LSCD_PIPELINE_HPP
