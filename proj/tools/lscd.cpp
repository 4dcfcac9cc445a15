// Batch CLI for detecting lexical semantic change between two corpora.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lscd/lscd.hpp"

namespace {

namespace fs = std::filesystem;

// Merge order: config file first, then each --set in the order given,
// then explicit flags. Later wins.
std::map<std::string, std::string> resolve_settings(
    const std::string& config_path, const std::vector<std::string>& sets,
    const std::string& out, const std::string& seed,
    const std::string& iterations) {
  std::map<std::string, std::string> kv;
  if (!config_path.empty())
    kv = lscd::parse_config_text(lscd::read_file(config_path));
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw lscd::ConfigError("--set expects KEY=VALUE, got '" + s + "'");
    kv[lscd::trim(s.substr(0, eq))] = lscd::trim(s.substr(eq + 1));
  }
  if (!out.empty()) kv["out"] = out;
  if (!seed.empty()) kv["seed"] = seed;
  if (!iterations.empty()) kv["iterations"] = iterations;
  return kv;
}

int cmd_run(const lscd::PipelineConfig& cfg, bool dump_resolved) {
  if (dump_resolved) {
    std::cout << lscd::config_echo(cfg);
    return 0;
  }
  lscd::ResultReport report = lscd::run_pipeline(cfg);

  std::cout << "space=" << lscd::to_string(cfg.space)
            << " align=" << lscd::to_string(cfg.align)
            << " measure=" << lscd::to_string(cfg.measure) << "\n";
  std::cout << "config_hash=" << report.config_hash << "\n";
  std::cout << "targets=" << report.n_targets
            << " scored=" << report.scores.scores.size() << "\n";
  if (report.evaluation) {
    const auto& ev = *report.evaluation;
    char buf[64];
    std::snprintf(buf, sizeof buf, "rho=%.6f n=%zu excluded=%zu", ev.rho, ev.n,
                  ev.excluded.size());
    std::cout << buf;
    if (report.iteration_rhos.size() > 1) {
      auto [lo, hi] = std::minmax_element(report.iteration_rhos.begin(),
                                          report.iteration_rhos.end());
      std::snprintf(buf, sizeof buf, " iterations=%zu rho_low=%.6f rho_high=%.6f",
                    report.iteration_rhos.size(), *lo, *hi);
      std::cout << buf;
    }
    std::cout << "\n";
    if (!ev.excluded.empty()) {
      std::cout << "excluded:";
      for (const auto& w : ev.excluded) std::cout << " " << w;
      std::cout << "\n";
    }
  }
  if (!cfg.out_dir.empty()) std::cout << "wrote " << cfg.out_dir << "\n";
  for (const auto& t : report.timings)
    std::cerr << "timing: " << t.stage << " " << t.seconds << "s\n";
  return 0;
}

int cmd_validate(const lscd::PipelineConfig& cfg, bool dump_resolved) {
  if (dump_resolved) std::cout << lscd::config_echo(cfg);
  auto errors = lscd::validate_config(cfg);
  if (errors.empty()) {
    std::cout << "ok\n";
    return 0;
  }
  for (std::size_t i = 0; i < errors.size(); ++i)
    std::cout << (i + 1) << ". " << errors[i] << "\n";
  return 1;
}

int cmd_dump_gold(const std::string& which, const std::string& out) {
  const lscd::GoldRanking* gold = nullptr;
  if (which == "durel") gold = &lscd::durel_gold();
  else if (which == "surel") gold = &lscd::surel_gold();
  else throw lscd::ConfigError("dump-gold expects durel or surel, got '" + which + "'");
  std::string tsv = lscd::gold_to_tsv(*gold);
  if (out.empty())
    std::cout << tsv;
  else
    lscd::atomic_write_file(out, tsv);
  return 0;
}

int cmd_synth(std::size_t n_targets, std::size_t tokens, std::uint64_t seed,
              const std::string& out) {
  lscd::SyntheticBenchmark bench =
      lscd::synthesize_change_corpus(n_targets, tokens, seed);
  const fs::path dir(out);
  lscd::save_corpus(bench.corpus_a, dir / "corpus_a.txt");
  lscd::save_corpus(bench.corpus_b, dir / "corpus_b.txt");
  std::string targets;
  for (const auto& t : bench.targets) targets += t + "\n";
  lscd::atomic_write_file(dir / "targets.txt", targets);
  lscd::atomic_write_file(dir / "gold.tsv", lscd::gold_to_tsv(bench.gold));
  std::cout << "wrote " << out << " (targets=" << bench.targets.size()
            << " tokens_a=" << bench.corpus_a.token_count
            << " tokens_b=" << bench.corpus_b.token_count << ")\n";
  return 0;
}

int cmd_shuffle(const std::string& corpus_a, const std::string& corpus_b,
                const std::string& targets_path, std::size_t min_count_a,
                std::size_t min_count_b, std::uint64_t seed,
                std::size_t downsample_n, const std::string& out) {
  auto a = lscd::load_corpus(corpus_a, min_count_a, "C_a");
  auto b = lscd::load_corpus(corpus_b, min_count_b, "C_b");
  auto targets = lscd::load_targets(targets_path);
  auto pair = lscd::shuffle_control(a.corpus, b.corpus, targets, seed);
  if (downsample_n > 0)
    pair = lscd::downsample_targets(pair.first, pair.second, targets,
                                    downsample_n, seed);
  const fs::path dir(out);
  lscd::save_corpus(pair.first, dir / "corpus_a.txt");
  lscd::save_corpus(pair.second, dir / "corpus_b.txt");
  std::cout << "wrote " << out << " (tokens_a=" << pair.first.token_count
            << " tokens_b=" << pair.second.token_count << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lexical semantic change detection between two corpora"};
  app.require_subcommand(1);

  std::string config_path, out, seed_str, iterations_str;
  std::vector<std::string> sets;
  bool dump_resolved = false;

  auto add_config_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value settings file");
    sub->add_option("--set", sets, "override KEY=VALUE (repeatable, later wins)");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed_str, "base random seed");
    sub->add_option("--iterations", iterations_str, "model training repetitions");
    sub->add_flag("--dump-resolved-config", dump_resolved,
                  "print the effective settings");
  };

  CLI::App* run = app.add_subcommand("run", "run one detection experiment");
  add_config_flags(run);

  CLI::App* validate =
      app.add_subcommand("validate", "check a configuration without running it");
  add_config_flags(validate);

  CLI::App* dump_gold =
      app.add_subcommand("dump-gold", "print a bundled gold ranking as TSV");
  std::string which_gold;
  std::string gold_out;
  dump_gold->add_option("name", which_gold, "durel or surel")->required();
  dump_gold->add_option("--out", gold_out, "write to file instead of stdout");

  CLI::App* synth = app.add_subcommand(
      "synth", "generate a synthetic change benchmark with graded gold scores");
  std::size_t synth_targets = 20, synth_tokens = 100000;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  synth->add_option("--targets-count", synth_targets, "number of target words");
  synth->add_option("--tokens", synth_tokens, "tokens per corpus");
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--out", synth_out, "output directory")->required();

  CLI::App* shuffle = app.add_subcommand(
      "shuffle", "write the shuffle control condition of a corpus pair");
  std::string sh_a, sh_b, sh_targets, sh_out;
  std::size_t sh_min_a = 1, sh_min_b = 1, sh_down = 0;
  std::uint64_t sh_seed = 1;
  shuffle->add_option("--corpus-a", sh_a, "first corpus")->required();
  shuffle->add_option("--corpus-b", sh_b, "second corpus")->required();
  shuffle->add_option("--targets", sh_targets, "target word list")->required();
  shuffle->add_option("--min-count-a", sh_min_a, "frequency threshold, side a");
  shuffle->add_option("--min-count-b", sh_min_b, "frequency threshold, side b");
  shuffle->add_option("--seed", sh_seed, "random seed");
  shuffle->add_option("--downsample", sh_down,
                      "also cap each target near N occurrences per corpus");
  shuffle->add_option("--out", sh_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (run->parsed() || validate->parsed()) {
      auto kv = resolve_settings(config_path, sets, out, seed_str, iterations_str);
      lscd::PipelineConfig cfg = lscd::make_pipeline_config(kv);
      return run->parsed() ? cmd_run(cfg, dump_resolved)
                           : cmd_validate(cfg, dump_resolved);
    }
    if (dump_gold->parsed()) return cmd_dump_gold(which_gold, gold_out);
    if (synth->parsed())
      return cmd_synth(synth_targets, synth_tokens, synth_seed, synth_out);
    if (shuffle->parsed())
      return cmd_shuffle(sh_a, sh_b, sh_targets, sh_min_a, sh_min_b, sh_seed,
                         sh_down, sh_out);
  } catch (const lscd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const lscd::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const lscd::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
