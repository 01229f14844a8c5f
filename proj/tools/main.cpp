// Command-line front end: one subcommand per experiment family plus the
// acceptance suite. Exit codes: 0 success, 2 validation error, 3 resource
// cap, 4 acceptance failure.
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "klab/acceptance.hpp"
#include "klab/errors.hpp"
#include "klab/experiment.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw klab::validation_error("cannot read config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Subcommand -> experiment kinds it accepts.
const std::vector<std::pair<std::string, std::vector<std::string>>> kCommands = {
    {"betti", {"betti"}},
    {"cover", {"cover"}},
    {"lueck", {"lueck-matrix", "lueck-betti"}},
    {"hodge", {"hodge-measure"}},
    {"limit", {"limit-measure"}},
    {"curve", {"curve-density", "curve-mass"}},
    {"disk", {"disk"}},
};

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool no_cache = false;
};

int run_experiment(const Options& opt, const std::vector<std::string>& kinds) {
  klab::experiment::Config config =
      klab::experiment::config_from_json(slurp(opt.config_path));
  bool kind_ok = false;
  for (const auto& k : kinds) kind_ok = kind_ok || k == config.kind;
  if (!kind_ok)
    throw klab::validation_error("config kind '" + config.kind +
                                 "' does not belong to this subcommand");
  // Flag overrides change the effective config (and therefore its hash).
  if (opt.seed_set) config.seed = opt.seed;
  if (opt.threads > 0) config.threads = opt.threads;

  auto rec = klab::experiment::run(config, opt.out_dir, !opt.no_cache);
  std::printf("%s %s seed %llu%s -> %s/%s-%s.json\n", rec.kind.c_str(),
              rec.config_hash.c_str(), static_cast<unsigned long long>(rec.seed),
              rec.cache_hit ? " (cache hit)" : "", opt.out_dir.c_str(),
              rec.kind.c_str(), rec.config_hash.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"canonical-measure and L2-approximation lab"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--config", opt.config_path, "experiment config JSON file");
  app.add_option("--out", opt.out_dir, "output directory (default: out)");
  auto* seed_opt = app.add_option("--seed", opt.seed, "override the config seed");
  app.add_option("--threads", opt.threads, "override the config thread count")
      ->check(CLI::Range(1, 256));
  app.add_flag("--no-cache", opt.no_cache, "recompute even when cached");

  for (const auto& [name, kinds] : kCommands)
    app.add_subcommand(name, "run a " + kinds.front() +
                                 (kinds.size() > 1 ? " / " + kinds[1] : "") +
                                 " experiment")
        ->fallthrough();  // global flags may follow the subcommand

  auto* accept = app.add_subcommand("accept", "run the acceptance suite");
  bool full = false;
  std::string verdict_path;
  accept->add_flag("--full", full, "include the curve-mass integration criterion");
  accept->add_option("--json", verdict_path, "write the JSON verdict here");

  try {
    app.parse(argc, argv);

    if (accept->parsed()) {
      auto rep = klab::acceptance::run_suite(full ? "full" : "fast");
      for (const auto& r : rep.results) {
        bool ok = r.passed && r.within_budget;
        std::printf("[%s] %d %-24s %7.2fs / %gs  %s\n", ok ? "PASS" : "FAIL",
                    r.id, r.name.c_str(), r.seconds, r.budget_seconds,
                    r.detail.c_str());
      }
      if (!verdict_path.empty()) {
        std::ofstream out(verdict_path, std::ios::binary | std::ios::trunc);
        out << klab::acceptance::report_json(rep);
        if (!out) {
          std::fprintf(stderr, "error: failed to write %s\n", verdict_path.c_str());
          return 3;
        }
      }
      return rep.all_passed ? 0 : 4;
    }

    for (const auto& [name, kinds] : kCommands)
      if (app.get_subcommand(name)->parsed()) {
        if (opt.config_path.empty())
          throw klab::validation_error("--config is required for this subcommand");
        opt.seed_set = seed_opt->count() > 0;
        return run_experiment(opt, kinds);
      }
    return 2;  // unreachable: a subcommand is required
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit 0; usage errors are 2
  } catch (const klab::resource_error& e) {
    std::fprintf(stderr, "resource error: %s\n", e.what());
    return 3;
  } catch (const klab::validation_error& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const klab::precision_error& e) {
    // Requested tolerance unreachable with the given parameters: a usage
    // problem, reported like one.
    std::fprintf(stderr, "precision error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  }
}
