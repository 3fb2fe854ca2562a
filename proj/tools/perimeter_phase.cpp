// perimeter_phase <subcommand> --config PATH [--out DIR] [--seed N] [--quiet]

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "perimeter_phase/config.hpp"
#include "perimeter_phase/experiment.hpp"
#include "perimeter_phase/parallel.hpp"

using namespace perimeter_phase;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

int run(ExperimentKind kind, const Flags& flags) {
  nlohmann::json failure = {{"experiment", experiment_name(kind)}, {"status", "error"}};
  int code = 1;
  try {
    worker_count();
    std::ifstream in(flags.config);
    if (!in) fail(ErrorCode::io, "cannot read config " + flags.config);
    std::stringstream text;
    text << in.rdbuf();
    ExperimentConfig cfg = parse_config(text.str(), kind);
    cfg.base_dir = std::filesystem::absolute(flags.config).parent_path();
    RunOptions opt;
    opt.out_dir = flags.out.empty() ? std::filesystem::path(cfg.out) : std::filesystem::path(flags.out);
    if (opt.out_dir.is_relative() && flags.out.empty()) opt.out_dir = cfg.base_dir / opt.out_dir;
    opt.quiet = flags.quiet;
    opt.seed = flags.seed;
    const RunOutcome outcome = run_experiment(cfg, opt);
    if (!flags.quiet) std::cout << outcome.summary.dump(2) << '\n';
    else if (outcome.exit_code != 0) std::cerr << outcome.summary.at("status").get<std::string>() << '\n';
    return outcome.exit_code;
  } catch (const Error& e) {
    failure["error"] = error_json(e);
    code = exit_code_for(e.code());
  } catch (const std::exception& e) {
    failure["error"] = error_json(e);
  }
  std::cerr << failure.dump(2) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field perimeter experiments"};
  app.require_subcommand(1);
  Flags flags;
  std::optional<ExperimentKind> chosen;
  for (auto kind : {ExperimentKind::profile, ExperimentKind::energy, ExperimentKind::recovery, ExperimentKind::glue,
                    ExperimentKind::barrier, ExperimentKind::minimize, ExperimentKind::sweep,
                    ExperimentKind::oracle1d, ExperimentKind::harmonic_check}) {
    auto* sub = app.add_subcommand(std::string(experiment_name(kind)));
    sub->add_option("--config", flags.config, "experiment configuration (JSON)")->required();
    sub->add_option("--out", flags.out, "output directory (overrides \"out\" in the config)");
    sub->add_option("--seed", flags.seed, "random seed (overrides \"seed\" in the config)");
    sub->add_flag("--quiet", flags.quiet, "no progress or summary output");
    sub->callback([&chosen, kind] { chosen = kind; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  return run(*chosen, flags);
}
