// blockswap: sample, score and select mixed-blocktype networks, distil the
// pick from a teacher, and run the ablation studies. See README.md.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blockswap/block_calculus.hpp"
#include "blockswap/errors.hpp"
#include "blockswap/experiment.hpp"

namespace bs = blockswap;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> settings;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
};

bs::ExperimentConfig resolve(const Options& o) {
  bs::ExperimentConfig cfg = o.config_path.empty() ? bs::ExperimentConfig{} : bs::load_config(o.config_path);
  for (const auto& s : o.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw bs::ConfigError("--set expects key=value, got '" + s + "'");
    bs::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (!o.out.empty()) cfg.out = o.out;
  if (cfg.out.empty()) {
    const char* env = std::getenv("BLOCKSWAP_OUT");
    cfg.out = env && *env ? env : ".";
  }
  cfg.validate();
  fs::create_directories(cfg.out);
  return cfg;
}

std::string out_path(const bs::ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out) / name).string();
}

bs::Network* teacher_ptr(std::optional<bs::Network>& t) { return t ? &*t : nullptr; }

void cmd_sample(const bs::ExperimentConfig& cfg) {
  const auto configs = bs::load_or_sample_candidates(cfg);
  std::ofstream out(out_path(cfg, "samples.txt"), std::ios::binary | std::ios::trunc);
  for (const auto& c : configs) out << c.to_string() << '\n';
  if (!out) throw std::runtime_error("cannot write samples.txt");
  std::cout << "sampled " << configs.size() << " configs under " << cfg.resolved_budget() << " params\n";
}

void cmd_score(const bs::ExperimentConfig& cfg) {
  const auto data = bs::load_data(cfg);
  const auto scores = bs::score_candidates(cfg, bs::load_or_sample_candidates(cfg), data.train);
  bs::write_candidates_csv(out_path(cfg, "candidates.csv"), scores);
  std::cout << "scored " << scores.size() << " candidates with " << bs::metric_name(cfg.metric) << '\n';
}

void cmd_search(const bs::ExperimentConfig& cfg) {
  const auto data = bs::load_data(cfg);
  const auto result = bs::run_search(cfg, data);
  bs::write_candidates_csv(out_path(cfg, "candidates.csv"), result.scores);
  bs::write_chosen_json(out_path(cfg, "chosen.json"), result, cfg);
  const auto& c = result.scores[result.chosen];
  std::cout << "chosen " << c.config << " params=" << c.params << " macs=" << c.macs << ' ' << c.metric << '='
            << bs::format_real(c.value) << '\n';
}

void cmd_distill(const bs::ExperimentConfig& cfg) {
  const std::string tokens = cfg.student.empty() ? bs::read_chosen_config(out_path(cfg, "chosen.json")) : cfg.student;
  bs::NetworkConfig config;
  try {
    config = bs::NetworkConfig::parse(cfg.depth, cfg.width, cfg.classes, tokens);
  } catch (const std::invalid_argument& e) {
    throw bs::ConfigError(std::string("student: ") + e.what());
  }
  const auto data = bs::load_data(cfg);
  auto teacher = bs::load_teacher(cfg);
  bs::Network student = bs::make_candidate(cfg, config, 0);
  const auto history = bs::train_or_throw(student, teacher_ptr(teacher), data, cfg, "student");
  bs::write_history_csv(out_path(cfg, "history.csv"), history);
  bs::save_checkpoint(student, out_path(cfg, "student.ckpt"));
  std::cout << (teacher ? "distilled " : "trained ") << config.to_string() << " eval_error "
            << bs::format_real(history.initial_eval_error) << " -> "
            << bs::format_real(history.epochs.back().eval_error) << '\n';
}

void cmd_correlate(const bs::ExperimentConfig& cfg) {
  const auto data = bs::load_data(cfg);
  auto teacher = bs::load_teacher(cfg);
  const auto report = bs::run_correlate(cfg, data, teacher_ptr(teacher));
  bs::write_correlation_csv(out_path(cfg, "correlation.csv"), report);
  bs::write_correlation_runs_csv(out_path(cfg, "correlation_runs.csv"), report);
  std::ifstream table(out_path(cfg, "correlation.csv"));
  std::cout << table.rdbuf();
}

void cmd_sensitivity(const bs::ExperimentConfig& cfg) {
  const auto data = bs::load_data(cfg);
  auto teacher = bs::load_teacher(cfg);
  bs::write_sensitivity_csv(out_path(cfg, "sensitivity.csv"), bs::run_sensitivity(cfg, data, teacher_ptr(teacher)));
  std::cout << "wrote " << out_path(cfg, "sensitivity.csv") << '\n';
}

void cmd_density(const bs::ExperimentConfig& cfg) {
  const auto data = bs::load_data(cfg);
  auto teacher = bs::load_teacher(cfg);
  bs::write_density_csv(out_path(cfg, "density.csv"), bs::run_density(cfg, data, teacher_ptr(teacher)));
  std::cout << "wrote " << out_path(cfg, "density.csv") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-blocktype network search with Fisher potential"};
  app.require_subcommand(1);
  Options opts;
  app.add_option("--config", opts.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--set", opts.settings, "override one config key (key=value), repeatable");
  app.add_option("--seed", opts.seed, "master seed");
  app.add_option("--jobs", opts.jobs, "worker threads for scoring and training");
  app.add_option("--out", opts.out, "output directory (default $BLOCKSWAP_OUT, then .)");

  struct Command {
    const char* name;
    const char* help;
    void (*run)(const bs::ExperimentConfig&);
  };
  const Command commands[] = {
      {"sample", "draw budget-satisfying candidates into samples.txt", cmd_sample},
      {"score", "score candidates into candidates.csv", cmd_score},
      {"search", "sample, score and select; writes candidates.csv and chosen.json", cmd_search},
      {"distill", "train the chosen student, with attention transfer if a teacher is set", cmd_distill},
      {"correlate", "spearman of each metric against trained error", cmd_correlate},
      {"sensitivity", "substitute G4 at one position at a time", cmd_sensitivity},
      {"density", "random budget-matched candidates plus a single-blocktype reference", cmd_density},
  };
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    // Global flags are also accepted after the subcommand name.
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const bs::ExperimentConfig cfg = resolve(opts);
    for (const auto& c : commands)
      if (app.got_subcommand(c.name)) c.run(cfg);
    return 0;
  } catch (const bs::BudgetInfeasible& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const bs::TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
