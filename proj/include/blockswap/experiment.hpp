#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockswap/data_io.hpp"
#include "blockswap/distill.hpp"
#include "blockswap/network.hpp"
#include "blockswap/scoring.hpp"

namespace blockswap {

/// Bad key, value or combination in an experiment config (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  // Skeleton.
  int depth = 16;
  int width = 1;
  int classes = 10;
  // Search.
  std::int64_t budget = 0;         // absolute parameter count; 0 = all-S cost
  double budget_fraction = 0.0;    // if > 0, budget = fraction * all-S cost
  int num_samples = 100;
  Metric metric = Metric::kFisher;
  int minibatches = 1;
  // Data.
  std::string dataset = "synthetic";  // synthetic | cifar
  std::vector<std::string> cifar_train;
  std::vector<std::string> cifar_eval;
  Normalization norm = Normalization::cifar10();
  SyntheticSpec synthetic;
  bool synthetic_seed_set = false;
  // Training.
  TrainRecipe recipe;
  // Inputs for individual commands.
  std::string teacher;     // checkpoint of an all-S teacher on the same skeleton
  std::string student;     // config string; empty = read chosen.json from the output dir
  std::string candidates;  // file of config strings, one per line; empty = sample
  // Run control.
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;  // empty = BLOCKSWAP_OUT, then the working directory

  NetworkConfig skeleton() const { return NetworkConfig::skeleton(depth, width, classes); }
  std::int64_t resolved_budget() const;
  int image_size() const { return dataset == "cifar" ? kCifarSide : synthetic.image_size; }
  /// Throws ConfigError on values no command can run with.
  void validate() const;
};

/// Applies one `key = value` setting; throws ConfigError on an unknown key or bad value.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Parses flat `key = value` text with `#` comments.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Independent seed streams derived from the master seed.
enum class SeedStream : std::uint64_t { kData = 1, kScoringData = 2, kInit = 3, kTrainOrder = 4 };
std::uint64_t stream_seed(std::uint64_t master, SeedStream stream);
/// Initialisation seed of candidate `index`.
std::uint64_t init_seed(std::uint64_t master, std::size_t index);

struct DataSplits {
  Dataset train;
  Dataset eval;
};
DataSplits load_data(const ExperimentConfig& cfg);

/// Runs f(0..n-1) on up to `jobs` threads. Exceptions are rethrown after all
/// workers finish, lowest index first.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f);

std::vector<NetworkConfig> load_or_sample_candidates(const ExperimentConfig& cfg);

/// Scores every candidate with cfg.metric after cfg.minibatches steps from its
/// own initialisation. Ranks are filled in.
std::vector<CandidateScore> score_candidates(const ExperimentConfig& cfg, const std::vector<NetworkConfig>& candidates,
                                             const Dataset& train_set);

struct SearchResult {
  std::vector<CandidateScore> scores;
  std::size_t chosen = 0;  // index into scores
};
SearchResult run_search(const ExperimentConfig& cfg, const DataSplits& data);
void write_candidates_csv(const std::string& path, const std::vector<CandidateScore>& scores);
void write_chosen_json(const std::string& path, const SearchResult& result, const ExperimentConfig& cfg);
/// Config string stored in a chosen.json file.
std::string read_chosen_config(const std::string& path);

/// Fresh network for candidate `index`, initialised from its own stream.
Network make_candidate(const ExperimentConfig& cfg, const NetworkConfig& config, std::size_t index);
std::optional<Network> load_teacher(const ExperimentConfig& cfg);

/// Trains with cfg.recipe (distilling when a teacher is given); throws
/// TrainingDiverged naming `label` on a non-finite loss.
TrainHistory train_or_throw(Network& net, Network* teacher, const DataSplits& data, const ExperimentConfig& cfg,
                            const std::string& label);

struct TrainedCandidate {
  std::size_t index = 0;
  std::string kind;  // "random", "reference", ...
  NetworkConfig config;
  std::int64_t params = 0;
  double final_error = 0.0;
};
/// Trains each config in parallel (candidate i uses init_seed(seed, first_index + i)).
std::vector<TrainedCandidate> train_candidates(const ExperimentConfig& cfg, const std::vector<NetworkConfig>& configs,
                                               const DataSplits& data, Network* teacher, std::size_t first_index = 0);

struct CorrelationReport {
  std::vector<int> steps;                             // m values
  std::vector<NetworkConfig> configs;
  std::vector<double> errors;                         // final eval error per candidate
  std::vector<MetricSeries> series;                   // per candidate
  std::vector<std::vector<double>> table;             // [metric][m] spearman(metric, error)
};
CorrelationReport run_correlate(const ExperimentConfig& cfg, const DataSplits& data, Network* teacher,
                                const std::vector<int>& steps = {1, 10, 100});
void write_correlation_csv(const std::string& path, const CorrelationReport& report);
void write_correlation_runs_csv(const std::string& path, const CorrelationReport& report);

/// All-S except G(4) at one position, for every position, plus the all-S row.
std::vector<TrainedCandidate> run_sensitivity(const ExperimentConfig& cfg, const DataSplits& data, Network* teacher);
void write_sensitivity_csv(const std::string& path, const std::vector<TrainedCandidate>& rows);

/// Largest-cost single-blocktype config within the budget: the same
/// descriptor at every position, valid everywhere.
NetworkConfig single_blocktype_reference(const NetworkConfig& skeleton, std::int64_t budget);
/// K random budget-satisfying candidates and the single-blocktype reference.
std::vector<TrainedCandidate> run_density(const ExperimentConfig& cfg, const DataSplits& data, Network* teacher);
void write_density_csv(const std::string& path, const std::vector<TrainedCandidate>& rows);

void write_history_csv(const std::string& path, const TrainHistory& history);

/// Fixed-format number for CSV output.
std::string format_real(double v);

}  // namespace blockswap
