#include "blockswap/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "blockswap/block_calculus.hpp"
#include "blockswap/errors.hpp"
#include "blockswap/random.hpp"
#include "blockswap/sampler.hpp"

namespace blockswap {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  std::istringstream in(value);
  in >> out;
  if (!in || !in.eof()) throw ConfigError("config: '" + key + "' expects a number, got '" + value + "'");
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

// ---- Config ------------------------------------------------------------------

std::int64_t ExperimentConfig::resolved_budget() const {
  const std::int64_t full = config_params(skeleton());
  if (budget_fraction > 0) return static_cast<std::int64_t>(std::floor(budget_fraction * static_cast<double>(full)));
  return budget > 0 ? budget : full;
}

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  need(depth >= 10 && (depth - 4) % 6 == 0, "depth must be 6n + 4 with n >= 1");
  need(width >= 1, "width must be >= 1");
  need(classes >= 2, "classes must be >= 2");
  need(budget >= 0, "budget must be >= 0");
  need(budget_fraction >= 0 && budget_fraction <= 1, "budget fraction must lie in [0, 1]");
  need(num_samples >= 1, "num_samples must be >= 1");
  need(minibatches >= 1, "minibatches must be >= 1");
  need(dataset == "synthetic" || dataset == "cifar", "dataset must be 'synthetic' or 'cifar'");
  if (dataset == "cifar") need(!cifar_train.empty() && !cifar_eval.empty(), "cifar needs cifar_train and cifar_eval");
  if (dataset == "synthetic") need(synthetic.classes == classes, "synthetic_classes must equal classes");
  need(jobs >= 1, "jobs must be >= 1");
  for (float s : norm.std) need(s > 0, "norm_std entries must be positive");
  try {
    recipe.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  auto integer = [&] { return parse_number<long long>(key, value); };
  auto real = [&] { return parse_number<double>(key, value); };
  auto triple = [&] {
    const auto parts = split_list(value);
    if (parts.size() != 3) throw ConfigError("config: '" + key + "' expects three comma-separated numbers");
    std::array<float, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) out[i] = static_cast<float>(parse_number<double>(key, parts[i]));
    return out;
  };
  if (key == "depth") cfg.depth = static_cast<int>(integer());
  else if (key == "width") cfg.width = static_cast<int>(integer());
  else if (key == "classes") {
    cfg.classes = static_cast<int>(integer());
    cfg.synthetic.classes = cfg.classes;
  } else if (key == "budget") {
    if (!value.empty() && value.back() == '%') {
      cfg.budget_fraction = parse_number<double>(key, trim(value.substr(0, value.size() - 1))) / 100.0;
      cfg.budget = 0;
    } else {
      cfg.budget = integer();
      cfg.budget_fraction = 0;
    }
  } else if (key == "num_samples") cfg.num_samples = static_cast<int>(integer());
  else if (key == "metric") {
    try {
      cfg.metric = parse_metric(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  } else if (key == "minibatches") cfg.minibatches = static_cast<int>(integer());
  else if (key == "dataset") cfg.dataset = value;
  else if (key == "cifar_train") cfg.cifar_train = split_list(value);
  else if (key == "cifar_eval") cfg.cifar_eval = split_list(value);
  else if (key == "norm_mean") cfg.norm.mean = triple();
  else if (key == "norm_std") cfg.norm.std = triple();
  else if (key == "synthetic_classes") cfg.synthetic.classes = static_cast<int>(integer());
  else if (key == "synthetic_size") cfg.synthetic.image_size = static_cast<int>(integer());
  else if (key == "synthetic_train") cfg.synthetic.train_count = static_cast<int>(integer());
  else if (key == "synthetic_eval") cfg.synthetic.eval_count = static_cast<int>(integer());
  else if (key == "synthetic_seed") {
    cfg.synthetic.seed = static_cast<std::uint64_t>(integer());
    cfg.synthetic_seed_set = true;
  } else if (key == "epochs") cfg.recipe.epochs = static_cast<int>(integer());
  else if (key == "batch_size") cfg.recipe.batch_size = static_cast<int>(integer());
  else if (key == "lr0") cfg.recipe.lr0 = real();
  else if (key == "momentum") cfg.recipe.momentum = real();
  else if (key == "weight_decay") cfg.recipe.weight_decay = real();
  else if (key == "beta") cfg.recipe.beta = real();
  else if (key == "teacher") cfg.teacher = value;
  else if (key == "student") cfg.student = value;
  else if (key == "candidates") cfg.candidates = value;
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(integer());
  else if (key == "jobs") cfg.jobs = static_cast<int>(integer());
  else if (key == "out") cfg.out = value;
  else throw ConfigError("config: unknown key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> seen;
  for (int number = 1; std::getline(in, line); ++number) {
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw ConfigError("config line " + std::to_string(number) + ": '" + key + "' set twice");
    seen.push_back(key);
    apply_setting(cfg, key, line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::uint64_t stream_seed(std::uint64_t master, SeedStream stream) {
  return derive_seed(master, 0xb10c0000ULL + static_cast<std::uint64_t>(stream));
}

std::uint64_t init_seed(std::uint64_t master, std::size_t index) {
  return derive_seed(stream_seed(master, SeedStream::kInit), index);
}

DataSplits load_data(const ExperimentConfig& cfg) {
  if (cfg.dataset == "cifar")
    return {load_cifar_binary(cfg.cifar_train, cfg.norm, Split::kTrain),
            load_cifar_binary(cfg.cifar_eval, cfg.norm, Split::kEval)};
  SyntheticSpec spec = cfg.synthetic;
  if (!cfg.synthetic_seed_set) spec.seed = stream_seed(cfg.seed, SeedStream::kData);
  auto d = make_synthetic(spec);
  return {std::move(d.train), std::move(d.eval)};
}

// ---- Parallel helper -----------------------------------------------------------

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, jobs));
  if (threads == 1 || n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---- Search --------------------------------------------------------------------

std::vector<NetworkConfig> load_or_sample_candidates(const ExperimentConfig& cfg) {
  if (cfg.candidates.empty())
    return sample_candidates(cfg.skeleton(), {cfg.resolved_budget(), cfg.num_samples, cfg.seed});
  std::ifstream in(cfg.candidates);
  if (!in) throw ConfigError("cannot read candidates file " + cfg.candidates);
  std::vector<NetworkConfig> out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    try {
      out.push_back(NetworkConfig::parse(cfg.depth, cfg.width, cfg.classes, line));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("candidates file " + cfg.candidates + ": " + e.what());
    }
  }
  if (out.empty()) throw ConfigError("candidates file " + cfg.candidates + " holds no configs");
  return out;
}

Network make_candidate(const ExperimentConfig& cfg, const NetworkConfig& config, std::size_t index) {
  Rng rng(init_seed(cfg.seed, index));
  return Network(config, rng);
}

std::vector<CandidateScore> score_candidates(const ExperimentConfig& cfg, const std::vector<NetworkConfig>& candidates,
                                             const Dataset& train_set) {
  const std::uint64_t data_seed = stream_seed(cfg.seed, SeedStream::kScoringData);
  const Batch batch = scoring_batch(train_set, cfg.recipe.batch_size, data_seed);
  std::vector<CandidateScore> scores(candidates.size());
  parallel_for(candidates.size(), cfg.jobs, [&](std::size_t i) {
    Network net = make_candidate(cfg, candidates[i], i);
    CandidateScore& s = scores[i];
    s.candidate = static_cast<int>(i);
    s.config = candidates[i].to_string();
    s.params = config_params(candidates[i]);
    s.macs = config_macs(candidates[i], cfg.image_size());
    s.metric = metric_name(cfg.metric);
    s.minibatches = cfg.minibatches;
    if (cfg.metric == Metric::kFisher && cfg.minibatches == 1)
      s.value = fisher_potential(net, batch).potential;
    else
      s.value = measure_metrics(net, train_set, {cfg.minibatches}, cfg.recipe, data_seed).of(cfg.metric).front();
  });
  assign_ranks(scores);
  return scores;
}

SearchResult run_search(const ExperimentConfig& cfg, const DataSplits& data) {
  SearchResult r;
  r.scores = score_candidates(cfg, load_or_sample_candidates(cfg), data.train);
  r.chosen = select_best(r.scores);
  return r;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_candidates_csv(const std::string& path, const std::vector<CandidateScore>& scores) {
  auto out = open_out(path);
  out << "candidate,config,params,macs,metric,minibatches,value,rank\n";
  for (const auto& s : scores)
    out << s.candidate << ",\"" << s.config << "\"," << s.params << ',' << s.macs << ',' << s.metric << ','
        << s.minibatches << ',' << format_real(s.value) << ',' << s.rank << '\n';
}

void write_chosen_json(const std::string& path, const SearchResult& result, const ExperimentConfig& cfg) {
  const CandidateScore& c = result.scores.at(result.chosen);
  nlohmann::ordered_json j;
  j["config"] = c.config;
  j["params"] = c.params;
  j["macs"] = c.macs;
  j["potential"] = c.value;
  j["metric"] = c.metric;
  j["minibatches"] = c.minibatches;
  j["candidate"] = c.candidate;
  j["seed"] = cfg.seed;
  j["budget"] = cfg.resolved_budget();
  j["depth"] = cfg.depth;
  j["width"] = cfg.width;
  j["classes"] = cfg.classes;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::string read_chosen_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path + " (set 'student' or run search first)");
  try {
    return nlohmann::json::parse(in).at("config").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---- Training ------------------------------------------------------------------

std::optional<Network> load_teacher(const ExperimentConfig& cfg) {
  if (cfg.teacher.empty()) return std::nullopt;
  Rng rng(0);
  Network teacher(cfg.skeleton(), rng);
  load_checkpoint(teacher, cfg.teacher);
  return teacher;
}

TrainHistory train_or_throw(Network& net, Network* teacher, const DataSplits& data, const ExperimentConfig& cfg,
                            const std::string& label) {
  TrainRecipe recipe = cfg.recipe;
  recipe.seed = stream_seed(cfg.seed, SeedStream::kTrainOrder);
  TrainHistory h = train(net, teacher, data.train, data.eval, recipe);
  if (h.diverged) throw TrainingDiverged(label + " diverged at " + h.divergence);
  return h;
}

std::vector<TrainedCandidate> train_candidates(const ExperimentConfig& cfg, const std::vector<NetworkConfig>& configs,
                                               const DataSplits& data, Network* teacher, std::size_t first_index) {
  std::vector<TrainedCandidate> out(configs.size());
  parallel_for(configs.size(), cfg.jobs, [&](std::size_t i) {
    const std::size_t index = first_index + i;
    Network net = make_candidate(cfg, configs[i], index);
    const TrainHistory h = train_or_throw(net, teacher, data, cfg, "candidate " + std::to_string(index));
    out[i] = {index, "random", configs[i], config_params(configs[i]), h.epochs.back().eval_error};
  });
  return out;
}

void write_history_csv(const std::string& path, const TrainHistory& history) {
  auto out = open_out(path);
  out << "epoch,lr,train_loss,eval_error\n";
  for (const auto& e : history.epochs)
    out << e.epoch << ',' << format_real(e.lr) << ',' << format_real(e.train_loss) << ',' << format_real(e.eval_error)
        << '\n';
}

// ---- Ablations -----------------------------------------------------------------

CorrelationReport run_correlate(const ExperimentConfig& cfg, const DataSplits& data, Network* teacher,
                                const std::vector<int>& steps) {
  if (cfg.num_samples < 10) throw ConfigError("correlate needs num_samples >= 10");
  CorrelationReport r;
  r.steps = steps;
  r.configs = load_or_sample_candidates(cfg);
  r.series.resize(r.configs.size());
  const std::uint64_t data_seed = stream_seed(cfg.seed, SeedStream::kScoringData);
  parallel_for(r.configs.size(), cfg.jobs, [&](std::size_t i) {
    Network net = make_candidate(cfg, r.configs[i], i);
    r.series[i] = measure_metrics(net, data.train, steps, cfg.recipe, data_seed);
  });
  for (const auto& t : train_candidates(cfg, r.configs, data, teacher)) r.errors.push_back(t.final_error);
  for (Metric m : all_metrics()) {
    std::vector<double> row;
    for (std::size_t k = 0; k < r.series.front().steps.size(); ++k) {
      std::vector<double> values;
      for (const auto& s : r.series) values.push_back(s.of(m)[k]);
      row.push_back(spearman(values, r.errors));
    }
    r.table.push_back(row);
  }
  return r;
}

void write_correlation_csv(const std::string& path, const CorrelationReport& report) {
  auto out = open_out(path);
  out << "metric";
  for (int m : report.series.front().steps) out << ",m" << m;
  out << ",error_vs_error\n";
  const double sanity = spearman(report.errors, report.errors);
  for (std::size_t k = 0; k < all_metrics().size(); ++k) {
    out << metric_name(all_metrics()[k]);
    for (double v : report.table[k]) out << ',' << format_real(v);
    out << ',' << format_real(sanity) << '\n';
  }
}

void write_correlation_runs_csv(const std::string& path, const CorrelationReport& report) {
  auto out = open_out(path);
  const auto& steps = report.series.front().steps;
  out << "candidate,config,params,final_error";
  for (Metric m : all_metrics())
    for (int s : steps) out << ',' << metric_name(m) << "_m" << s;
  out << '\n';
  for (std::size_t i = 0; i < report.configs.size(); ++i) {
    out << i << ",\"" << report.configs[i].to_string() << "\"," << config_params(report.configs[i]) << ','
        << format_real(report.errors[i]);
    for (Metric m : all_metrics())
      for (double v : report.series[i].of(m)) out << ',' << format_real(v);
    out << '\n';
  }
}

std::vector<TrainedCandidate> run_sensitivity(const ExperimentConfig& cfg, const DataSplits& data, Network* teacher) {
  const NetworkConfig all_s = cfg.skeleton();
  std::vector<NetworkConfig> configs{all_s};
  for (int i = 0; i < all_s.num_blocks(); ++i) {
    try {
      configs.push_back(all_s.with_block(i, BlockDescriptor::grouped(4)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("sensitivity: G4 does not fit block " + std::to_string(i) + ": " + e.what());
    }
  }
  auto rows = train_candidates(cfg, configs, data, teacher);
  rows[0].kind = "none";
  for (std::size_t i = 1; i < rows.size(); ++i) rows[i].kind = "G4";
  return rows;
}

void write_sensitivity_csv(const std::string& path, const std::vector<TrainedCandidate>& rows) {
  auto out = open_out(path);
  out << "position,substitution,config,params,final_error\n";
  for (const auto& r : rows) {
    out << (r.kind == "none" ? std::string("none") : std::to_string(r.index - 1)) << ',' << r.kind << ",\""
        << r.config.to_string() << "\"," << r.params << ',' << format_real(r.final_error) << '\n';
  }
}

NetworkConfig single_blocktype_reference(const NetworkConfig& skeleton, std::int64_t budget) {
  std::optional<NetworkConfig> best;
  std::int64_t best_cost = -1;
  // Descriptors valid at the first position, tried at every position.
  const BlockSlot first = skeleton.slot(0);
  for (const auto& d : position_grid(first.n_in, first.n_out, first.stride)) {
    NetworkConfig c = skeleton;
    bool ok = true;
    for (int i = 0; i < c.num_blocks() && ok; ++i) {
      try {
        c = c.with_block(i, d);
      } catch (const std::invalid_argument&) {
        ok = false;
      }
    }
    if (!ok) continue;
    const std::int64_t cost = config_params(c);
    if (cost <= budget && cost > best_cost) {
      best = c;
      best_cost = cost;
    }
  }
  if (!best) throw BudgetInfeasible("no single-blocktype config fits a budget of " + std::to_string(budget));
  return *best;
}

std::vector<TrainedCandidate> run_density(const ExperimentConfig& cfg, const DataSplits& data, Network* teacher) {
  if (cfg.num_samples < 10) throw ConfigError("density needs num_samples >= 10");
  auto configs = load_or_sample_candidates(cfg);
  configs.push_back(single_blocktype_reference(cfg.skeleton(), cfg.resolved_budget()));
  auto rows = train_candidates(cfg, configs, data, teacher);
  rows.back().kind = "reference";
  return rows;
}

void write_density_csv(const std::string& path, const std::vector<TrainedCandidate>& rows) {
  auto out = open_out(path);
  out << "candidate,kind,config,params,final_error\n";
  for (const auto& r : rows)
    out << r.index << ',' << r.kind << ",\"" << r.config.to_string() << "\"," << r.params << ','
        << format_real(r.final_error) << '\n';
}

}  // namespace blockswap
