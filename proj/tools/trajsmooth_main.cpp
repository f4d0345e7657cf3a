// Command-line entry points: gen, train, eval, sweep, report.
// Exit codes: 0 success, 2 usage, 3 data/validation, 4 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "trajsmooth/checkpoint.hpp"
#include "trajsmooth/errors.hpp"
#include "trajsmooth/generators.hpp"
#include "trajsmooth/report.hpp"
#include "trajsmooth/track_io.hpp"
#include "trajsmooth/training.hpp"

namespace fs = std::filesystem;
using namespace trajsmooth;

namespace {

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("bad number in list: '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const double v : parse_double_list(text)) out.push_back(static_cast<int>(v));
  return out;
}

TrainConfig load_train_config(const std::string& config_path,
                              const std::map<std::string, std::string>& overrides) {
  auto kv = train_config_to_kv(TrainConfig{});
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) throw ValidationError("cannot open config file: " + config_path);
    nlohmann::json j;
    try {
      f >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("config file: " + std::string(e.what()));
    }
    if (!j.is_object()) throw ParseError("config file must be a flat JSON object");
    for (const auto& [key, val] : j.items()) {
      if (kv.count(key) == 0) throw ConfigError("unknown config key '" + key + "'");
      kv[key] = val.is_string() ? val.get<std::string>() : val.dump();
    }
  }
  for (const auto& [k, v] : overrides) kv[k] = v;
  TrainConfig cfg = train_config_from_kv(kv);
  cfg.validate();
  return cfg;
}

void write_config_echo(const TrainConfig& cfg, const fs::path& path) {
  nlohmann::json j;
  for (const auto& [k, v] : train_config_to_kv(cfg)) j[k] = v;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path.string());
  out << j.dump(2) << "\n";
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string config_hash(const TrainConfig& cfg) {
  std::string canonical;
  for (const auto& [k, v] : train_config_to_kv(cfg)) canonical += k + "=" + v + ";";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
  return buf;
}

void write_train_log(const std::vector<EpochStats>& history, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path.string());
  out << "epoch,nll,kl,smooth,total,wall_s\n";
  char buf[160];
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& e = history[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g,%.12g,%.6f\n", i, e.nll, e.kl,
                  e.smooth, e.total, e.wall_seconds);
    out << buf;
  }
}

SceneSet load_data(const std::string& tracks, const std::string& gaps, double dt) {
  if (gaps.empty()) return load_tracks(tracks, dt);
  return load_tracks(tracks, gaps, dt);
}

DataSplit make_split(const SceneSet& data, const std::string& method, double train_frac,
                     double val_frac, double test_frac, std::uint64_t seed) {
  if (method == "critical") return split_critical(data, test_frac);
  return split_random(data, train_frac, val_frac, test_frac, seed);
}

// ---- gen ----

struct GenArgs {
  std::string kind;
  std::string out;
  int scenes = 0;  // 0 = kind default
  std::uint64_t seed = 1;
  int frames = 40;
  double dt = 0.5;
  UrbanConfig urban;
  GapConfig gap;
};

int run_gen(const GenArgs& args) {
  fs::create_directories(args.out);
  SceneSet set;
  if (args.kind == "urban") {
    UrbanConfig cfg = args.urban;
    cfg.scenes = args.scenes > 0 ? args.scenes : cfg.scenes;
    cfg.frames = args.frames;
    cfg.dt = args.dt;
    set = generate_urban(cfg, args.seed);
  } else {
    GapConfig cfg = args.gap;
    cfg.scenes = args.scenes > 0 ? args.scenes : cfg.scenes;
    cfg.frames = args.frames;
    cfg.dt = args.dt;
    set = generate_gap(cfg, args.seed);
    save_gaps(set, fs::path(args.out) / "gaps.csv");
  }
  save_tracks(set, fs::path(args.out) / "tracks.csv");
  std::cout << "wrote " << set.scenes.size() << " scenes to " << args.out << "\n";
  return 0;
}

// ---- train ----

struct TrainArgs {
  std::string tracks, gaps, config_path, out;
  std::string split = "random";
  double train_frac = 0.7, val_frac = 0.1, test_frac = 0.2;
  std::map<std::string, std::string> overrides;
};

int run_train(const TrainArgs& args) {
  const TrainConfig cfg = load_train_config(args.config_path, args.overrides);
  const SceneSet data = load_data(args.tracks, args.gaps, cfg.model.dt);
  const DataSplit split = make_split(data, args.split, args.train_frac, args.val_frac,
                                     args.test_frac, cfg.seed);
  const TrainResult result = train(cfg, data, split);

  fs::create_directories(args.out);
  save_checkpoint(make_checkpoint(cfg, result), fs::path(args.out) / "checkpoint.txt");
  write_train_log(result.history, fs::path(args.out) / "train_log.csv");
  write_config_echo(cfg, fs::path(args.out) / "config.json");
  std::cout << "trained " << cfg.epochs << " epochs; final val loss "
            << result.final_val_loss << "\n";
  return 0;
}

// ---- eval ----

struct EvalArgs {
  std::string checkpoint, tracks, gaps, out;
  std::string split = "random";
  std::string horizons = "1,2,3,4";
  std::string model_tag = "model";
  double train_frac = 0.7, val_frac = 0.1, test_frac = 0.2;
  std::uint64_t eval_seed = 0;
  int kde_samples = 0;  // 0 = from checkpoint
  bool standardized_units = false;
};

int run_eval(const EvalArgs& args) {
  const Checkpoint ckpt = load_checkpoint(args.checkpoint);
  const SceneSet data = load_data(args.tracks, args.gaps, ckpt.config.model.dt);
  const DataSplit split = make_split(data, args.split, args.train_frac, args.val_frac,
                                     args.test_frac, ckpt.config.seed);
  Model model(ckpt.config.model, ckpt.params);

  EvalOptions opts;
  opts.model_tag = args.model_tag;
  opts.beta = ckpt.config.loss.beta;
  opts.split_name = args.split;
  opts.seed = args.eval_seed;
  opts.horizons_s = parse_double_list(args.horizons);
  opts.kde_samples = args.kde_samples > 0 ? args.kde_samples : ckpt.config.kde_samples;
  opts.sample_stride = ckpt.config.sample_stride;
  opts.standardized_units = args.standardized_units;

  const ModelPredictor predictor(model);
  const MetricsTable table = evaluate(predictor, ckpt.config.model, ckpt.standardizer, data,
                                      split.test, opts);
  if (fs::path(args.out).has_parent_path()) {
    fs::create_directories(fs::path(args.out).parent_path());
  }
  save_results(table, args.out);
  std::cout << "wrote " << table.rows.size() << " metric rows to " << args.out << "\n";
  return 0;
}

// ---- sweep ----

struct SweepArgs {
  std::string tracks, gaps, config_path, out;
  std::string betas = "0,0.01,0.1,0.5,1.0,10";
  std::string splits = "random,critical";
  std::string n_inputs = "2,10";
  std::string seeds = "1,2,3";
  std::string horizons = "1,2,3,4";
  double train_frac = 0.7, val_frac = 0.1, test_frac = 0.2;
  std::map<std::string, std::string> overrides;
};

int run_sweep(const SweepArgs& args) {
  const TrainConfig base = load_train_config(args.config_path, args.overrides);
  const std::vector<double> betas = parse_double_list(args.betas);
  const std::vector<int> n_inputs = parse_int_list(args.n_inputs);
  const std::vector<int> seeds = parse_int_list(args.seeds);
  std::vector<std::string> splits;
  {
    std::stringstream ss(args.splits);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      split_method_from_string(item);  // validates
      splits.push_back(item);
    }
    if (splits.empty()) throw ConfigError("empty split list");
  }

  const SceneSet data = load_data(args.tracks, args.gaps, base.model.dt);
  fs::create_directories(args.out);

  MetricsTable merged;
  for (const double beta : betas) {
    for (const std::string& split_name : splits) {
      for (const int n_input : n_inputs) {
        for (const int seed : seeds) {
          TrainConfig cfg = base;
          cfg.loss.beta = beta;
          cfg.model.input_steps = n_input;
          cfg.seed = static_cast<std::uint64_t>(seed);
          cfg.validate();

          char cell_name[128];
          std::snprintf(cell_name, sizeof(cell_name), "beta%g_%s_nI%d_seed%d", beta,
                        split_name.c_str(), n_input, seed);
          const fs::path cell_dir = fs::path(args.out) / cell_name;
          const fs::path results_path = cell_dir / "results.csv";
          const fs::path hash_path = cell_dir / "config_hash.txt";
          const std::string hash = config_hash(cfg);

          if (fs::exists(results_path)) {
            std::string stored;
            std::ifstream hf(hash_path);
            if (hf) hf >> stored;
            if (stored != hash) {
              throw ValidationError(
                  "cell " + std::string(cell_name) +
                  " holds results for a different config (hash mismatch); remove the cell "
                  "directory or the sweep output to regenerate");
            }
            std::cout << "cell " << cell_name << ": already complete, skipping\n";
          } else {
            std::cout << "cell " << cell_name << ": training\n";
            fs::create_directories(cell_dir);
            const DataSplit split = make_split(data, split_name, args.train_frac,
                                               args.val_frac, args.test_frac, cfg.seed);
            const TrainResult result = train(cfg, data, split);
            save_checkpoint(make_checkpoint(cfg, result), cell_dir / "checkpoint.txt");
            write_train_log(result.history, cell_dir / "train_log.csv");
            write_config_echo(cfg, cell_dir / "config.json");

            EvalOptions opts;
            opts.model_tag = "nI" + std::to_string(n_input);
            opts.beta = beta;
            opts.split_name = split_name;
            opts.seed = cfg.seed;
            opts.horizons_s = parse_double_list(args.horizons);
            opts.kde_samples = cfg.kde_samples;
            opts.sample_stride = cfg.sample_stride;
            const ModelPredictor predictor(result.model);
            const MetricsTable table = evaluate(predictor, cfg.model, result.standardizer,
                                                data, split.test, opts);
            save_results(table, results_path);
            std::ofstream hf(hash_path, std::ios::binary);
            hf << hash << "\n";
          }

          // merged table keeps the all-classes rows only, one per grid key
          const MetricsTable cell = load_results(results_path);
          for (const auto& row : cell.rows) {
            if (row.model.find(':') == std::string::npos) merged.append(row);
          }
        }
      }
    }
  }
  save_results(merged, fs::path(args.out) / "merged.csv");
  std::cout << "sweep complete: " << merged.rows.size() << " merged rows\n";
  return 0;
}

// ---- report ----

struct ReportArgs {
  std::string results, out;
};

int run_report(const ReportArgs& args) {
  fs::path path = args.results;
  if (fs::is_directory(path)) path /= "merged.csv";
  const MetricsTable merged = load_results(path);
  if (merged.rows.empty()) throw ValidationError("no result rows in " + path.string());
  write_report(merged, args.out);
  std::cout << "wrote report to " << args.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale multi-agent trajectory forecaster with smooth attention"};
  app.require_subcommand(1);

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "generate synthetic scenes");
  gen->add_option("--kind", gen_args.kind, "scenario kind")
      ->required()
      ->check(CLI::IsMember({"urban", "gap"}));
  gen->add_option("--out", gen_args.out, "output directory")->required();
  gen->add_option("--scenes", gen_args.scenes, "number of scenes");
  gen->add_option("--seed", gen_args.seed, "generator seed");
  gen->add_option("--frames", gen_args.frames, "frames per scene");
  gen->add_option("--dt", gen_args.dt, "frame period in seconds");
  gen->add_option("--vehicles", gen_args.urban.vehicles, "urban: vehicles per scene");
  gen->add_option("--pedestrians", gen_args.urban.pedestrians, "urban: pedestrians per scene");
  gen->add_option("--interaction-radius", gen_args.urban.interaction_radius,
                  "urban: braking radius");
  gen->add_option("--cross-prob", gen_args.urban.cross_prob, "urban: crossing probability");
  gen->add_option("--gap-min", gen_args.gap.gap_min, "gap: smallest gap (m)");
  gen->add_option("--gap-max", gen_args.gap.gap_max, "gap: largest gap (m)");
  gen->add_option("--decision-noise", gen_args.gap.decision_noise, "gap: threshold noise (m)");
  gen->add_option("--decision-frame", gen_args.gap.decision_frame, "gap: decision frame");

  TrainArgs train_args;
  CLI::App* trn = app.add_subcommand("train", "train a model");
  trn->add_option("--tracks", train_args.tracks, "track CSV")->required();
  trn->add_option("--gaps", train_args.gaps, "gap metadata CSV");
  trn->add_option("--config", train_args.config_path, "JSON config file");
  trn->add_option("--out", train_args.out, "output directory")->required();
  trn->add_option("--split", train_args.split, "split method")
      ->check(CLI::IsMember({"random", "critical"}));
  trn->add_option("--train-frac", train_args.train_frac, "random split: train fraction");
  trn->add_option("--val-frac", train_args.val_frac, "random split: val fraction");
  trn->add_option("--test-frac", train_args.test_frac, "test fraction");

  EvalArgs eval_args;
  CLI::App* evl = app.add_subcommand("eval", "evaluate a checkpoint");
  evl->add_option("--checkpoint", eval_args.checkpoint, "checkpoint file")->required();
  evl->add_option("--tracks", eval_args.tracks, "track CSV")->required();
  evl->add_option("--gaps", eval_args.gaps, "gap metadata CSV");
  evl->add_option("--out", eval_args.out, "results CSV path")->required();
  evl->add_option("--split", eval_args.split, "split method")
      ->check(CLI::IsMember({"random", "critical"}));
  evl->add_option("--horizons", eval_args.horizons, "horizons in seconds, comma-separated");
  evl->add_option("--model-tag", eval_args.model_tag, "model column value");
  evl->add_option("--train-frac", eval_args.train_frac, "random split: train fraction");
  evl->add_option("--val-frac", eval_args.val_frac, "random split: val fraction");
  evl->add_option("--test-frac", eval_args.test_frac, "test fraction");
  evl->add_option("--eval-seed", eval_args.eval_seed, "sampling seed");
  evl->add_option("--kde-samples", eval_args.kde_samples, "trajectory samples per agent");
  evl->add_flag("--standardized-units", eval_args.standardized_units,
                "report errors in standardized units");

  SweepArgs sweep_args;
  CLI::App* swp = app.add_subcommand("sweep", "train and evaluate a beta grid");
  swp->add_option("--tracks", sweep_args.tracks, "track CSV")->required();
  swp->add_option("--gaps", sweep_args.gaps, "gap metadata CSV");
  swp->add_option("--config", sweep_args.config_path, "JSON config file");
  swp->add_option("--out", sweep_args.out, "output directory")->required();
  swp->add_option("--betas", sweep_args.betas, "comma-separated beta values");
  swp->add_option("--splits", sweep_args.splits, "comma-separated split methods");
  swp->add_option("--n-inputs", sweep_args.n_inputs, "comma-separated input step counts");
  swp->add_option("--seeds", sweep_args.seeds, "comma-separated seeds");
  swp->add_option("--horizons", sweep_args.horizons, "horizons in seconds");
  swp->add_option("--train-frac", sweep_args.train_frac, "random split: train fraction");
  swp->add_option("--val-frac", sweep_args.val_frac, "random split: val fraction");
  swp->add_option("--test-frac", sweep_args.test_frac, "test fraction");

  ReportArgs report_args;
  CLI::App* rep = app.add_subcommand("report", "render tables and plots from sweep results");
  rep->add_option("--results", report_args.results, "merged.csv or the sweep directory")
      ->required();
  rep->add_option("--out", report_args.out, "output directory")->required();

  // every config key gets a flag override on train and sweep
  for (const auto& [key, unused] : train_config_to_kv(TrainConfig{})) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    const std::string k = key;
    trn->add_option_function<std::string>(
        flag, [&train_args, k](const std::string& v) { train_args.overrides[k] = v; },
        "override config key " + key);
    swp->add_option_function<std::string>(
        flag, [&sweep_args, k](const std::string& v) { sweep_args.overrides[k] = v; },
        "override config key " + key);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return run_gen(gen_args);
    if (trn->parsed()) return run_train(train_args);
    if (evl->parsed()) return run_eval(eval_args);
    if (swp->parsed()) return run_sweep(sweep_args);
    if (rep->parsed()) return run_report(report_args);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
