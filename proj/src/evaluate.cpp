#include <cmath>
#include <iostream>
#include <map>

#include "trajsmooth/errors.hpp"
#include "trajsmooth/generators.hpp"
#include "trajsmooth/training.hpp"

namespace trajsmooth {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t x = seed ^ (a * 0x9E3779B97F4A7C15ULL) ^ (b * 0xBF58476D1CE4E5B9ULL) ^
                    (c * 0x94D049BB133111EBULL);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

int horizon_to_steps(double horizon_s, double dt, int max_steps) {
  const double exact = horizon_s / dt;
  const int steps = static_cast<int>(std::llround(exact));
  if (std::abs(exact - steps) > 1e-9 || steps < 1) {
    throw ConfigError("horizon " + std::to_string(horizon_s) +
                      " s is not a whole number of steps at dt " + std::to_string(dt));
  }
  if (steps > max_steps) {
    throw ConfigError("horizon " + std::to_string(horizon_s) +
                      " s exceeds the model prediction horizon");
  }
  return steps;
}

Eigen::Matrix2Xd invert_positions(const Eigen::Matrix2Xd& traj, const Standardizer& st) {
  Eigen::Matrix2Xd out(2, traj.cols());
  for (Eigen::Index c = 0; c < traj.cols(); ++c) {
    out.col(c) = st.invert_position(traj.col(c));
  }
  return out;
}

struct Accumulator {
  double sum{0.0};
  long count{0};
  void add(double v) {
    sum += v;
    ++count;
  }
  double mean() const { return sum / static_cast<double>(count); }
};

}  // namespace

MetricsTable evaluate(const TrajectoryModel& model, const ModelConfig& cfg,
                      const Standardizer& standardizer, const SceneSet& data,
                      std::span<const int> test_indices, const EvalOptions& opts) {
  if (opts.horizons_s.empty()) throw ConfigError("evaluate: no horizons given");
  std::vector<int> horizon_steps;
  horizon_steps.reserve(opts.horizons_s.size());
  for (const double h : opts.horizons_s) {
    horizon_steps.push_back(horizon_to_steps(h, cfg.dt, cfg.horizon));
  }

  const SceneSet standardized = standardizer.apply(data);
  const std::vector<SampleSpec> specs =
      enumerate_samples(data, test_indices, cfg, opts.sample_stride);
  if (specs.empty()) throw ValidationError("evaluate: no evaluation samples in the test set");

  // accumulators keyed by (class filter, metric, horizon index)
  const int n_h = static_cast<int>(horizon_steps.size());
  std::map<std::string, std::vector<Accumulator>> acc_fde, acc_ade, acc_kde;
  const auto ensure = [&](std::map<std::string, std::vector<Accumulator>>& m,
                          const std::string& key) -> std::vector<Accumulator>& {
    auto it = m.find(key);
    if (it == m.end()) it = m.emplace(key, std::vector<Accumulator>(n_h)).first;
    return it->second;
  };

  for (const auto& spec : specs) {
    const Scene& orig = data.scenes.at(static_cast<std::size_t>(spec.scene_index));
    const Scene& std_scene = standardized.scenes.at(static_cast<std::size_t>(spec.scene_index));
    const ModelSample sample =
        make_model_sample(cfg, orig, std_scene, spec.focal_id, spec.t_index);

    const PredictionOutput pred = model.predict(sample);
    Eigen::Matrix2Xd point = pred.point_trajectory();
    Eigen::Matrix2Xd gt = sample.future_pos;
    if (!opts.standardized_units) {
      point = invert_positions(point, standardizer);
      gt = invert_positions(gt, standardizer);
    }

    const std::uint64_t kde_seed =
        mix_seed(opts.seed, static_cast<std::uint64_t>(spec.scene_index),
                 static_cast<std::uint64_t>(spec.focal_id),
                 static_cast<std::uint64_t>(spec.t_index));
    std::vector<Eigen::Matrix2Xd> samples = model.sample(sample, opts.kde_samples, kde_seed);
    if (!opts.standardized_units) {
      for (auto& s : samples) s = invert_positions(s, standardizer);
    }

    const std::string cls = to_string(sample.focal_class);
    for (int hi = 0; hi < n_h; ++hi) {
      const int h = horizon_steps[static_cast<std::size_t>(hi)];
      const double v_fde = fde(point, gt, h);
      const double v_ade = ade(point, gt, h);
      const double v_kde = kde_nll(samples, gt, h);
      ensure(acc_fde, "all")[static_cast<std::size_t>(hi)].add(v_fde);
      ensure(acc_ade, "all")[static_cast<std::size_t>(hi)].add(v_ade);
      ensure(acc_kde, "all")[static_cast<std::size_t>(hi)].add(v_kde);
      ensure(acc_fde, cls)[static_cast<std::size_t>(hi)].add(v_fde);
      ensure(acc_ade, cls)[static_cast<std::size_t>(hi)].add(v_ade);
      ensure(acc_kde, cls)[static_cast<std::size_t>(hi)].add(v_kde);
    }
  }

  // gap-acceptance classification over the test gap scenes
  std::vector<std::vector<double>> auc_scores(static_cast<std::size_t>(n_h));
  std::vector<std::uint8_t> auc_labels;
  bool saw_gap_scene = false;
  for (const int scene_index : test_indices) {
    const Scene& orig = data.scenes.at(static_cast<std::size_t>(scene_index));
    if (!orig.gap_meta) continue;
    saw_gap_scene = true;
    const int t_index = orig.frame_index(orig.gap_meta->decision_frame);
    const AgentTrack* ego = orig.find_track(kGapEgoAgentId);
    if (t_index < 0 || ego == nullptr ||
        !sample_is_valid(orig, *ego, t_index, cfg.input_steps, cfg.horizon)) {
      continue;
    }
    const Scene& std_scene = standardized.scenes.at(static_cast<std::size_t>(scene_index));
    const ModelSample sample =
        make_model_sample(cfg, orig, std_scene, kGapEgoAgentId, t_index);
    const std::uint64_t sd = mix_seed(opts.seed, static_cast<std::uint64_t>(scene_index),
                                      0xE60ULL, static_cast<std::uint64_t>(t_index));
    std::vector<Eigen::Matrix2Xd> samples = model.sample(sample, opts.kde_samples, sd);
    for (auto& s : samples) s = invert_positions(s, standardizer);
    for (int hi = 0; hi < n_h; ++hi) {
      auc_scores[static_cast<std::size_t>(hi)].push_back(gap_acceptance_score(
          samples, orig, horizon_steps[static_cast<std::size_t>(hi)], kGapLaneBoundaryY));
    }
    auc_labels.push_back(orig.gap_meta->accepted ? 1 : 0);
  }

  MetricsTable table;
  const bool both_classes = acc_fde.count("vehicle") != 0 && acc_fde.count("pedestrian") != 0;
  const auto emit = [&](const std::map<std::string, std::vector<Accumulator>>& acc,
                        const std::string& metric) {
    for (const auto& [cls, per_h] : acc) {
      if (cls != "all" && (!opts.per_class_rows || !both_classes)) continue;
      const std::string tag = cls == "all" ? opts.model_tag : opts.model_tag + ":" + cls;
      for (int hi = 0; hi < n_h; ++hi) {
        table.append({tag, opts.beta, opts.split_name, metric,
                      opts.horizons_s[static_cast<std::size_t>(hi)],
                      per_h[static_cast<std::size_t>(hi)].mean(), opts.seed});
      }
    }
  };
  emit(acc_fde, "fde");
  emit(acc_ade, "ade");
  emit(acc_kde, "kde_nll");

  if (!auc_labels.empty()) {
    bool has_pos = false, has_neg = false;
    for (const std::uint8_t l : auc_labels) (l != 0 ? has_pos : has_neg) = true;
    if (has_pos && has_neg) {
      for (int hi = 0; hi < n_h; ++hi) {
        table.append({opts.model_tag, opts.beta, opts.split_name, "auc",
                      opts.horizons_s[static_cast<std::size_t>(hi)],
                      auc(auc_scores[static_cast<std::size_t>(hi)], auc_labels), opts.seed});
      }
    } else {
      std::cerr << "notice: gap labels are single-class in this test set; AUC skipped\n";
    }
  } else if (!saw_gap_scene) {
    std::cerr << "notice: no gap metadata in this test set; AUC skipped\n";
  }
  return table;
}

}  // namespace trajsmooth
