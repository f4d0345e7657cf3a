#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "trajsmooth/losses.hpp"
#include "trajsmooth/metrics.hpp"
#include "trajsmooth/model.hpp"
#include "trajsmooth/splits.hpp"

namespace trajsmooth {

struct TrainConfig {
  ModelConfig model;
  LossConfig loss;
  double learning_rate = 5e-3;
  int epochs = 30;
  int batch_size = 32;
  std::uint64_t seed = 1;
  int kde_samples = 200;
  // prediction steps are enumerated per agent with this stride (plus the gap
  // decision step when present)
  int sample_stride = 8;
  double grad_clip_norm = 0.0;  // 0 disables; 10 is the documented option
  // false selects the code path where the smoothness term does not exist at
  // all (the base objective), regardless of beta
  bool smooth_term = true;

  void validate() const;
};

// Adam constants are fixed: beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

struct EpochStats {
  double nll{0.0};
  double kl{0.0};
  double smooth{0.0};
  double total{0.0};
  double wall_seconds{0.0};  // not part of the checkpoint bytes
};

struct TrainResult {
  Model model;
  Standardizer standardizer;
  std::vector<EpochStats> history;
  double final_val_loss{0.0};
};

struct SampleSpec {
  int scene_index;
  int focal_id;
  int t_index;
};

// Every agent with input_steps observed steps ending at t and a complete
// future horizon yields a sample; t advances by `stride` and the gap
// decision step is always included.
std::vector<SampleSpec> enumerate_samples(const SceneSet& set, std::span<const int> indices,
                                          const ModelConfig& config, int stride);

bool sample_is_valid(const Scene& scene, const AgentTrack& track, int t, int n_input,
                     int horizon);

// Batch objective: mean of (nll + kl_weight * kl) over the batch plus
// beta times the unnormalized smoothness penalty over the batch traces.
struct BatchLoss {
  ad::Var total;
  LossBreakdown value;
};
BatchLoss build_batch_loss(ad::Tape& tape, const Model& model, const TapeParams& tp,
                           std::span<const ModelSample> batch, const LossConfig& loss,
                           bool smooth_term);

TrainResult train(const TrainConfig& config, const SceneSet& data, const DataSplit& split);

// Central finite differences against an analytic gradient; the relative
// error denominator is max(|analytic|, |numeric|, 1e-8). max_coords <= 0
// checks every coordinate; otherwise a seeded subset of at least 200.
double max_relative_gradient_error(const std::function<double(const Eigen::VectorXd&)>& value_fn,
                                   const Eigen::VectorXd& theta,
                                   const Eigen::VectorXd& analytic_grad, double eps,
                                   int max_coords, std::uint64_t seed);

double grad_check(const Model& model, std::span<const ModelSample> batch,
                  const LossConfig& loss, double eps = 1e-5, int max_coords = 0,
                  std::uint64_t seed = 0);

// Mean over focal samples of the per-agent attention total variation.
double measure_attention_tv(const Model& model, const Standardizer& standardizer,
                            const SceneSet& data, std::span<const int> indices, int stride);

// ---- evaluation ----

// The two queries evaluation needs; Model implements it, tests may stub it.
class TrajectoryModel {
 public:
  virtual ~TrajectoryModel() = default;
  virtual PredictionOutput predict(const ModelSample& sample) const = 0;
  virtual std::vector<Eigen::Matrix2Xd> sample(const ModelSample& sample, int n,
                                               std::uint64_t seed) const = 0;
};

class ModelPredictor final : public TrajectoryModel {
 public:
  explicit ModelPredictor(const Model& model) : model_(&model) {}
  PredictionOutput predict(const ModelSample& sample) const override {
    return model_->predict_most_likely(sample);
  }
  std::vector<Eigen::Matrix2Xd> sample(const ModelSample& sample, int n,
                                       std::uint64_t seed) const override {
    return model_->sample_trajectories(sample, n, seed);
  }

 private:
  const Model* model_;
};

struct EvalOptions {
  std::string model_tag = "model";
  double beta = 0.0;
  std::string split_name = "random";
  std::uint64_t seed = 0;
  std::vector<double> horizons_s = {1.0, 2.0, 3.0, 4.0};
  int kde_samples = 200;
  int sample_stride = 8;
  // evaluate in standardized units instead of meters (skips inversion)
  bool standardized_units = false;
  // emit <tag>:vehicle / <tag>:pedestrian rows when both classes occur
  bool per_class_rows = true;
};

// FDE/ADE from the most-likely output, KDE-NLL from sampled trajectories,
// AUC over gap scenes (skipped with a notice when labels are single-class or
// gap metadata is absent).
MetricsTable evaluate(const TrajectoryModel& model, const ModelConfig& config,
                      const Standardizer& standardizer, const SceneSet& data,
                      std::span<const int> test_indices, const EvalOptions& options);

}  // namespace trajsmooth
