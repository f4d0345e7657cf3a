#include "trajsmooth/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "trajsmooth/errors.hpp"
#include "trajsmooth/generators.hpp"
#include "trajsmooth/rng.hpp"

namespace trajsmooth {

void TrainConfig::validate() const {
  model.validate();
  loss.validate();
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (kde_samples < 1) throw ConfigError("train: kde_samples must be >= 1");
  if (sample_stride < 1) throw ConfigError("train: sample_stride must be >= 1");
  if (grad_clip_norm < 0.0) throw ConfigError("train: grad_clip_norm must be >= 0");
}

bool sample_is_valid(const Scene& scene, const AgentTrack& track, int t, int n_input,
                     int horizon) {
  const int frames = scene.num_frames();
  if (t < n_input - 1 || t + horizon >= frames) return false;
  for (int k = 0; k < n_input; ++k) {
    if (!track.present_at(t - k)) return false;
  }
  for (int s = 1; s <= horizon; ++s) {
    if (!track.present_at(t + s)) return false;
  }
  return true;
}

std::vector<SampleSpec> enumerate_samples(const SceneSet& set, std::span<const int> indices,
                                          const ModelConfig& cfg, int stride) {
  if (stride < 1) throw ConfigError("sample stride must be >= 1");
  std::vector<SampleSpec> specs;
  for (const int scene_index : indices) {
    const Scene& scene = set.scenes.at(static_cast<std::size_t>(scene_index));
    std::set<int> times;
    for (int t = cfg.input_steps - 1; t + cfg.horizon < scene.num_frames(); t += stride) {
      times.insert(t);
    }
    if (scene.gap_meta) {
      const int idx = scene.frame_index(scene.gap_meta->decision_frame);
      if (idx >= 0) times.insert(idx);
    }
    for (const auto& track : scene.tracks) {
      for (const int t : times) {
        if (sample_is_valid(scene, track, t, cfg.input_steps, cfg.horizon)) {
          specs.push_back({scene_index, track.agent_id, t});
        }
      }
    }
  }
  return specs;
}

BatchLoss build_batch_loss(ad::Tape& tape, const Model& model, const TapeParams& tp,
                           std::span<const ModelSample> batch, const LossConfig& loss,
                           bool smooth_term) {
  using namespace ad;
  if (batch.empty()) throw ValidationError("empty batch");
  loss.validate();

  Var nll_sum, kl_sum;
  std::vector<std::vector<Var>> alpha_sequences;
  alpha_sequences.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Model::LossGraph g = model.build_loss(tape, tp, batch[i]);
    nll_sum = i == 0 ? g.nll : nll_sum + g.nll;
    kl_sum = i == 0 ? g.kl : kl_sum + g.kl;
    alpha_sequences.push_back(std::move(g.alphas));
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const Var nll_mean = affine(nll_sum, inv_b, 0.0);
  const Var kl_mean = affine(kl_sum, inv_b, 0.0);
  const Var l0 = nll_mean + affine(kl_mean, loss.kl_weight, 0.0);

  BatchLoss out;
  if (smooth_term && loss.beta != 0.0) {
    const Var smooth = smooth_loss(tape, alpha_sequences);
    out.total = l0 + affine(smooth, loss.beta, 0.0);
    out.value = total_loss(nll_mean.scalar(), kl_mean.scalar(), smooth.scalar(), loss);
  } else {
    // the smoothness term is never evaluated on this path
    out.total = l0;
    out.value = total_loss(nll_mean.scalar(), kl_mean.scalar(), 0.0,
                           LossConfig{0.0, loss.kl_weight});
    out.value.beta = loss.beta;
  }
  return out;
}

namespace {

struct AdamState {
  Eigen::VectorXd m, v;
  long step = 0;
};

void adam_update(ParamStore& params, AdamState& state, Eigen::VectorXd grad, double lr,
                 double clip_norm) {
  if (clip_norm > 0.0) {
    const double norm = grad.norm();
    if (norm > clip_norm) grad *= clip_norm / norm;
  }
  state.step += 1;
  state.m = kAdamBeta1 * state.m + (1.0 - kAdamBeta1) * grad;
  state.v = kAdamBeta2 * state.v + (1.0 - kAdamBeta2) * grad.cwiseProduct(grad).eval();
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
  Eigen::VectorXd theta = params.flatten();
  theta -= (lr / c1) * state.m.cwiseQuotient(
               ((state.v / c2).cwiseSqrt().array() + kAdamEps).matrix());
  params.assign_flat(theta);
}

const char* first_non_finite_term(const LossBreakdown& b) {
  if (!std::isfinite(b.nll)) return "nll";
  if (!std::isfinite(b.kl)) return "kl";
  if (!std::isfinite(b.smooth)) return "smooth";
  return "total";
}

std::vector<ModelSample> materialize_samples(const ModelConfig& cfg, const SceneSet& data,
                                             const SceneSet& standardized,
                                             std::span<const SampleSpec> specs) {
  std::vector<ModelSample> samples;
  samples.reserve(specs.size());
  for (const auto& spec : specs) {
    samples.push_back(make_model_sample(
        cfg, data.scenes.at(static_cast<std::size_t>(spec.scene_index)),
        standardized.scenes.at(static_cast<std::size_t>(spec.scene_index)), spec.focal_id,
        spec.t_index));
  }
  return samples;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const SceneSet& data, const DataSplit& split) {
  cfg.validate();
  validate(split, data);
  if (split.train.empty()) throw ValidationError("train: empty training split");

  Standardizer standardizer = fit_standardizer(data, split.train);
  const SceneSet standardized = standardizer.apply(data);

  const std::vector<SampleSpec> train_specs =
      enumerate_samples(data, split.train, cfg.model, cfg.sample_stride);
  if (train_specs.empty()) {
    throw ValidationError(
        "train: no training samples; scenes are too short for the window plus horizon");
  }
  std::vector<ModelSample> train_samples =
      materialize_samples(cfg.model, data, standardized, train_specs);

  Model model(cfg.model, cfg.seed);
  AdamState adam;
  adam.m = Eigen::VectorXd::Zero(model.params().total_parameters());
  adam.v = Eigen::VectorXd::Zero(model.params().total_parameters());

  std::vector<std::size_t> order(train_samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffle_rng(cfg.seed ^ 0x5DEECE66DULL);

  TrainResult result{std::move(model), standardizer, {}, 0.0};
  result.history.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(order);

    double ep_nll = 0.0, ep_kl = 0.0, ep_smooth = 0.0, ep_total = 0.0;
    int n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<ModelSample> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_samples[order[i]]);

      ad::Tape tape;
      const TapeParams tp = push_params(tape, result.model.params());
      BatchLoss loss = build_batch_loss(tape, result.model, tp, batch, cfg.loss, cfg.smooth_term);
      if (!std::isfinite(loss.value.total)) {
        throw NumericError("non-finite loss in epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(n_batches) + " (term: " +
                           first_non_finite_term(loss.value) + ")");
      }
      tape.backward(loss.total);
      adam_update(result.model.params(), adam, gather_gradients(tape, tp),
                  cfg.learning_rate, cfg.grad_clip_norm);

      ep_nll += loss.value.nll;
      ep_kl += loss.value.kl;
      ep_smooth += loss.value.smooth;
      ep_total += loss.value.total;
      ++n_batches;
    }
    const auto t1 = std::chrono::steady_clock::now();
    EpochStats stats;
    stats.nll = ep_nll / n_batches;
    stats.kl = ep_kl / n_batches;
    stats.smooth = ep_smooth / n_batches;
    stats.total = ep_total / n_batches;
    stats.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    result.history.push_back(stats);
  }

  // validation loss for the checkpoint round-trip contract; falls back to the
  // training samples when the split has no validation part
  const std::vector<SampleSpec> val_specs =
      split.val.empty() ? train_specs
                        : enumerate_samples(data, split.val, cfg.model, cfg.sample_stride);
  if (!val_specs.empty()) {
    const std::vector<ModelSample> val_samples =
        materialize_samples(cfg.model, data, standardized, val_specs);
    ad::Tape tape;
    const TapeParams tp = push_params(tape, result.model.params());
    const BatchLoss loss =
        build_batch_loss(tape, result.model, tp, val_samples, cfg.loss, cfg.smooth_term);
    result.final_val_loss = loss.value.total;
  }
  return result;
}

double max_relative_gradient_error(const std::function<double(const Eigen::VectorXd&)>& value_fn,
                                   const Eigen::VectorXd& theta,
                                   const Eigen::VectorXd& analytic_grad, double eps,
                                   int max_coords, std::uint64_t seed) {
  const int dim = static_cast<int>(theta.size());
  std::vector<int> coords;
  if (max_coords <= 0 || max_coords >= dim) {
    coords.resize(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) coords[static_cast<std::size_t>(i)] = i;
  } else {
    const int want = std::min(dim, std::max(max_coords, 200));
    std::vector<int> all(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) all[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    rng.shuffle(all);
    coords.assign(all.begin(), all.begin() + want);
  }

  Eigen::VectorXd probe = theta;
  double max_err = 0.0;
  for (const int i : coords) {
    probe(i) = theta(i) + eps;
    const double fp = value_fn(probe);
    probe(i) = theta(i) - eps;
    const double fm = value_fn(probe);
    probe(i) = theta(i);
    const double numeric = (fp - fm) / (2.0 * eps);
    const double denom = std::max({std::abs(analytic_grad(i)), std::abs(numeric), 1e-8});
    max_err = std::max(max_err, std::abs(analytic_grad(i) - numeric) / denom);
  }
  return max_err;
}

double grad_check(const Model& model, std::span<const ModelSample> batch,
                  const LossConfig& loss, double eps, int max_coords, std::uint64_t seed) {
  ad::Tape tape;
  const TapeParams tp = push_params(tape, model.params());
  const BatchLoss graph = build_batch_loss(tape, model, tp, batch, loss, true);
  tape.backward(graph.total);
  const Eigen::VectorXd analytic = gather_gradients(tape, tp);
  const Eigen::VectorXd theta = model.params().flatten();

  Model probe(model.config(), model.params());
  const auto value_fn = [&](const Eigen::VectorXd& flat) {
    probe.params().assign_flat(flat);
    ad::Tape t;
    const TapeParams p = push_params(t, probe.params());
    return build_batch_loss(t, probe, p, batch, loss, true).value.total;
  };
  return max_relative_gradient_error(value_fn, theta, analytic, eps, max_coords, seed);
}

double measure_attention_tv(const Model& model, const Standardizer& standardizer,
                            const SceneSet& data, std::span<const int> indices, int stride) {
  const SceneSet standardized = standardizer.apply(data);
  const std::vector<SampleSpec> specs =
      enumerate_samples(data, indices, model.config(), stride);
  if (specs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& spec : specs) {
    const ModelSample sample = make_model_sample(
        model.config(), data.scenes.at(static_cast<std::size_t>(spec.scene_index)),
        standardized.scenes.at(static_cast<std::size_t>(spec.scene_index)), spec.focal_id,
        spec.t_index);
    total += attention_total_variation(model.encode(sample).trace);
  }
  return total / static_cast<double>(specs.size());
}

}  // namespace trajsmooth
