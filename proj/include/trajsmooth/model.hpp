#pragma once

#include <cstdint>
#include <vector>

#include "trajsmooth/cvae.hpp"
#include "trajsmooth/encoder.hpp"
#include "trajsmooth/losses.hpp"
#include "trajsmooth/params.hpp"
#include "trajsmooth/standardize.hpp"

namespace trajsmooth {

struct ModelConfig {
  EncoderConfig encoder;
  LatentConfig latent;
  int latent_hidden_dim = 16;   // prior/posterior MLP hidden size
  int decoder_hidden_dim = 12;
  int horizon = 8;              // prediction steps
  double dt = 0.5;
  int input_steps = 10;         // n_I, observed window steps (<= history_steps)
  std::string rnn_cell = "gru"; // recorded for provenance; only gru is implemented

  int e_x_dim() const { return encoder.hidden_dim + encoder.edge_hidden_dim; }
  void validate() const;
};

// Materialized inputs of one (scene, focal agent, prediction step) sample.
// Parameter-free, so it can be cached across epochs.
struct ModelSample {
  NodeWindow window;
  Eigen::Vector2d x_t{Eigen::Vector2d::Zero()};
  Eigen::Vector2d v_t{Eigen::Vector2d::Zero()};
  Eigen::MatrixXd future_pos;     // 2 x H
  Eigen::MatrixXd future_states;  // 4 x H, input of the future encoder
  AgentClass focal_class{AgentClass::Vehicle};
  int scene_id{0};
  int focal_id{0};
  int t_index{0};
};

// graph_scene supplies metric coordinates for the neighbor radius;
// feature_scene the (typically standardized) model inputs.
ModelSample make_model_sample(const ModelConfig& config, const Scene& graph_scene,
                              const Scene& feature_scene, int focal_id, int t_index);

class Model {
 public:
  Model(ModelConfig config, std::uint64_t param_seed);
  Model(ModelConfig config, ParamStore params);

  const ModelConfig& config() const { return config_; }
  const ParamStore& params() const { return params_; }
  ParamStore& params() { return params_; }

  ModelSample make_sample(const Scene& graph_scene, const Scene& feature_scene, int focal_id,
                          int t_index) const {
    return make_model_sample(config_, graph_scene, feature_scene, focal_id, t_index);
  }

  struct LossGraph {
    ad::Var nll;  // expectation of -log p(y | x, z) under q, exact over z
    ad::Var kl;
    std::vector<ad::Var> alphas;  // per window step, for the smoothness penalty
    AttentionTrace trace;
  };
  // Training-time graph: posterior from the ground-truth future, exact
  // enumeration of the discrete latent.
  LossGraph build_loss(ad::Tape& tape, const TapeParams& tp, const ModelSample& sample) const;

  struct Encoded {
    Eigen::VectorXd e_x;
    AttentionTrace trace;
  };
  Encoded encode(const ModelSample& sample) const;

  PredictionOutput predict_most_likely(const ModelSample& sample) const;
  std::vector<Eigen::Matrix2Xd> sample_trajectories(const ModelSample& sample, int n,
                                                    std::uint64_t seed) const;

 private:
  ModelConfig config_;
  ParamStore params_;
};

}  // namespace trajsmooth
