#include "trajsmooth/model.hpp"

#include "trajsmooth/errors.hpp"

namespace trajsmooth {

void ModelConfig::validate() const {
  encoder.validate();
  latent.validate();
  if (latent_hidden_dim < 1 || decoder_hidden_dim < 1) {
    throw ConfigError("model: hidden dims must be >= 1");
  }
  if (horizon < 1) throw ConfigError("model: horizon must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("model: dt must be > 0");
  if (input_steps < 1) throw ConfigError("model: input_steps must be >= 1");
  if (input_steps > encoder.history_steps + 1) {
    throw ConfigError("model: input_steps exceeds the window length");
  }
  if (rnn_cell != "gru") throw ConfigError("model: unknown rnn_cell '" + rnn_cell + "'");
}

namespace {

ParamStore build_params(const ModelConfig& cfg) {
  cfg.validate();
  ParamStore store;
  register_encoder(store, cfg.encoder);
  register_cvae(store, cfg.e_x_dim(), cfg.latent, cfg.latent_hidden_dim,
                cfg.decoder_hidden_dim);
  return store;
}

}  // namespace

Model::Model(ModelConfig config, std::uint64_t param_seed)
    : config_(std::move(config)), params_(build_params(config_)) {
  params_.init_uniform(param_seed);
}

Model::Model(ModelConfig config, ParamStore params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  // cross-check one shape so a mismatched store fails loudly
  ParamStore expect = build_params(config_);
  if (expect.total_parameters() != params_.total_parameters()) {
    throw ValidationError("parameter store does not match the model config");
  }
}

ModelSample make_model_sample(const ModelConfig& cfg, const Scene& graph_scene,
                              const Scene& feature_scene, int focal_id, int t_index) {
  const AgentTrack* focal = feature_scene.find_track(focal_id);
  if (focal == nullptr) throw ValidationError("make_model_sample: focal agent not in scene");
  const int H = cfg.horizon;
  if (t_index + H >= feature_scene.num_frames()) {
    throw ValidationError("make_model_sample: future horizon leaves the scene");
  }
  for (int s = 1; s <= H; ++s) {
    if (!focal->present_at(t_index + s)) {
      throw ValidationError("make_model_sample: focal absent inside the future horizon");
    }
  }

  ModelSample sample;
  sample.window =
      build_node_window(graph_scene, feature_scene, focal_id, t_index, cfg.encoder,
                        cfg.input_steps, default_attention_radius(focal->semantic_class));
  sample.x_t = focal->position(t_index);
  sample.v_t = focal->velocity(t_index);
  sample.future_pos.resize(2, H);
  sample.future_states.resize(4, H);
  for (int s = 0; s < H; ++s) {
    sample.future_pos.col(s) = focal->position(t_index + 1 + s);
    sample.future_states.col(s) = focal->states.col(t_index + 1 + s);
  }
  sample.focal_class = focal->semantic_class;
  sample.scene_id = feature_scene.scene_id;
  sample.focal_id = focal_id;
  sample.t_index = t_index;
  return sample;
}

Model::LossGraph Model::build_loss(ad::Tape& tape, const TapeParams& tp,
                                   const ModelSample& sample) const {
  using namespace ad;
  const EncoderRefs enc = encoder_refs(tp, config_.encoder);
  const CvaeRefs cvae = cvae_refs(tp, config_.latent, config_.decoder_hidden_dim);

  EncodeResult encoded = encode_node(tape, enc, sample.window);

  const Var e_y = encode_future(tape, cvae.future, sample.future_states,
                                config_.latent.future_hidden_dim);
  const Var p_logits = prior_logits(cvae.prior, encoded.e_x);
  const Var q_logits = posterior_logits(cvae.posterior, encoded.e_x, e_y);
  const Var kl = kl_from_logits(tape, q_logits, p_logits);
  const Var q = softmax(q_logits);

  // exact expectation over the discrete latent
  Var nll;
  for (int z = 0; z < config_.latent.num_modes; ++z) {
    const auto velocity = decode(tape, cvae, encoded.e_x, z, sample.v_t, config_.horizon);
    const auto positions = integrate(tape, velocity, sample.x_t, config_.dt);
    const Var lp = log_prob(tape, positions, sample.future_pos);
    const Var weighted = scalar_mul(-lp, elem(q, z));
    nll = z == 0 ? weighted : nll + weighted;
  }

  LossGraph out;
  out.nll = nll;
  out.kl = kl;
  out.alphas = std::move(encoded.alphas);
  out.trace = std::move(encoded.trace);
  return out;
}

Model::Encoded Model::encode(const ModelSample& sample) const {
  ad::Tape tape;
  const TapeParams tp = push_params(tape, params_);
  const EncoderRefs enc = encoder_refs(tp, config_.encoder);
  EncodeResult encoded = encode_node(tape, enc, sample.window);
  Encoded out;
  out.e_x = encoded.e_x.value().col(0);
  out.trace = std::move(encoded.trace);
  return out;
}

PredictionOutput Model::predict_most_likely(const ModelSample& sample) const {
  ad::Tape tape;
  const TapeParams tp = push_params(tape, params_);
  const EncoderRefs enc = encoder_refs(tp, config_.encoder);
  const CvaeRefs cvae = cvae_refs(tp, config_.latent, config_.decoder_hidden_dim);

  const EncodeResult encoded = encode_node(tape, enc, sample.window);
  const Eigen::VectorXd prior =
      ad::softmax(prior_logits(cvae.prior, encoded.e_x)).value().col(0);
  const int z_star = argmax_mode(prior);

  const auto velocity = decode(tape, cvae, encoded.e_x, z_star, sample.v_t, config_.horizon);
  const auto positions = integrate(tape, velocity, sample.x_t, config_.dt);

  PredictionOutput out;
  out.z_dist = prior;
  out.mode = OutputMode::MostLikely;
  out.position_dists.reserve(positions.size());
  for (const auto& g : positions) out.position_dists.push_back(to_gaussian_step(g));
  return out;
}

std::vector<Eigen::Matrix2Xd> Model::sample_trajectories(const ModelSample& sample, int n,
                                                         std::uint64_t seed) const {
  if (n < 1) throw ValidationError("sample_trajectories: n must be >= 1");
  ad::Tape tape;
  const TapeParams tp = push_params(tape, params_);
  const EncoderRefs enc = encoder_refs(tp, config_.encoder);
  const CvaeRefs cvae = cvae_refs(tp, config_.latent, config_.decoder_hidden_dim);

  const EncodeResult encoded = encode_node(tape, enc, sample.window);
  const Eigen::VectorXd prior =
      ad::softmax(prior_logits(cvae.prior, encoded.e_x)).value().col(0);

  // the decoder is deterministic per mode, so decode each mode once
  std::vector<std::vector<GaussianStep>> velocity_by_mode;
  velocity_by_mode.reserve(static_cast<std::size_t>(config_.latent.num_modes));
  for (int z = 0; z < config_.latent.num_modes; ++z) {
    const auto velocity = decode(tape, cvae, encoded.e_x, z, sample.v_t, config_.horizon);
    std::vector<GaussianStep> steps;
    steps.reserve(velocity.size());
    for (const auto& g : velocity) steps.push_back(to_gaussian_step(g));
    velocity_by_mode.push_back(std::move(steps));
  }

  Rng rng(seed);
  std::vector<Eigen::Matrix2Xd> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int z = sample_categorical(prior, rng);
    out.push_back(sample_position_trajectory(velocity_by_mode[static_cast<std::size_t>(z)],
                                             sample.x_t, config_.dt, rng));
  }
  return out;
}

}  // namespace trajsmooth
