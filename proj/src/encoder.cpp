#include "trajsmooth/encoder.hpp"

#include "trajsmooth/errors.hpp"

namespace trajsmooth {

void EncoderConfig::validate() const {
  if (history_steps < 1) throw ConfigError("encoder: history_steps must be >= 1");
  if (hidden_dim < 1 || edge_hidden_dim < 1 || attention_dim < 1) {
    throw ConfigError("encoder: all dims must be >= 1");
  }
  if (num_edge_classes < 1) throw ConfigError("encoder: num_edge_classes must be >= 1");
}

void register_encoder(ParamStore& store, const EncoderConfig& cfg) {
  cfg.validate();
  register_gru(store, "hist", cfg.input_dim(), cfg.hidden_dim);
  for (int k = 0; k < cfg.num_edge_classes; ++k) {
    register_gru(store, "edge" + std::to_string(k), EncoderConfig::kEdgeFeatureDim,
                 cfg.edge_hidden_dim);
  }
  store.add("attn.Wq", cfg.attention_dim, cfg.hidden_dim, cfg.hidden_dim);
  store.add("attn.Wk", cfg.attention_dim, cfg.edge_hidden_dim, cfg.edge_hidden_dim);
  store.add("attn.v", cfg.attention_dim, 1, cfg.attention_dim);
  register_gru(store, "infl", cfg.edge_hidden_dim, cfg.edge_hidden_dim);
}

EncoderRefs encoder_refs(const TapeParams& params, const EncoderConfig& cfg) {
  EncoderRefs refs;
  refs.history = gru_ref(params, "hist");
  for (int k = 0; k < cfg.num_edge_classes; ++k) {
    refs.edge.push_back(gru_ref(params, "edge" + std::to_string(k)));
  }
  refs.attn_Wq = params.at("attn.Wq");
  refs.attn_Wk = params.at("attn.Wk");
  refs.attn_v = params.at("attn.v");
  refs.influence = gru_ref(params, "infl");
  refs.hidden_dim = cfg.hidden_dim;
  refs.edge_hidden_dim = cfg.edge_hidden_dim;
  return refs;
}

std::vector<ad::Var> encode_history(ad::Tape& tape, const GruRef& cell,
                                    const Eigen::MatrixXd& window, int hidden_dim) {
  if (!window.allFinite()) throw NumericError("encode_history: non-finite input window");
  return gru_run(tape, cell, tape.leaf(window), hidden_dim);
}

Eigen::MatrixXd aggregate_edges(const NeighborGraph& graph, const Scene& scene,
                                AgentClass neighbor_class) {
  const int steps = graph.history_steps + 1;
  Eigen::MatrixXd agg =
      Eigen::MatrixXd::Zero(EncoderConfig::kEdgeFeatureDim, steps);
  const AgentTrack* focal = scene.find_track(graph.focal_id);
  if (focal == nullptr) {
    throw ValidationError("aggregate_edges: focal agent not in scene");
  }
  const auto& per_step = graph.lists[static_cast<std::size_t>(neighbor_class)];
  for (int s = 0; s < steps; ++s) {
    const int tau = graph.t_index - graph.history_steps + s;
    if (tau < 0 || !focal->present_at(tau)) continue;
    for (const int id : per_step[static_cast<std::size_t>(s)]) {
      const AgentTrack* nb = scene.find_track(id);
      if (nb == nullptr || !nb->present_at(tau)) continue;
      agg.col(s) += nb->states.col(tau) - focal->states.col(tau);
    }
  }
  return agg;
}

std::vector<ad::Var> encode_edge(ad::Tape& tape, const GruRef& cell,
                                 const Eigen::MatrixXd& aggregated, int edge_hidden_dim) {
  if (!aggregated.allFinite()) throw NumericError("encode_edge: non-finite input");
  return gru_run(tape, cell, tape.leaf(aggregated), edge_hidden_dim);
}

AttentionStep attend(const ad::Var& attn_Wq, const ad::Var& attn_Wk, const ad::Var& attn_v,
                     const ad::Var& query, std::span<const ad::Var> keys) {
  using namespace ad;
  if (keys.empty()) throw ValidationError("attend: needs at least one key");
  const Var projected_query = attn_Wq * query;
  Var scores;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const Var score = dot(attn_v, tanh(projected_query + attn_Wk * keys[k]));
    scores = k == 0 ? score : vcat(scores, score);
  }
  AttentionStep out;
  out.alpha = softmax(scores);
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const Var weighted = scalar_mul(keys[k], elem(out.alpha, static_cast<int>(k)));
    out.context = k == 0 ? weighted : out.context + weighted;
  }
  return out;
}

ad::Var edge_influence(ad::Tape& tape, const GruRef& cell, std::span<const ad::Var> contexts,
                       int hidden_dim) {
  ad::Var h = tape.leaf(Eigen::MatrixXd::Zero(hidden_dim, 1));
  for (const auto& ctx : contexts) h = gru_step(cell, ctx, h);
  return h;
}

NodeWindow build_node_window(const Scene& graph_scene, const Scene& feature_scene,
                             int focal_id, int t_index, const EncoderConfig& cfg,
                             int n_input, double radius) {
  cfg.validate();
  if (n_input < 1) throw ConfigError("n_input must be >= 1");
  const AgentTrack* focal = feature_scene.find_track(focal_id);
  if (focal == nullptr || t_index < 0 || t_index >= feature_scene.num_frames() ||
      !focal->present_at(t_index)) {
    throw ValidationError("focal agent absent at the prediction step");
  }

  const int T = cfg.history_steps;
  const int steps = T + 1;
  NodeWindow out;
  out.window = Eigen::MatrixXd::Zero(cfg.input_dim(), steps);

  const Eigen::Vector2d anchor = focal->position(t_index);
  std::vector<std::uint8_t> observed(static_cast<std::size_t>(steps), 0);
  for (int s = 0; s < steps; ++s) {
    const int tau = t_index - T + s;
    if (tau < 0 || t_index - tau >= n_input || !focal->present_at(tau)) continue;
    observed[static_cast<std::size_t>(s)] = 1;
    out.window.block<2, 1>(0, s) = focal->position(tau) - anchor;
    out.window.block<2, 1>(2, s) = focal->velocity(tau);
    out.window(4 + static_cast<int>(focal->semantic_class), s) = 1.0;
    out.window(cfg.input_dim() - 1, s) = 1.0;  // presence flag
  }

  const NeighborGraph graph =
      build_neighbor_graph(graph_scene, focal_id, t_index, T, radius);
  out.edge_agg.resize(static_cast<std::size_t>(cfg.num_edge_classes));
  out.key_present.assign(static_cast<std::size_t>(cfg.num_edge_classes), 0);
  for (int k = 0; k < cfg.num_edge_classes; ++k) {
    Eigen::MatrixXd agg =
        aggregate_edges(graph, feature_scene, static_cast<AgentClass>(k));
    // truncated slots expose no social context either
    for (int s = 0; s < steps; ++s) {
      if (!observed[static_cast<std::size_t>(s)]) {
        agg.col(s).setZero();
      } else if (!graph.lists[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)]
                      .empty()) {
        out.key_present[static_cast<std::size_t>(k)] = 1;
      }
    }
    out.edge_agg[static_cast<std::size_t>(k)] = std::move(agg);
  }
  return out;
}

EncodeResult encode_node(ad::Tape& tape, const EncoderRefs& refs, const NodeWindow& input) {
  const int steps = static_cast<int>(input.window.cols());
  const int K = static_cast<int>(input.edge_agg.size());

  const std::vector<ad::Var> history =
      encode_history(tape, refs.history, input.window, refs.hidden_dim);

  std::vector<std::vector<ad::Var>> edge_encodings;
  edge_encodings.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    edge_encodings.push_back(encode_edge(tape, refs.edge[static_cast<std::size_t>(k)],
                                         input.edge_agg[static_cast<std::size_t>(k)],
                                         refs.edge_hidden_dim));
  }

  EncodeResult result;
  result.alphas.reserve(static_cast<std::size_t>(steps));
  result.trace.alpha = Eigen::MatrixXd::Zero(steps, K);
  result.trace.key_present = input.key_present;

  std::vector<ad::Var> contexts;
  contexts.reserve(static_cast<std::size_t>(steps));
  std::vector<ad::Var> keys(static_cast<std::size_t>(K));
  for (int s = 0; s < steps; ++s) {
    for (int k = 0; k < K; ++k) {
      keys[static_cast<std::size_t>(k)] =
          edge_encodings[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
    }
    AttentionStep step = attend(refs.attn_Wq, refs.attn_Wk, refs.attn_v, history[static_cast<std::size_t>(s)], keys);
    result.trace.alpha.row(s) = step.alpha.value().transpose();
    result.alphas.push_back(step.alpha);
    contexts.push_back(step.context);
  }

  const ad::Var influence = edge_influence(tape, refs.influence, contexts, refs.edge_hidden_dim);
  result.e_x = ad::vcat(history.back(), influence);
  return result;
}

EncodeResult encode_node(ad::Tape& tape, const EncoderRefs& refs, const Scene& scene,
                         int focal_id, int t_index, const EncoderConfig& cfg) {
  const AgentTrack* focal = scene.find_track(focal_id);
  if (focal == nullptr) throw ValidationError("focal agent not in scene");
  const NodeWindow input =
      build_node_window(scene, scene, focal_id, t_index, cfg, cfg.history_steps + 1,
                        default_attention_radius(focal->semantic_class));
  return encode_node(tape, refs, input);
}

}  // namespace trajsmooth
