#pragma once

#include <array>
#include <span>
#include <vector>

#include "trajsmooth/autodiff.hpp"
#include "trajsmooth/neighbor_graph.hpp"
#include "trajsmooth/nn.hpp"
#include "trajsmooth/params.hpp"
#include "trajsmooth/scene.hpp"

namespace trajsmooth {

struct EncoderConfig {
  int history_steps = 10;  // T; the attention window covers T+1 steps
  int hidden_dim = 16;
  int edge_hidden_dim = 8;
  int attention_dim = 8;
  int num_edge_classes = kNumAgentClasses;  // K: class-pair keys with the focal class fixed

  // x, y, vx, vy plus the focal-class one-hot
  static constexpr int kStateDim = 4 + kNumAgentClasses;
  // a presence flag is appended so front-padded windows stay well-defined
  int input_dim() const { return kStateDim + 1; }
  static constexpr int kEdgeFeatureDim = 4;  // neighbor x, y, vx, vy relative to focal

  void validate() const;
};

// Attention weights alpha(tau, k) over the whole window, one row per step
// (row 0 = t-T). key_present marks keys with at least one neighbor at some
// observed step.
struct AttentionTrace {
  Eigen::MatrixXd alpha;
  std::vector<std::uint8_t> key_present;
};

void register_encoder(ParamStore& store, const EncoderConfig& config);

struct EncoderRefs {
  GruRef history;
  std::vector<GruRef> edge;  // one cell per edge-class key
  ad::Var attn_Wq, attn_Wk, attn_v;
  GruRef influence;
  int hidden_dim{0};
  int edge_hidden_dim{0};
};
EncoderRefs encoder_refs(const TapeParams& params, const EncoderConfig& config);

// Node history encoder: a recurrent pass over the window columns, returning
// the hidden state of every step so each one can serve as the attention
// query. Throws NumericError on non-finite input.
std::vector<ad::Var> encode_history(ad::Tape& tape, const GruRef& cell,
                                    const Eigen::MatrixXd& window, int hidden_dim);

// Element-wise sum of neighbor states relative to the focal agent at each
// window step; zero where the key has no neighbors. States are read from
// `scene` (pass the standardized scene when features should be standardized;
// the graph itself is built on metric coordinates).
Eigen::MatrixXd aggregate_edges(const NeighborGraph& graph, const Scene& scene,
                                AgentClass neighbor_class);

// Edge encoder for one class key, over the aggregated feature sequence.
std::vector<ad::Var> encode_edge(ad::Tape& tape, const GruRef& cell,
                                 const Eigen::MatrixXd& aggregated, int edge_hidden_dim);

struct AttentionStep {
  ad::Var alpha;    // K x 1, softmax output
  ad::Var context;  // edge_hidden_dim x 1
};

// Additive attention: score_k = v . tanh(Wq q + Wk m_k), alpha = softmax,
// context = sum_k alpha_k m_k.
AttentionStep attend(const ad::Var& attn_Wq, const ad::Var& attn_Wk, const ad::Var& attn_v,
                     const ad::Var& query, std::span<const ad::Var> keys);

// Recurrent pass over the per-step contexts; the final state is the
// influence vector.
ad::Var edge_influence(ad::Tape& tape, const GruRef& cell, std::span<const ad::Var> contexts,
                       int hidden_dim);

// Materialized, parameter-free inputs of one focal window.
struct NodeWindow {
  Eigen::MatrixXd window;  // input_dim x (T+1)
  std::vector<Eigen::MatrixXd> edge_agg;  // per key, kEdgeFeatureDim x (T+1)
  std::vector<std::uint8_t> key_present;
};

// Builds the window for focal_id ending at t_index. Slots older than
// n_input steps, before the scene start, or where the focal is absent are
// zero-padded with presence 0 (and their edge features zeroed). The neighbor
// graph is built on graph_scene (metric coordinates); features are read from
// feature_scene.
NodeWindow build_node_window(const Scene& graph_scene, const Scene& feature_scene,
                             int focal_id, int t_index, const EncoderConfig& config,
                             int n_input, double radius);

struct EncodeResult {
  ad::Var e_x;                  // hidden_dim + edge_hidden_dim
  std::vector<ad::Var> alphas;  // per window step, K x 1
  AttentionTrace trace;
};

EncodeResult encode_node(ad::Tape& tape, const EncoderRefs& refs, const NodeWindow& input);

// Convenience overload building the window from one scene (graph and
// features share coordinates), with n_input = T + 1 and the class-default
// radius.
EncodeResult encode_node(ad::Tape& tape, const EncoderRefs& refs, const Scene& scene,
                         int focal_id, int t_index, const EncoderConfig& config);

}  // namespace trajsmooth
