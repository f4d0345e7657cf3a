#pragma once

#include <string>
#include <vector>

#include "trajsmooth/autodiff.hpp"
#include "trajsmooth/params.hpp"

namespace trajsmooth {

// The gated recurrent cell used everywhere a recurrent encoder/decoder is
// needed (cell type recorded in the run config as "gru"):
//   r = sigmoid(Wr x + Ur h + br)
//   u = sigmoid(Wu x + Uu h + bu)
//   c = tanh(Wc x + Uc (r.h) + bc)
//   h' = (1 - u).h + u.c
struct GruRef {
  ad::Var Wr, Ur, br, Wu, Uu, bu, Wc, Uc, bc;
};

// Registers the nine arrays under "<prefix>.Wr" etc. fan_in is the cell input
// dimension for W*/b* and the hidden dimension for U*.
void register_gru(ParamStore& store, const std::string& prefix, int input_dim, int hidden_dim);
GruRef gru_ref(const TapeParams& params, const std::string& prefix);
int gru_hidden_dim(const ParamStore& store, const std::string& prefix);

ad::Var gru_step(const GruRef& p, const ad::Var& x, const ad::Var& h);

// Runs the cell over the columns of `inputs` from a zero initial state and
// returns every per-step hidden state.
std::vector<ad::Var> gru_run(ad::Tape& tape, const GruRef& p, const ad::Var& inputs,
                             int hidden_dim);

// One-hidden-layer tanh MLP emitting logits.
struct MlpRef {
  ad::Var W1, b1, W2, b2;
};

void register_mlp(ParamStore& store, const std::string& prefix, int input_dim, int hidden_dim,
                  int output_dim);
MlpRef mlp_ref(const TapeParams& params, const std::string& prefix);
ad::Var mlp_logits(const MlpRef& p, const ad::Var& input);

}  // namespace trajsmooth
