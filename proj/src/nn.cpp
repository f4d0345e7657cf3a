#include "trajsmooth/nn.hpp"

namespace trajsmooth {

void register_gru(ParamStore& store, const std::string& prefix, int input_dim, int hidden_dim) {
  for (const char* gate : {"r", "u", "c"}) {
    store.add(prefix + ".W" + gate, hidden_dim, input_dim, input_dim);
    store.add(prefix + ".U" + gate, hidden_dim, hidden_dim, hidden_dim);
    store.add(prefix + ".b" + gate, hidden_dim, 1, input_dim + hidden_dim);
  }
}

GruRef gru_ref(const TapeParams& params, const std::string& prefix) {
  GruRef p;
  p.Wr = params.at(prefix + ".Wr");
  p.Ur = params.at(prefix + ".Ur");
  p.br = params.at(prefix + ".br");
  p.Wu = params.at(prefix + ".Wu");
  p.Uu = params.at(prefix + ".Uu");
  p.bu = params.at(prefix + ".bu");
  p.Wc = params.at(prefix + ".Wc");
  p.Uc = params.at(prefix + ".Uc");
  p.bc = params.at(prefix + ".bc");
  return p;
}

int gru_hidden_dim(const ParamStore& store, const std::string& prefix) {
  return static_cast<int>(store.at(prefix + ".Wr").rows());
}

ad::Var gru_step(const GruRef& p, const ad::Var& x, const ad::Var& h) {
  using namespace ad;
  const Var r = sigmoid(p.Wr * x + p.Ur * h + p.br);
  const Var u = sigmoid(p.Wu * x + p.Uu * h + p.bu);
  const Var c = tanh(p.Wc * x + p.Uc * cwise_mul(r, h) + p.bc);
  return cwise_mul(affine(u, -1.0, 1.0), h) + cwise_mul(u, c);
}

std::vector<ad::Var> gru_run(ad::Tape& tape, const GruRef& p, const ad::Var& inputs,
                             int hidden_dim) {
  std::vector<ad::Var> states;
  const int steps = inputs.cols();
  states.reserve(static_cast<std::size_t>(steps));
  ad::Var h = tape.leaf(Eigen::MatrixXd::Zero(hidden_dim, 1));
  for (int s = 0; s < steps; ++s) {
    h = gru_step(p, ad::slice(inputs, 0, s, inputs.rows(), 1), h);
    states.push_back(h);
  }
  return states;
}

void register_mlp(ParamStore& store, const std::string& prefix, int input_dim, int hidden_dim,
                  int output_dim) {
  store.add(prefix + ".W1", hidden_dim, input_dim, input_dim);
  store.add(prefix + ".b1", hidden_dim, 1, input_dim);
  store.add(prefix + ".W2", output_dim, hidden_dim, hidden_dim);
  store.add(prefix + ".b2", output_dim, 1, hidden_dim);
}

MlpRef mlp_ref(const TapeParams& params, const std::string& prefix) {
  MlpRef p;
  p.W1 = params.at(prefix + ".W1");
  p.b1 = params.at(prefix + ".b1");
  p.W2 = params.at(prefix + ".W2");
  p.b2 = params.at(prefix + ".b2");
  return p;
}

ad::Var mlp_logits(const MlpRef& p, const ad::Var& input) {
  using namespace ad;
  return p.W2 * tanh(p.W1 * input + p.b1) + p.b2;
}

}  // namespace trajsmooth
