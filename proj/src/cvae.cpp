#include "trajsmooth/cvae.hpp"

#include <cmath>
#include <numbers>

#include "trajsmooth/errors.hpp"

namespace trajsmooth {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;  // ln(2*pi)
}

void LatentConfig::validate() const {
  if (num_modes < 1) throw ConfigError("latent: num_modes must be >= 1");
  if (future_hidden_dim < 1) throw ConfigError("latent: future_hidden_dim must be >= 1");
}

Eigen::Matrix2d GaussianStep::chol() const {
  Eigen::Matrix2d L;
  L << std::exp(chol_log_d0), 0.0, chol_off, std::exp(chol_log_d1);
  return L;
}

Eigen::Matrix2d GaussianStep::covariance() const {
  const Eigen::Matrix2d L = chol();
  return L * L.transpose();
}

Eigen::Matrix2Xd PredictionOutput::point_trajectory() const {
  Eigen::Matrix2Xd traj(2, static_cast<Eigen::Index>(position_dists.size()));
  for (std::size_t i = 0; i < position_dists.size(); ++i) {
    traj.col(static_cast<Eigen::Index>(i)) = position_dists[i].mean;
  }
  return traj;
}

void register_cvae(ParamStore& store, int e_x_dim, const LatentConfig& latent,
                   int latent_hidden_dim, int decoder_hidden_dim) {
  latent.validate();
  if (latent_hidden_dim < 1 || decoder_hidden_dim < 1) {
    throw ConfigError("cvae: hidden dims must be >= 1");
  }
  register_gru(store, "future", 4, latent.future_hidden_dim);
  register_mlp(store, "prior", e_x_dim, latent_hidden_dim, latent.num_modes);
  register_mlp(store, "post", e_x_dim + latent.future_hidden_dim, latent_hidden_dim,
               latent.num_modes);
  const int init_dim = e_x_dim + latent.num_modes;
  store.add("dec.Winit", decoder_hidden_dim, init_dim, init_dim);
  store.add("dec.binit", decoder_hidden_dim, 1, init_dim);
  register_gru(store, "dec", 2, decoder_hidden_dim);
  store.add("dec.Wout", 5, decoder_hidden_dim, decoder_hidden_dim);
  store.add("dec.bout", 5, 1, decoder_hidden_dim);
}

CvaeRefs cvae_refs(const TapeParams& params, const LatentConfig& latent,
                   int decoder_hidden_dim) {
  CvaeRefs refs;
  refs.future = gru_ref(params, "future");
  refs.prior = mlp_ref(params, "prior");
  refs.posterior = mlp_ref(params, "post");
  refs.dec_Winit = params.at("dec.Winit");
  refs.dec_binit = params.at("dec.binit");
  refs.dec = gru_ref(params, "dec");
  refs.dec_Wout = params.at("dec.Wout");
  refs.dec_bout = params.at("dec.bout");
  refs.future_hidden_dim = latent.future_hidden_dim;
  refs.decoder_hidden_dim = decoder_hidden_dim;
  refs.num_modes = latent.num_modes;
  return refs;
}

ad::Var encode_future(ad::Tape& tape, const GruRef& cell, const Eigen::MatrixXd& future_states,
                      int hidden_dim) {
  if (future_states.cols() < 1) throw ValidationError("encode_future: empty future");
  if (!future_states.allFinite()) throw NumericError("encode_future: non-finite input");
  return gru_run(tape, cell, tape.leaf(future_states), hidden_dim).back();
}

ad::Var prior_logits(const MlpRef& head, const ad::Var& e_x) { return mlp_logits(head, e_x); }

ad::Var posterior_logits(const MlpRef& head, const ad::Var& e_x, const ad::Var& e_y) {
  return mlp_logits(head, ad::vcat(e_x, e_y));
}

ad::Var kl_from_logits(ad::Tape& tape, const ad::Var& q_logits, const ad::Var& p_logits) {
  using namespace ad;
  const Var ones = tape.leaf(Eigen::MatrixXd::Ones(q_logits.rows(), 1));
  const Var log_q = q_logits - scalar_mul(ones, logsumexp(q_logits));
  const Var log_p = p_logits - scalar_mul(ones, logsumexp(p_logits));
  const Var q = exp(log_q);
  return sum(cwise_mul(q, log_q - log_p));
}

double kl_categorical(const Eigen::VectorXd& q, const Eigen::VectorXd& p) {
  if (q.size() != p.size() || q.size() == 0) {
    throw ValidationError("kl_categorical: distributions must share a nonzero size");
  }
  double kl = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const double qi = q(i);
    if (qi <= 0.0) continue;  // 0 * ln 0 = 0
    const double pi = std::max(p(i), 1e-12);
    kl += qi * (std::log(qi) - std::log(pi));
  }
  return kl;
}

std::vector<GaussianVar> decode(ad::Tape& tape, const CvaeRefs& refs, const ad::Var& e_x,
                                int z, const Eigen::Vector2d& v_t, int horizon) {
  using namespace ad;
  if (horizon < 1) throw ValidationError("decode: horizon must be >= 1");
  if (z < 0 || z >= refs.num_modes) throw ValidationError("decode: latent mode out of range");

  Eigen::MatrixXd one_hot = Eigen::MatrixXd::Zero(refs.num_modes, 1);
  one_hot(z, 0) = 1.0;
  const Var cond = vcat(e_x, tape.leaf(std::move(one_hot)));
  Var h = tanh(refs.dec_Winit * cond + refs.dec_binit);
  Var input = tape.leaf(Eigen::MatrixXd(v_t));

  std::vector<GaussianVar> out;
  out.reserve(static_cast<std::size_t>(horizon));
  for (int s = 0; s < horizon; ++s) {
    h = gru_step(refs.dec, input, h);
    const Var raw = refs.dec_Wout * h + refs.dec_bout;
    GaussianVar g;
    g.mean = slice(raw, 0, 0, 2, 1);
    const Var l11 = affine(exp(elem(raw, 2)), 1.0, kCovDiagFloor);
    const Var l21 = elem(raw, 3);
    const Var l22 = affine(exp(elem(raw, 4)), 1.0, kCovDiagFloor);
    g.c11 = cwise_mul(l11, l11);
    g.c12 = cwise_mul(l11, l21);
    g.c22 = cwise_mul(l21, l21) + cwise_mul(l22, l22);
    input = g.mean;  // autoregress on the mean
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<GaussianVar> integrate(ad::Tape& tape, std::span<const GaussianVar> velocity,
                                   const Eigen::Vector2d& x_t, double dt) {
  using namespace ad;
  if (!(dt > 0.0)) throw ConfigError("integrate: dt must be > 0");
  std::vector<GaussianVar> out;
  out.reserve(velocity.size());
  Var pos = tape.leaf(Eigen::MatrixXd(x_t));
  Var c11, c12, c22;
  const double dt2 = dt * dt;
  for (std::size_t s = 0; s < velocity.size(); ++s) {
    pos = pos + affine(velocity[s].mean, dt, 0.0);
    const Var a11 = affine(velocity[s].c11, dt2, 0.0);
    const Var a12 = affine(velocity[s].c12, dt2, 0.0);
    const Var a22 = affine(velocity[s].c22, dt2, 0.0);
    c11 = s == 0 ? a11 : c11 + a11;
    c12 = s == 0 ? a12 : c12 + a12;
    c22 = s == 0 ? a22 : c22 + a22;
    out.push_back({pos, c11, c12, c22});
  }
  return out;
}

ad::Var log_prob(ad::Tape& tape, std::span<const GaussianVar> positions,
                 const Eigen::MatrixXd& gt) {
  using namespace ad;
  if (static_cast<std::size_t>(gt.cols()) != positions.size() || gt.rows() != 2) {
    throw ValidationError("log_prob: ground truth / distribution length mismatch");
  }
  if (!gt.allFinite()) throw NumericError("log_prob: non-finite ground truth");
  const Var gt_leaf = tape.leaf(gt);
  Var total;
  for (std::size_t s = 0; s < positions.size(); ++s) {
    const GaussianVar& g = positions[s];
    const Var d = slice(gt_leaf, 0, static_cast<int>(s), 2, 1) - g.mean;
    const Var d1 = elem(d, 0);
    const Var d2 = elem(d, 1);
    const Var det = cwise_mul(g.c11, g.c22) - cwise_mul(g.c12, g.c12);
    const Var quad_num = cwise_mul(cwise_mul(d1, d1), g.c22) -
                         affine(cwise_mul(cwise_mul(d1, d2), g.c12), 2.0, 0.0) +
                         cwise_mul(cwise_mul(d2, d2), g.c11);
    const Var step = affine(log(det), -0.5, -kLog2Pi) +
                     affine(cwise_div(quad_num, det), -0.5, 0.0);
    total = s == 0 ? step : total + step;
  }
  return total;
}

GaussianStep to_gaussian_step(const GaussianVar& g) {
  GaussianStep out;
  out.mean = g.mean.value().col(0);
  const double c11 = g.c11.scalar();
  const double c12 = g.c12.scalar();
  const double c22 = g.c22.scalar();
  const double l11 = std::sqrt(c11);
  const double l21 = c12 / l11;
  const double l22 = std::sqrt(std::max(c22 - l21 * l21, kCovDiagFloor * kCovDiagFloor));
  out.chol_log_d0 = std::log(l11);
  out.chol_off = l21;
  out.chol_log_d1 = std::log(l22);
  return out;
}

int argmax_mode(const Eigen::VectorXd& probs) {
  int best = 0;
  for (int i = 1; i < probs.size(); ++i) {
    if (probs(i) > probs(best)) best = i;
  }
  return best;
}

int sample_categorical(const Eigen::VectorXd& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (u < acc) return i;
  }
  return static_cast<int>(probs.size()) - 1;
}

Eigen::Vector2d sample_gaussian(const GaussianStep& g, Rng& rng) {
  Eigen::Vector2d xi(rng.normal(), rng.normal());
  return g.mean + g.chol() * xi;
}

Eigen::Matrix2Xd sample_position_trajectory(std::span<const GaussianStep> velocity,
                                            const Eigen::Vector2d& x_t, double dt, Rng& rng) {
  Eigen::Matrix2Xd positions(2, static_cast<Eigen::Index>(velocity.size()));
  Eigen::Vector2d pos = x_t;
  for (std::size_t s = 0; s < velocity.size(); ++s) {
    pos += dt * sample_gaussian(velocity[s], rng);
    positions.col(static_cast<Eigen::Index>(s)) = pos;
  }
  return positions;
}

}  // namespace trajsmooth
