#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trajsmooth/autodiff.hpp"
#include "trajsmooth/nn.hpp"
#include "trajsmooth/params.hpp"
#include "trajsmooth/rng.hpp"

namespace trajsmooth {

struct LatentConfig {
  int num_modes = 5;  // |Z|
  int future_hidden_dim = 8;
  void validate() const;
};

// Covariance Cholesky diagonals are floored at this scale to keep every
// emitted Gaussian SPD.
inline constexpr double kCovDiagFloor = 1e-6;

// Bivariate Gaussian with Cholesky-parameterized covariance; diagonal entries
// stored as logs.
struct GaussianStep {
  Eigen::Vector2d mean{Eigen::Vector2d::Zero()};
  double chol_log_d0{0.0};
  double chol_off{0.0};
  double chol_log_d1{0.0};

  Eigen::Matrix2d chol() const;
  Eigen::Matrix2d covariance() const;
  double log_det_covariance() const { return 2.0 * (chol_log_d0 + chol_log_d1); }
};

enum class OutputMode { MostLikely, Sampled };

struct PredictionOutput {
  std::vector<GaussianStep> position_dists;  // one per horizon step
  Eigen::VectorXd z_dist;                    // categorical over |Z|
  OutputMode mode{OutputMode::MostLikely};
  std::vector<Eigen::Matrix2Xd> samples;     // optional sampled position trajectories

  Eigen::Matrix2Xd point_trajectory() const;
};

void register_cvae(ParamStore& store, int e_x_dim, const LatentConfig& latent,
                   int latent_hidden_dim, int decoder_hidden_dim);

struct CvaeRefs {
  GruRef future;
  MlpRef prior, posterior;
  ad::Var dec_Winit, dec_binit;
  GruRef dec;
  ad::Var dec_Wout, dec_bout;
  int future_hidden_dim{0};
  int decoder_hidden_dim{0};
  int num_modes{0};
};
CvaeRefs cvae_refs(const TapeParams& params, const LatentConfig& latent,
                   int decoder_hidden_dim);

// Recurrent summary of the ground-truth future (rows x, y, vx, vy); training
// side of the posterior only.
ad::Var encode_future(ad::Tape& tape, const GruRef& cell, const Eigen::MatrixXd& future_states,
                      int hidden_dim);

ad::Var prior_logits(const MlpRef& head, const ad::Var& e_x);
ad::Var posterior_logits(const MlpRef& head, const ad::Var& e_x, const ad::Var& e_y);

// KL(q || p) in nats, from logits via log-softmax for stability.
ad::Var kl_from_logits(ad::Tape& tape, const ad::Var& q_logits, const ad::Var& p_logits);

// Plain-number KL between two categorical distributions; p is floored at
// 1e-12 and 0*ln 0 = 0.
double kl_categorical(const Eigen::VectorXd& q, const Eigen::VectorXd& p);

// Bivariate Gaussian on the tape; covariance kept as its three entries.
struct GaussianVar {
  ad::Var mean;  // 2x1
  ad::Var c11, c12, c22;
};

// Recurrent decoder conditioned on (e_x, one-hot z); emits `horizon` velocity
// Gaussians autoregressively (the mean feeds the next step), starting from
// the focal's current velocity.
std::vector<GaussianVar> decode(ad::Tape& tape, const CvaeRefs& refs, const ad::Var& e_x,
                                int z, const Eigen::Vector2d& v_t, int horizon);

// Single-integrator accumulation: position mean x_t + dt * cumsum(v_mean),
// covariance dt^2 * cumsum(v_cov).
std::vector<GaussianVar> integrate(ad::Tape& tape, std::span<const GaussianVar> velocity,
                                   const Eigen::Vector2d& x_t, double dt);

// Sum over steps of the exact bivariate Gaussian log-density at gt (2 x H).
ad::Var log_prob(ad::Tape& tape, std::span<const GaussianVar> positions,
                 const Eigen::MatrixXd& gt);

GaussianStep to_gaussian_step(const GaussianVar& g);

// argmax with ties broken by the lowest index
int argmax_mode(const Eigen::VectorXd& probs);

int sample_categorical(const Eigen::VectorXd& probs, Rng& rng);
Eigen::Vector2d sample_gaussian(const GaussianStep& g, Rng& rng);

// Draw each velocity step from its Gaussian and integrate from x_t.
Eigen::Matrix2Xd sample_position_trajectory(std::span<const GaussianStep> velocity,
                                            const Eigen::Vector2d& x_t, double dt, Rng& rng);

}  // namespace trajsmooth
