#pragma once

#include <span>
#include <vector>

#include "trajsmooth/autodiff.hpp"
#include "trajsmooth/encoder.hpp"

namespace trajsmooth {

struct LossConfig {
  double beta = 0.0;      // weight of the attention smoothness penalty
  double kl_weight = 1.0;
  void validate() const;  // beta >= 0, kl_weight >= 0
};

struct LossBreakdown {
  double nll{0.0};
  double kl{0.0};
  double smooth{0.0};
  double total{0.0};
  double beta{0.0};
};

// Stabilizer inside the total-variation square root; the root is otherwise
// non-differentiable at zero difference. Adds at most sqrt(eps) per term.
inline constexpr double kSmoothEpsilon = 1e-12;

// Vectorial total variation of the attention weights, summed over window
// steps and over the batch:
//   sum_tau sum_i sqrt(sum_j (alpha_ij(tau) - alpha_ij(tau-1))^2 + eps)
// Unnormalized by batch size or window length; beta absorbs scale.
double smooth_loss(std::span<const AttentionTrace> traces);

// Graph-side version over per-step alpha vectors, one sequence per agent.
ad::Var smooth_loss(ad::Tape& tape, std::span<const std::vector<ad::Var>> alpha_sequences);

// Per-agent temporal total variation without the epsilon term,
// sum_tau ||alpha(tau) - alpha(tau-1)||_2; the smoothing-effect diagnostic.
double attention_total_variation(const AttentionTrace& trace);

// Stand-in original objective: negative ELBO.
double elbo_loss(double log_prob, double kl, double kl_weight);

// total = L0 + beta * smooth. With beta == 0 the smooth term is skipped
// outright so the result is bit-for-bit the base loss.
LossBreakdown total_loss(double nll, double kl, double smooth, const LossConfig& config);

}  // namespace trajsmooth
