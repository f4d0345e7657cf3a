#include "trajsmooth/losses.hpp"

#include <cmath>

#include "trajsmooth/errors.hpp"

namespace trajsmooth {

void LossConfig::validate() const {
  if (beta < 0.0) throw ConfigError("loss: beta must be >= 0");
  if (kl_weight < 0.0) throw ConfigError("loss: kl_weight must be >= 0");
}

namespace {

void check_trace_shapes(Eigen::Index rows, Eigen::Index cols, Eigen::Index ref_rows,
                        Eigen::Index ref_cols) {
  if (rows < 2) throw ValidationError("smooth_loss: trace needs at least two steps");
  if (cols < 1) throw ValidationError("smooth_loss: trace needs at least one class key");
  if (ref_rows >= 0 && (rows != ref_rows || cols != ref_cols)) {
    throw ValidationError("smooth_loss: mismatched trace shapes in batch");
  }
}

}  // namespace

double smooth_loss(std::span<const AttentionTrace> traces) {
  double total = 0.0;
  Eigen::Index ref_rows = -1, ref_cols = -1;
  for (const auto& trace : traces) {
    check_trace_shapes(trace.alpha.rows(), trace.alpha.cols(), ref_rows, ref_cols);
    ref_rows = trace.alpha.rows();
    ref_cols = trace.alpha.cols();
    for (Eigen::Index tau = 1; tau < trace.alpha.rows(); ++tau) {
      const double sq =
          (trace.alpha.row(tau) - trace.alpha.row(tau - 1)).squaredNorm();
      total += std::sqrt(sq + kSmoothEpsilon);
    }
  }
  return total;
}

ad::Var smooth_loss(ad::Tape& tape, std::span<const std::vector<ad::Var>> alpha_sequences) {
  using namespace ad;
  Var total = tape.scalar(0.0);
  Eigen::Index ref_rows = -1, ref_cols = -1;
  for (const auto& seq : alpha_sequences) {
    check_trace_shapes(static_cast<Eigen::Index>(seq.size()),
                       seq.empty() ? 0 : seq.front().rows(), ref_rows, ref_cols);
    ref_rows = static_cast<Eigen::Index>(seq.size());
    ref_cols = seq.front().rows();
    for (std::size_t tau = 1; tau < seq.size(); ++tau) {
      const Var diff = seq[tau] - seq[tau - 1];
      total = total + sqrt(affine(sum(cwise_mul(diff, diff)), 1.0, kSmoothEpsilon));
    }
  }
  return total;
}

double attention_total_variation(const AttentionTrace& trace) {
  double tv = 0.0;
  for (Eigen::Index tau = 1; tau < trace.alpha.rows(); ++tau) {
    tv += (trace.alpha.row(tau) - trace.alpha.row(tau - 1)).norm();
  }
  return tv;
}

double elbo_loss(double log_prob, double kl, double kl_weight) {
  return -log_prob + kl_weight * kl;
}

LossBreakdown total_loss(double nll, double kl, double smooth, const LossConfig& config) {
  config.validate();
  LossBreakdown out;
  out.nll = nll;
  out.kl = kl;
  out.smooth = smooth;
  out.beta = config.beta;
  const double l0 = nll + config.kl_weight * kl;
  out.total = config.beta == 0.0 ? l0 : l0 + config.beta * smooth;
  return out;
}

}  // namespace trajsmooth
