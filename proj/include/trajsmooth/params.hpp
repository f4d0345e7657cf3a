#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "trajsmooth/autodiff.hpp"

namespace trajsmooth {

// Named learnable arrays with a stable iteration order (registration order),
// so flattening, Adam state and checkpoints all line up.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Eigen::MatrixXd value;
    int fan_in;  // init scale, 1/sqrt(fan_in)
  };

  Eigen::MatrixXd& add(const std::string& name, int rows, int cols, int fan_in);
  const Eigen::MatrixXd& at(std::string_view name) const;
  Eigen::MatrixXd& at(std::string_view name);
  bool has(std::string_view name) const;

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }
  int total_parameters() const;

  Eigen::VectorXd flatten() const;
  void assign_flat(const Eigen::VectorXd& flat);

  // uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per array, seeded
  void init_uniform(std::uint64_t seed);
  void set_zero();

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// All parameter arrays pushed onto a tape as leaves, aligned with the store's
// entry order.
struct TapeParams {
  const ParamStore* store{nullptr};
  std::vector<ad::Var> vars;

  ad::Var at(std::string_view name) const;
};

TapeParams push_params(ad::Tape& tape, const ParamStore& store);

// Flattened leaf gradients (entry order); call after Tape::backward.
Eigen::VectorXd gather_gradients(const ad::Tape& tape, const TapeParams& params);

}  // namespace trajsmooth
