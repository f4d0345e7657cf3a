#include "trajsmooth/params.hpp"

#include <cmath>

#include "trajsmooth/errors.hpp"
#include "trajsmooth/rng.hpp"

namespace trajsmooth {

Eigen::MatrixXd& ParamStore::add(const std::string& name, int rows, int cols, int fan_in) {
  if (index_.count(name) != 0) {
    throw ValidationError("duplicate parameter array '" + name + "'");
  }
  index_[name] = entries_.size();
  entries_.push_back({name, Eigen::MatrixXd::Zero(rows, cols), fan_in});
  return entries_.back().value;
}

const Eigen::MatrixXd& ParamStore::at(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ValidationError("unknown parameter array '" + std::string(name) + "'");
  return entries_[it->second].value;
}

Eigen::MatrixXd& ParamStore::at(std::string_view name) {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ValidationError("unknown parameter array '" + std::string(name) + "'");
  return entries_[it->second].value;
}

bool ParamStore::has(std::string_view name) const {
  return index_.count(std::string(name)) != 0;
}

int ParamStore::total_parameters() const {
  int n = 0;
  for (const auto& e : entries_) n += static_cast<int>(e.value.size());
  return n;
}

Eigen::VectorXd ParamStore::flatten() const {
  Eigen::VectorXd flat(total_parameters());
  Eigen::Index pos = 0;
  for (const auto& e : entries_) {
    flat.segment(pos, e.value.size()) =
        Eigen::Map<const Eigen::VectorXd>(e.value.data(), e.value.size());
    pos += e.value.size();
  }
  return flat;
}

void ParamStore::assign_flat(const Eigen::VectorXd& flat) {
  if (flat.size() != total_parameters()) {
    throw ValidationError("flat parameter vector has the wrong length");
  }
  Eigen::Index pos = 0;
  for (auto& e : entries_) {
    Eigen::Map<Eigen::VectorXd>(e.value.data(), e.value.size()) =
        flat.segment(pos, e.value.size());
    pos += e.value.size();
  }
}

void ParamStore::init_uniform(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& e : entries_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(e.fan_in, 1)));
    for (Eigen::Index k = 0; k < e.value.size(); ++k) {
      e.value.data()[k] = rng.uniform(-bound, bound);
    }
  }
}

void ParamStore::set_zero() {
  for (auto& e : entries_) e.value.setZero();
}

ad::Var TapeParams::at(std::string_view name) const {
  for (std::size_t i = 0; i < store->entries().size(); ++i) {
    if (store->entries()[i].name == name) return vars[i];
  }
  throw ValidationError("unknown parameter array '" + std::string(name) + "'");
}

TapeParams push_params(ad::Tape& tape, const ParamStore& store) {
  TapeParams out;
  out.store = &store;
  out.vars.reserve(store.entries().size());
  for (const auto& e : store.entries()) {
    out.vars.push_back(tape.leaf(e.value));
  }
  return out;
}

Eigen::VectorXd gather_gradients(const ad::Tape& tape, const TapeParams& params) {
  Eigen::VectorXd flat(params.store->total_parameters());
  Eigen::Index pos = 0;
  for (std::size_t i = 0; i < params.vars.size(); ++i) {
    const Eigen::MatrixXd& g = tape.grad(params.vars[i]);
    flat.segment(pos, g.size()) = Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
    pos += g.size();
  }
  return flat;
}

}  // namespace trajsmooth
