#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace trajsmooth::ad {

using Mat = Eigen::MatrixXd;

class Tape;

// Handle to a node on a Tape; cheap to copy, invalidated by Tape::reset().
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int index) : tape_(tape), index_(index) {}

  Tape* tape() const { return tape_; }
  int index() const { return index_; }
  bool valid() const { return tape_ != nullptr; }
  const Mat& value() const;
  int rows() const { return static_cast<int>(value().rows()); }
  int cols() const { return static_cast<int>(value().cols()); }
  double scalar() const { return value()(0, 0); }

 private:
  Tape* tape_{nullptr};
  int index_{-1};
};

enum class Op : std::uint8_t {
  Leaf,
  Add,
  Sub,
  MatMul,
  CwiseMul,
  CwiseDiv,
  ScalarMul,  // matrix times a 1x1 var
  Affine,     // c0 * x + c1, elementwise
  Tanh,
  Sigmoid,
  Exp,
  Log,
  Sqrt,
  Softmax,    // column vector
  LogSumExp,  // column vector -> 1x1
  Vcat,
  Slice,
  Sum,        // all elements -> 1x1
};

// Eagerly evaluated reverse-mode tape over dense doubles. One backward() call
// accumulates gradients for every node from a 1x1 root.
class Tape {
 public:
  Var leaf(Mat value);
  Var scalar(double v);

  std::size_t size() const { return nodes_.size(); }
  void reset() { nodes_.clear(); }

  const Mat& value(const Var& v) const { return nodes_[static_cast<std::size_t>(v.index())].value; }
  const Mat& grad(const Var& v) const { return nodes_[static_cast<std::size_t>(v.index())].grad; }

  void backward(const Var& root);

  // internal; use the free-function ops below
  Var emit(Op op, int a, int b, Mat value, double c0 = 0.0, double c1 = 0.0, int i0 = 0,
           int i1 = 0, int i2 = 0, int i3 = 0);

 private:
  struct Node {
    Op op;
    int a, b;
    double c0, c1;
    int i0, i1, i2, i3;
    Mat value;
    Mat grad;
  };
  std::vector<Node> nodes_;
};

// ---- ops; operands must live on the same tape ----

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);  // matrix product
Var cwise_mul(const Var& a, const Var& b);
Var cwise_div(const Var& a, const Var& b);
Var scalar_mul(const Var& a, const Var& s);  // s is 1x1
Var affine(const Var& x, double scale, double shift);
Var operator*(double s, const Var& x);
Var operator-(const Var& x);
Var tanh(const Var& x);
Var sigmoid(const Var& x);
Var exp(const Var& x);
Var log(const Var& x);
Var sqrt(const Var& x);
Var softmax(const Var& x);
Var logsumexp(const Var& x);
Var vcat(const Var& a, const Var& b);
Var slice(const Var& x, int r0, int c0, int rows, int cols);
Var row(const Var& x, int r);
Var elem(const Var& x, int r, int c = 0);
Var sum(const Var& x);
Var dot(const Var& a, const Var& b);

}  // namespace trajsmooth::ad
