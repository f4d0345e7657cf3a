#include "trajsmooth/autodiff.hpp"

#include <cassert>
#include <cmath>

namespace trajsmooth::ad {

const Mat& Var::value() const { return tape_->value(*this); }

Var Tape::leaf(Mat value) {
  return emit(Op::Leaf, -1, -1, std::move(value));
}

Var Tape::scalar(double v) {
  Mat m(1, 1);
  m(0, 0) = v;
  return leaf(std::move(m));
}

Var Tape::emit(Op op, int a, int b, Mat value, double c0, double c1, int i0, int i1, int i2,
               int i3) {
  Node node;
  node.op = op;
  node.a = a;
  node.b = b;
  node.c0 = c0;
  node.c1 = c1;
  node.i0 = i0;
  node.i1 = i1;
  node.i2 = i2;
  node.i3 = i3;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::backward(const Var& root) {
  assert(root.tape() == this);
  assert(root.value().rows() == 1 && root.value().cols() == 1);

  for (auto& node : nodes_) {
    node.grad = Mat::Zero(node.value.rows(), node.value.cols());
  }
  nodes_[static_cast<std::size_t>(root.index())].grad(0, 0) = 1.0;

  for (int i = root.index(); i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.op == Op::Leaf) continue;
    // skip dead branches and nodes past the root
    bool all_zero = true;
    for (Eigen::Index k = 0; k < n.grad.size(); ++k) {
      if (n.grad.data()[k] != 0.0) {
        all_zero = false;
        break;
      }
    }
    if (all_zero) continue;
    const Mat& g = n.grad;
    Mat* ga = n.a >= 0 ? &nodes_[static_cast<std::size_t>(n.a)].grad : nullptr;
    Mat* gb = n.b >= 0 ? &nodes_[static_cast<std::size_t>(n.b)].grad : nullptr;
    const Mat* va = n.a >= 0 ? &nodes_[static_cast<std::size_t>(n.a)].value : nullptr;
    const Mat* vb = n.b >= 0 ? &nodes_[static_cast<std::size_t>(n.b)].value : nullptr;

    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::Add:
        *ga += g;
        *gb += g;
        break;
      case Op::Sub:
        *ga += g;
        *gb -= g;
        break;
      case Op::MatMul:
        ga->noalias() += g * vb->transpose();
        gb->noalias() += va->transpose() * g;
        break;
      case Op::CwiseMul:
        *ga += g.cwiseProduct(*vb);
        *gb += g.cwiseProduct(*va);
        break;
      case Op::CwiseDiv:
        *ga += g.cwiseQuotient(*vb);
        *gb -= g.cwiseProduct(n.value).cwiseQuotient(*vb);
        break;
      case Op::ScalarMul:
        *ga += g * (*vb)(0, 0);
        (*gb)(0, 0) += g.cwiseProduct(*va).sum();
        break;
      case Op::Affine:
        *ga += n.c0 * g;
        break;
      case Op::Tanh:
        *ga += g.cwiseProduct(Mat::Ones(n.value.rows(), n.value.cols()) -
                              n.value.cwiseProduct(n.value));
        break;
      case Op::Sigmoid:
        *ga += g.cwiseProduct(
            n.value.cwiseProduct(Mat::Ones(n.value.rows(), n.value.cols()) - n.value));
        break;
      case Op::Exp:
        *ga += g.cwiseProduct(n.value);
        break;
      case Op::Log:
        *ga += g.cwiseQuotient(*va);
        break;
      case Op::Sqrt:
        *ga += 0.5 * g.cwiseQuotient(n.value);
        break;
      case Op::Softmax: {
        const Mat& s = n.value;
        const double inner = s.cwiseProduct(g).sum();
        *ga += s.cwiseProduct((g.array() - inner).matrix());
        break;
      }
      case Op::LogSumExp: {
        const double lse = n.value(0, 0);
        *ga += g(0, 0) * (va->array() - lse).exp().matrix();
        break;
      }
      case Op::Vcat:
        *ga += g.topRows(va->rows());
        *gb += g.bottomRows(vb->rows());
        break;
      case Op::Slice:
        ga->block(n.i0, n.i1, n.i2, n.i3) += g;
        break;
      case Op::Sum:
        ga->array() += g(0, 0);
        break;
    }
  }
}

namespace {

Tape* same_tape(const Var& a, const Var& b) {
  assert(a.tape() != nullptr && a.tape() == b.tape());
  return a.tape();
}

}  // namespace

Var operator+(const Var& a, const Var& b) {
  Tape* t = same_tape(a, b);
  assert(a.value().rows() == b.value().rows() && a.value().cols() == b.value().cols());
  return t->emit(Op::Add, a.index(), b.index(), a.value() + b.value());
}

Var operator-(const Var& a, const Var& b) {
  Tape* t = same_tape(a, b);
  assert(a.value().rows() == b.value().rows() && a.value().cols() == b.value().cols());
  return t->emit(Op::Sub, a.index(), b.index(), a.value() - b.value());
}

Var operator*(const Var& a, const Var& b) {
  Tape* t = same_tape(a, b);
  assert(a.value().cols() == b.value().rows());
  return t->emit(Op::MatMul, a.index(), b.index(), a.value() * b.value());
}

Var cwise_mul(const Var& a, const Var& b) {
  Tape* t = same_tape(a, b);
  return t->emit(Op::CwiseMul, a.index(), b.index(), a.value().cwiseProduct(b.value()));
}

Var cwise_div(const Var& a, const Var& b) {
  Tape* t = same_tape(a, b);
  return t->emit(Op::CwiseDiv, a.index(), b.index(), a.value().cwiseQuotient(b.value()));
}

Var scalar_mul(const Var& a, const Var& s) {
  Tape* t = same_tape(a, s);
  assert(s.value().size() == 1);
  return t->emit(Op::ScalarMul, a.index(), s.index(), a.value() * s.value()(0, 0));
}

Var affine(const Var& x, double scale, double shift) {
  return x.tape()->emit(Op::Affine, x.index(), -1,
                        (scale * x.value().array() + shift).matrix(), scale, shift);
}

Var operator*(double s, const Var& x) { return affine(x, s, 0.0); }

Var operator-(const Var& x) { return affine(x, -1.0, 0.0); }

Var tanh(const Var& x) {
  return x.tape()->emit(Op::Tanh, x.index(), -1, x.value().array().tanh().matrix());
}

Var sigmoid(const Var& x) {
  return x.tape()->emit(Op::Sigmoid, x.index(), -1,
                        (0.5 * (0.5 * x.value().array()).tanh() + 0.5).matrix());
}

Var exp(const Var& x) {
  return x.tape()->emit(Op::Exp, x.index(), -1, x.value().array().exp().matrix());
}

Var log(const Var& x) {
  return x.tape()->emit(Op::Log, x.index(), -1, x.value().array().log().matrix());
}

Var sqrt(const Var& x) {
  return x.tape()->emit(Op::Sqrt, x.index(), -1, x.value().array().sqrt().matrix());
}

Var softmax(const Var& x) {
  assert(x.value().cols() == 1);
  const double m = x.value().maxCoeff();
  Eigen::ArrayXd e = (x.value().col(0).array() - m).exp();
  Mat s = (e / e.sum()).matrix();
  return x.tape()->emit(Op::Softmax, x.index(), -1, std::move(s));
}

Var logsumexp(const Var& x) {
  assert(x.value().cols() == 1);
  const double m = x.value().maxCoeff();
  Mat v(1, 1);
  v(0, 0) = m + std::log((x.value().col(0).array() - m).exp().sum());
  return x.tape()->emit(Op::LogSumExp, x.index(), -1, std::move(v));
}

Var vcat(const Var& a, const Var& b) {
  Tape* t = same_tape(a, b);
  assert(a.value().cols() == b.value().cols());
  Mat v(a.value().rows() + b.value().rows(), a.value().cols());
  v.topRows(a.value().rows()) = a.value();
  v.bottomRows(b.value().rows()) = b.value();
  return t->emit(Op::Vcat, a.index(), b.index(), std::move(v));
}

Var slice(const Var& x, int r0, int c0, int rows, int cols) {
  assert(r0 >= 0 && c0 >= 0 && r0 + rows <= x.value().rows() && c0 + cols <= x.value().cols());
  return x.tape()->emit(Op::Slice, x.index(), -1, x.value().block(r0, c0, rows, cols), 0.0,
                        0.0, r0, c0, rows, cols);
}

Var row(const Var& x, int r) { return slice(x, r, 0, 1, static_cast<int>(x.value().cols())); }

Var elem(const Var& x, int r, int c) { return slice(x, r, c, 1, 1); }

Var sum(const Var& x) {
  Mat v(1, 1);
  v(0, 0) = x.value().sum();
  return x.tape()->emit(Op::Sum, x.index(), -1, std::move(v));
}

Var dot(const Var& a, const Var& b) { return sum(cwise_mul(a, b)); }

}  // namespace trajsmooth::ad
