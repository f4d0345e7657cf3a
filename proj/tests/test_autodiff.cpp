#include <doctest.h>

#include "oracles.hpp"
#include "trajsmooth/autodiff.hpp"
#include "trajsmooth/rng.hpp"

using namespace trajsmooth;
using ad::Tape;
using ad::Var;

namespace {

Eigen::MatrixXd random_mat(Rng& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

// checks d(graph(x))/dx against central differences for one leaf
void check_gradient(const std::function<Var(Tape&, Var)>& graph, const Eigen::MatrixXd& x0,
                    double tol = 1e-7) {
  Tape tape;
  const Var x = tape.leaf(x0);
  const Var y = graph(tape, x);
  REQUIRE(y.rows() == 1);
  REQUIRE(y.cols() == 1);
  tape.backward(y);
  const Eigen::MatrixXd analytic = tape.grad(x);

  const auto value_fn = [&](const Eigen::VectorXd& flat) {
    Eigen::MatrixXd xm = x0;
    Eigen::Map<Eigen::VectorXd>(xm.data(), xm.size()) = flat;
    Tape t;
    return graph(t, t.leaf(xm)).scalar();
  };
  const Eigen::VectorXd numeric = oracles::finite_difference_gradient(
      value_fn, Eigen::Map<const Eigen::VectorXd>(x0.data(), x0.size()));
  const Eigen::VectorXd flat_analytic =
      Eigen::Map<const Eigen::VectorXd>(analytic.data(), analytic.size());
  CHECK(oracles::max_rel_error(flat_analytic, numeric) < tol);
}

}  // namespace

TEST_CASE("tape evaluates values eagerly") {
  Tape tape;
  const Var a = tape.leaf(Eigen::MatrixXd::Constant(2, 2, 3.0));
  const Var b = tape.leaf(Eigen::MatrixXd::Identity(2, 2));
  CHECK((a * b).value() == Eigen::MatrixXd::Constant(2, 2, 3.0) * Eigen::MatrixXd::Identity(2, 2));
  CHECK(ad::sum(a).scalar() == doctest::Approx(12.0));
  CHECK(ad::elem(a, 1, 1).scalar() == doctest::Approx(3.0));
}

TEST_CASE("gradient of a quadratic form is exact") {
  Rng rng(7);
  Eigen::MatrixXd A = random_mat(rng, 4, 4);
  A = (A + A.transpose()).eval();  // symmetric
  const Eigen::MatrixXd x0 = random_mat(rng, 4, 1);

  Tape tape;
  const Var x = tape.leaf(x0);
  const Var a = tape.leaf(A);
  const Var y = ad::sum(ad::cwise_mul(x, a * x));  // x^T A x
  tape.backward(y);
  const Eigen::MatrixXd expected = 2.0 * A * x0;  // analytic, up to round-off
  CHECK((tape.grad(x) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("elementwise and activation ops match finite differences") {
  Rng rng(11);
  const Eigen::MatrixXd x0 = random_mat(rng, 3, 2);
  const Eigen::MatrixXd w = random_mat(rng, 3, 2);

  check_gradient([](Tape& t, Var x) { return ad::sum(ad::tanh(x)); }, x0);
  check_gradient([](Tape& t, Var x) { return ad::sum(ad::sigmoid(x)); }, x0);
  check_gradient([](Tape& t, Var x) { return ad::sum(ad::exp(x)); }, x0);
  check_gradient([](Tape& t, Var x) { return ad::sum(ad::affine(x, -2.5, 0.75)); }, x0);
  check_gradient(
      [&](Tape& t, Var x) { return ad::sum(ad::cwise_mul(x, t.leaf(w))); }, x0);
  check_gradient(
      [&](Tape& t, Var x) { return ad::sum(ad::cwise_div(t.leaf(w), x)); },
      random_mat(rng, 3, 2, 0.5, 2.0));
  check_gradient([](Tape& t, Var x) { return ad::sum(ad::log(x)); },
                 random_mat(rng, 3, 2, 0.5, 3.0));
  check_gradient([](Tape& t, Var x) { return ad::sum(ad::sqrt(x)); },
                 random_mat(rng, 3, 2, 0.5, 3.0));
}

TEST_CASE("matrix product, concat, slice and broadcast ops match finite differences") {
  Rng rng(13);
  const Eigen::MatrixXd x0 = random_mat(rng, 4, 1);
  const Eigen::MatrixXd w = random_mat(rng, 3, 4);
  const Eigen::MatrixXd u = random_mat(rng, 4, 1);

  check_gradient([&](Tape& t, Var x) { return ad::sum(ad::tanh(t.leaf(w) * x)); }, x0);
  check_gradient([&](Tape& t, Var x) { return ad::sum(ad::vcat(x, ad::cwise_mul(x, x))); },
                 x0);
  check_gradient([&](Tape& t, Var x) { return ad::sum(ad::slice(x, 1, 0, 2, 1)); }, x0);
  check_gradient([&](Tape& t, Var x) { return ad::dot(x, t.leaf(u)); }, x0);
  check_gradient(
      [&](Tape& t, Var x) {
        return ad::sum(ad::scalar_mul(t.leaf(u), ad::elem(x, 2)));
      },
      x0);
}

TEST_CASE("softmax and logsumexp match finite differences and normalize") {
  Rng rng(17);
  const Eigen::MatrixXd x0 = random_mat(rng, 5, 1, -3.0, 3.0);

  Tape tape;
  const Var s = ad::softmax(tape.leaf(x0));
  CHECK(s.value().sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.value().minCoeff() > 0.0);

  check_gradient(
      [&](Tape& t, Var x) {
        // weighted sum probes all softmax partials
        Eigen::MatrixXd w(5, 1);
        w << 0.9, -0.3, 0.2, 1.7, -1.1;
        return ad::dot(ad::softmax(x), t.leaf(w));
      },
      x0);
  check_gradient([](Tape& t, Var x) { return ad::logsumexp(x); }, x0);

  // extreme logits stay finite
  Eigen::MatrixXd big(3, 1);
  big << 900.0, -900.0, 0.0;
  Tape t2;
  const Var s2 = ad::softmax(t2.leaf(big));
  CHECK(s2.value().allFinite());
  CHECK(ad::logsumexp(t2.leaf(big)).scalar() == doctest::Approx(900.0));
}

TEST_CASE("gradients accumulate when a node is used twice") {
  const Eigen::MatrixXd x0 = Eigen::MatrixXd::Constant(2, 1, 1.5);
  Tape tape;
  const Var x = tape.leaf(x0);
  const Var y = ad::sum(ad::cwise_mul(x, x) + x);  // d/dx = 2x + 1
  tape.backward(y);
  CHECK(tape.grad(x)(0, 0) == doctest::Approx(4.0));
  CHECK(tape.grad(x)(1, 0) == doctest::Approx(4.0));
}

TEST_CASE("a composed recurrent-style graph matches finite differences") {
  Rng rng(23);
  const Eigen::MatrixXd w = random_mat(rng, 3, 3, -0.7, 0.7);
  const Eigen::MatrixXd x0 = random_mat(rng, 3, 1);

  check_gradient(
      [&](Tape& t, Var x) {
        Var h = t.leaf(Eigen::MatrixXd::Zero(3, 1));
        const Var wv = t.leaf(w);
        for (int step = 0; step < 4; ++step) {
          h = ad::tanh(wv * h + x);
        }
        return ad::sum(ad::cwise_mul(h, h));
      },
      x0, 1e-6);
}
