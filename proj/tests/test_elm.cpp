#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "swelm/elm.hpp"
#include "swelm/rng.hpp"

using namespace swelm;
using Catch::Approx;

namespace {

HiddenLayer layer_from(std::initializer_list<std::initializer_list<double>> w,
                       std::initializer_list<double> b, double p = 0.0) {
  Eigen::MatrixXd weights(static_cast<Eigen::Index>(w.size()),
                          static_cast<Eigen::Index>(w.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : w) {
    Eigen::Index c = 0;
    for (double v : row) weights(r, c++) = v;
    ++r;
  }
  Eigen::VectorXd biases(static_cast<Eigen::Index>(b.size()));
  Eigen::Index i = 0;
  for (double v : b) biases(i++) = v;
  return HiddenLayer(std::move(weights), std::move(biases), p);
}

}  // namespace

TEST_CASE("design matrix of the zero layer is all ones", "[elm]") {
  HiddenLayer layer = layer_from({{0.0, 0.0}, {0.0, 0.0}}, {0.0, 0.0});
  Eigen::MatrixXd x(3, 2);
  x << 0.1, 0.9, 0.5, 0.5, 0.0, 1.0;
  Eigen::MatrixXd h = design_matrix(layer, x);
  REQUIRE((h.array() == 1.0).all());
}

TEST_CASE("design matrix matches hand evaluations", "[elm]") {
  HiddenLayer one = layer_from({{1.0}}, {0.0});
  Eigen::MatrixXd x1(1, 1);
  x1 << 1.0;
  REQUIRE(design_matrix(one, x1)(0, 0) == Approx(std::exp(1.0)).epsilon(1e-14));

  HiddenLayer two = layer_from({{1.0, 1.0}}, {std::log(2.0)});
  Eigen::MatrixXd x2(1, 2);
  x2 << 0.5, 0.5;
  REQUIRE(design_matrix(two, x2)(0, 0) == Approx(2.0 * std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("design matrix rejects dimension mismatch and overflow", "[elm]") {
  HiddenLayer layer = layer_from({{1.0, 2.0}}, {0.0});
  Eigen::MatrixXd bad(1, 3);
  bad.setConstant(0.5);
  REQUIRE_THROWS_AS(design_matrix(layer, bad), ConfigError);

  HiddenLayer huge = layer_from({{800.0}}, {0.0});
  Eigen::MatrixXd x(1, 1);
  x << 1.0;
  REQUIRE_THROWS_AS(design_matrix(huge, x), NumericError);
}

TEST_CASE("design matrix entries are strictly positive", "[elm]") {
  Eigen::MatrixXd w = sample_gaussian_matrix(6, 3, {5, "weights"});
  Eigen::VectorXd b = sample_gaussian_matrix(6, 1, {5, "biases"});
  HiddenLayer layer(w, b);
  Eigen::MatrixXd x = sample_lhs(10, 3, {5, "lhs"}).points;
  REQUIRE(design_matrix(layer, x).minCoeff() > 0.0);
}

TEST_CASE("identity design recovers targets as alpha vanishes", "[elm]") {
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(4, 4);
  Eigen::VectorXd y(4);
  y << 1.0, -2.0, 3.0, 0.5;
  RidgeSvd solver(h, y);
  Eigen::VectorXd beta = solver.solve(1e-14);
  REQUIRE((beta - y).norm() < 1e-10);
  REQUIRE((solver.solve(0.0) - y).norm() < 1e-12);
}

TEST_CASE("huge alpha shrinks the solution toward zero", "[elm]") {
  Eigen::MatrixXd h = sample_gaussian_matrix(12, 5, {8, "h"});
  Eigen::VectorXd y = sample_gaussian_matrix(12, 1, {8, "y"});
  RidgeSvd solver(h, y);
  const double alpha = 1e8 * (h.transpose() * h).norm();
  Eigen::VectorXd beta = solver.solve(alpha);
  REQUIRE(beta.norm() <= 1e-6 * y.norm() / h.norm());
}

TEST_CASE("two by two ridge solves by hand", "[elm]") {
  Eigen::MatrixXd h(2, 2);
  h << 1.0, 0.0, 0.0, 2.0;
  Eigen::VectorXd y(2);
  y << 1.0, 2.0;
  RidgeSvd solver(h, y);
  Eigen::VectorXd beta = solver.solve(1.0);
  REQUIRE(beta(0) == Approx(0.5).epsilon(1e-13));
  REQUIRE(beta(1) == Approx(0.8).epsilon(1e-13));
}

TEST_CASE("rank-deficient design with alpha zero is rejected", "[elm]") {
  Eigen::MatrixXd h(4, 2);
  h.col(0).setConstant(1.0);
  h.col(1).setConstant(2.0);  // dependent columns
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  RidgeSvd solver(h, y);
  REQUIRE_THROWS_AS(solver.solve(0.0), NumericError);
  REQUIRE_NOTHROW(solver.solve(1e-3));
}

TEST_CASE("non-finite data is rejected", "[elm]") {
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd y(2);
  y << 1.0, std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(RidgeSvd(h, y), NumericError);
}

TEST_CASE("trained output weights satisfy the normal equations", "[elm]") {
  Eigen::MatrixXd w = sample_gaussian_matrix(8, 3, {15, "weights"});
  Eigen::VectorXd b = sample_gaussian_matrix(8, 1, {15, "biases"});
  HiddenLayer layer(w, b);
  Eigen::MatrixXd x = sample_lhs(20, 3, {15, "lhs"}).points;
  Eigen::VectorXd y = x.rowwise().sum();
  Dataset data(x, y);
  const double alpha = 1e-3;
  TrainedSurrogate s = ridge_train(layer, data, alpha);
  Eigen::MatrixXd h = design_matrix(layer, x);
  Eigen::VectorXd hty = h.transpose() * y;
  Eigen::VectorXd residual =
      (h.transpose() * h + alpha * Eigen::MatrixXd::Identity(8, 8)) * s.output_weights() - hty;
  REQUIRE(residual.norm() <= 1e-10 * hty.norm());
  REQUIRE(s.training_stats().train_size == 20);
}

TEST_CASE("ridge objective does not decrease under perturbations", "[elm]") {
  Eigen::MatrixXd h = sample_gaussian_matrix(10, 6, {33, "h"});
  Eigen::VectorXd y = sample_gaussian_matrix(10, 1, {33, "y"});
  const double alpha = 0.05;
  RidgeSvd solver(h, y);
  Eigen::VectorXd beta = solver.solve(alpha);
  auto objective = [&](const Eigen::VectorXd& v) {
    return 0.5 * (h * v - y).squaredNorm() + 0.5 * alpha * v.squaredNorm();
  };
  const double base = objective(beta);
  RandomStream stream({33, "perturbations"});
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd delta(beta.size());
    for (Eigen::Index i = 0; i < delta.size(); ++i) delta(i) = stream.next_gaussian();
    delta *= 1e-3 / delta.norm();
    REQUIRE(objective(beta + delta) >= base - 1e-12 * base);
  }
}

TEST_CASE("solution norm shrinks monotonically in alpha", "[elm]") {
  Eigen::MatrixXd h = sample_gaussian_matrix(15, 6, {44, "h"});
  Eigen::VectorXd y = sample_gaussian_matrix(15, 1, {44, "y"});
  RidgeSvd solver(h, y);
  double previous = std::numeric_limits<double>::infinity();
  for (double alpha : {1e-6, 1e-4, 1e-2, 1.0, 100.0}) {
    const double norm = solver.solve(alpha).norm();
    REQUIRE(norm <= previous * (1.0 + 1e-12));
    previous = norm;
  }
}

TEST_CASE("predict handles degenerate output weights", "[elm]") {
  HiddenLayer layer = layer_from({{0.3, -0.2}, {0.3, -0.2}}, {0.1, 0.1});
  Eigen::VectorXd x(2);
  x << 0.4, 0.6;

  TrainedSurrogate zero(layer, Eigen::VectorXd::Zero(2), 1e-3, {});
  REQUIRE(predict(zero, x) == 0.0);

  Eigen::VectorXd cancel(2);
  cancel << 1.0, -1.0;
  TrainedSurrogate cancelling(layer, cancel, 1e-3, {});
  REQUIRE(predict(cancelling, x) == Approx(0.0).margin(1e-15));

  HiddenLayer constant = layer_from({{0.0, 0.0}}, {0.0});
  TrainedSurrogate one(constant, Eigen::VectorXd::Ones(1), 1e-3, {});
  REQUIRE(predict(one, x) == 1.0);

  Eigen::VectorXd bad(3);
  bad << 0.1, 0.2, 0.3;
  REQUIRE_THROWS_AS(predict(one, bad), ConfigError);
}

TEST_CASE("predict agrees with the design matrix row", "[elm]") {
  Eigen::MatrixXd w = sample_gaussian_matrix(7, 4, {66, "weights"});
  Eigen::VectorXd b = sample_gaussian_matrix(7, 1, {66, "biases"});
  HiddenLayer layer(w, b);
  Eigen::MatrixXd x = sample_lhs(5, 4, {66, "lhs"}).points;
  Eigen::VectorXd beta = sample_gaussian_matrix(7, 1, {66, "beta"});
  TrainedSurrogate s(layer, beta, 1e-3, {});
  Eigen::MatrixXd h = design_matrix(layer, x);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double via_row = h.row(i).dot(beta);
    const double direct = predict(s, x.row(i).transpose());
    REQUIRE(direct == Approx(via_row).epsilon(1e-12));
  }
}

TEST_CASE("relative error matches hand arithmetic", "[elm]") {
  // n=1, d=1, w = log(4/3), b = 0, beta = 3.3: predictions at x = (0, 1) are
  // (3.3, 4.4) against targets (3, 4), so the error is ||(.3,.4)|| / 5 = 0.1.
  HiddenLayer layer = layer_from({{std::log(4.0 / 3.0)}}, {0.0});
  Eigen::VectorXd beta(1);
  beta << 3.3;
  TrainedSurrogate s(layer, beta, 1e-3, {});
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 1.0;
  Eigen::VectorXd y(2);
  y << 3.0, 4.0;
  REQUIRE(relative_error(s, Dataset(x, y)) == Approx(0.1).epsilon(1e-12));

  TrainedSurrogate zero(layer, Eigen::VectorXd::Zero(1), 1e-3, {});
  REQUIRE(relative_error(zero, Dataset(x, y)) == Approx(1.0).epsilon(1e-14));

  Eigen::VectorXd zeros = Eigen::VectorXd::Zero(2);
  REQUIRE_THROWS_AS(relative_error(s, Dataset(x, zeros)), NumericError);
}

TEST_CASE("interpolating surrogate has zero relative error", "[elm]") {
  Eigen::MatrixXd w = sample_gaussian_matrix(6, 2, {91, "weights"});
  Eigen::VectorXd b = sample_gaussian_matrix(6, 1, {91, "biases"});
  HiddenLayer layer(w, b);
  Eigen::MatrixXd x = sample_lhs(6, 2, {91, "lhs"}).points;
  Eigen::VectorXd beta = sample_gaussian_matrix(6, 1, {91, "beta"});
  Eigen::VectorXd y = design_matrix(layer, x) * beta;
  TrainedSurrogate s(layer, beta, 0.0, {});
  REQUIRE(relative_error(s, Dataset(x, y)) < 1e-12);
}

TEST_CASE("dataset validates shape and domain", "[elm]") {
  Eigen::MatrixXd x(2, 2);
  x << 0.1, 0.2, 0.3, 0.4;
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  REQUIRE_THROWS_AS(Dataset(x, y), ConfigError);

  Eigen::MatrixXd outside(1, 2);
  outside << 0.5, 1.5;
  REQUIRE_THROWS_AS(Dataset(outside, Eigen::VectorXd::Ones(1)), ConfigError);
}

TEST_CASE("unit cube membership helper flags extrapolation", "[elm]") {
  Eigen::VectorXd inside(2), outside(2);
  inside << 0.0, 1.0;
  outside << 0.5, -0.01;
  REQUIRE(in_unit_cube(inside));
  REQUIRE_FALSE(in_unit_cube(outside));
}
