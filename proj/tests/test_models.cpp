#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support/quadrature.hpp"
#include "swelm/models.hpp"

using namespace swelm;
using Catch::Approx;

TEST_CASE("interaction benchmark evaluates by hand", "[models]") {
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  REQUIRE(eval_interaction(zero, 0.7) == Approx(0.7).epsilon(1e-15));

  Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
  REQUIRE(eval_interaction(ones, 1.0) == Approx(6.0).epsilon(1e-15));

  Eigen::VectorXd x(3);
  x << 0.2, 0.3, 0.5;
  REQUIRE(eval_interaction(x, 0.0) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("interaction ground truth reduces to 1/d when additive", "[models]") {
  for (int d : {1, 2, 7, 15}) {
    GroundTruth truth = interaction_ground_truth(d, 0.0);
    for (int k = 0; k < d; ++k) {
      REQUIRE(truth.first_order(k) == Approx(1.0 / d).epsilon(1e-12));
      REQUIRE(truth.total(k) == Approx(1.0 / d).epsilon(1e-12));
    }
  }
}

TEST_CASE("interaction ground truth matches the exact ANOVA at d=2, delta=1", "[models]") {
  // f = 2 x1 + 2 x2 + x1 x2 + 1: main-effect variance 25/48 each, interaction
  // variance 1/144, total variance 151/144.
  GroundTruth truth = interaction_ground_truth(2, 1.0);
  REQUIRE(truth.first_order(0) == Approx(75.0 / 151.0).margin(1e-12));
  REQUIRE(truth.first_order(1) == Approx(75.0 / 151.0).margin(1e-12));
  REQUIRE(truth.total(0) == Approx(76.0 / 151.0).margin(1e-12));
  REQUIRE(truth.total(1) == Approx(76.0 / 151.0).margin(1e-12));
}

TEST_CASE("interaction ground truth matches quadrature ANOVA", "[models]") {
  for (int d : {2, 3}) {
    for (double delta : {0.0, 0.1, 1.0}) {
      GroundTruth truth = interaction_ground_truth(d, delta);
      swelm_test::TensorAnova oracle(
          [&](const Eigen::VectorXd& x) { return eval_interaction(x, delta); }, d, 32);
      for (int k = 0; k < d; ++k) {
        REQUIRE(truth.first_order(k) == Approx(oracle.first_order(k)).margin(1e-9));
        REQUIRE(truth.total(k) == Approx(oracle.total(k)).margin(1e-9));
      }
    }
  }
}

TEST_CASE("interaction-dominated regime keeps ordered bounded indices", "[models]") {
  GroundTruth truth = interaction_ground_truth(15, 1e8);
  for (int k = 0; k < 15; ++k) {
    REQUIRE(truth.total(k) > truth.first_order(k));
    REQUIRE(truth.first_order(k) >= 0.0);
    REQUIRE(truth.total(k) <= 1.0);
  }
  REQUIRE_THROWS_AS(interaction_ground_truth(15, -1.0), ConfigError);
}

TEST_CASE("g-function evaluates by hand", "[models]") {
  Eigen::VectorXd a(3);
  a << 1.0, 2.0, 5.0;
  Eigen::VectorXd mid = Eigen::VectorXd::Constant(3, 0.5);
  REQUIRE(eval_gfunction(mid, a) ==
          Approx((1.0 / 2.0) * (2.0 / 3.0) * (5.0 / 6.0)).epsilon(1e-14));

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  REQUIRE(eval_gfunction(zero, a) ==
          Approx((3.0 / 2.0) * (4.0 / 3.0) * (7.0 / 6.0)).epsilon(1e-14));

  Eigen::VectorXd a1(1), x1(1);
  a1 << 0.0;
  x1 << 0.25;
  REQUIRE(eval_gfunction(x1, a1) == Approx(1.0).epsilon(1e-14));

  Eigen::VectorXd bad(1);
  bad << -1.0;
  REQUIRE_THROWS_AS(eval_gfunction(x1, bad), ConfigError);
}

TEST_CASE("g-function ground truth has the documented structure", "[models]") {
  Eigen::VectorXd a1(1);
  a1 << 3.7;
  GroundTruth single = gfunction_ground_truth(a1);
  REQUIRE(single.first_order(0) == Approx(1.0).epsilon(1e-14));
  REQUIRE(single.total(0) == Approx(1.0).epsilon(1e-14));

  Eigen::VectorXd a(8);
  a << 1, 2, 5, 10, 20, 50, 100, 500;
  GroundTruth truth = gfunction_ground_truth(a);
  REQUIRE(truth.first_order(0) == Approx(0.6037480879535).margin(1e-12));
  double sum_fo = truth.first_order.sum();
  double sum_tot = truth.total.sum();
  REQUIRE(sum_fo <= 1.0 + 1e-12);
  REQUIRE(sum_tot >= 1.0 - 1e-12);
  for (int k = 1; k < 8; ++k) {
    REQUIRE(truth.first_order(k) < truth.first_order(k - 1));
    REQUIRE(truth.total(k) >= truth.first_order(k));
  }
}

TEST_CASE("g-function ground truth matches quadrature ANOVA", "[models]") {
  // the kink at x = 0.5 slows quadrature; stay at a modest absolute tolerance
  Eigen::VectorXd a(2);
  a << 0.0, 3.0;
  GroundTruth truth = gfunction_ground_truth(a);
  swelm_test::TensorAnova oracle(
      [&](const Eigen::VectorXd& x) { return eval_gfunction(x, a); }, 2, 64);
  for (int k = 0; k < 2; ++k) {
    REQUIRE(truth.first_order(k) == Approx(oracle.first_order(k)).margin(5e-4));
    REQUIRE(truth.total(k) == Approx(oracle.total(k)).margin(5e-4));
  }
}

TEST_CASE("orthogonal matrices are deterministic with fixed signs", "[models]") {
  Eigen::MatrixXd tiny = build_orthogonal({4, "orthogonal-q"}, 1);
  REQUIRE(tiny(0, 0) == Approx(1.0).epsilon(1e-15));

  Eigen::MatrixXd q = build_orthogonal({4, "orthogonal-q"}, 50);
  Eigen::MatrixXd defect = q.transpose() * q - Eigen::MatrixXd::Identity(50, 50);
  REQUIRE(defect.cwiseAbs().maxCoeff() <= 1e-12);

  Eigen::MatrixXd q2 = build_orthogonal({5, "orthogonal-q"}, 50);
  REQUIRE((q - q2).norm() > 0.1);
  REQUIRE(build_orthogonal({4, "orthogonal-q"}, 50) == q);
}

TEST_CASE("linear ODE with identity eigenvectors is diagonal decay", "[models]") {
  LinearOdeSpec spec;
  spec.d = 50;
  LinearOdeModel model(Eigen::MatrixXd::Identity(50, 50), spec);
  Eigen::VectorXd nominal = Eigen::VectorXd::Constant(50, 0.5);
  REQUIRE(model.eval(nominal) == Approx(std::exp(-10.0 / 50.0)).epsilon(1e-13));
}

TEST_CASE("linear ODE at time zero returns the initial entry", "[models]") {
  LinearOdeSpec spec;
  spec.d = 20;
  spec.t_final = 0.0;
  spec.q_seed = 12;
  LinearOdeModel model(spec);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(20, 0.37);
  REQUIRE(model.eval(x) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("linear ODE matches a direct dense evaluation", "[models]") {
  LinearOdeSpec spec;
  spec.d = 50;
  spec.q_seed = 99;
  LinearOdeModel model(spec);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(50, 0.5);

  // same formula coded independently against the stored eigenvector matrix
  const Eigen::MatrixXd& q = model.eigenvectors();
  Eigen::VectorXd lambda(50);
  for (int k = 0; k < 50; ++k) lambda(k) = 1.0 / (k + 1.0);
  Eigen::MatrixXd decay = lambda.unaryExpr([](double v) { return std::exp(-10.0 * v); })
                              .asDiagonal();
  Eigen::VectorXd full = q * decay * q.transpose() * Eigen::VectorXd::Ones(50);
  REQUIRE(model.eval(x) == Approx(full(49)).epsilon(1e-12));
}

TEST_CASE("linear ODE solutions decay monotonically in norm", "[models]") {
  LinearOdeSpec spec;
  spec.d = 30;
  spec.q_seed = 7;
  LinearOdeModel model(spec);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(30, 0.25);
  double previous = std::sqrt(30.0);  // ||x0||
  for (double t : {0.0, 1.0, 2.0, 5.0, 10.0}) {
    const double norm = model.solution(x, t).norm();
    REQUIRE(norm <= previous * (1.0 + 1e-12));
    previous = norm;
  }
}

TEST_CASE("oscillator right-hand side matches the rate table", "[models]") {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(oscillator_species_count);
  y(osc_pa) = 1.0;  // only the activator gene present
  OscillatorRre system(oscillator_nominal_rates());
  Eigen::VectorXd dy(oscillator_species_count);
  system.rhs(y, dy);
  REQUIRE(dy(osc_mrna_a) == Approx(50.0).epsilon(1e-14));
  REQUIRE(dy(osc_mrna_r) == 0.0);
  REQUIRE(dy(osc_a) == 0.0);
}

TEST_CASE("oscillator with zero rates is constant", "[models]") {
  OscillatorRre system(Eigen::VectorXd::Zero(oscillator_rate_count));
  Eigen::VectorXd y = oscillator_initial_state();
  Eigen::VectorXd dy(oscillator_species_count);
  system.rhs(y, dy);
  REQUIRE(dy.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("oscillator jacobian matches finite differences", "[models]") {
  OscillatorRre system(oscillator_nominal_rates());
  Eigen::VectorXd y(oscillator_species_count);
  y << 1.0, 0.7, 2.0, 0.5, 3.0, 1.5, 0.8, 0.2, 0.4;
  Eigen::MatrixXd jac(oscillator_species_count, oscillator_species_count);
  system.jacobian(y, jac);
  Eigen::VectorXd base(oscillator_species_count), bumped(oscillator_species_count);
  system.rhs(y, base);
  const double h = 1e-7;
  for (int j = 0; j < oscillator_species_count; ++j) {
    Eigen::VectorXd yj = y;
    yj(j) += h;
    system.rhs(yj, bumped);
    for (int i = 0; i < oscillator_species_count; ++i) {
      REQUIRE(jac(i, j) == Approx((bumped(i) - base(i)) / h).margin(1e-4));
    }
  }
}

TEST_CASE("oscillator QoI approaches R(0) as the horizon shrinks", "[models]") {
  OscillatorSpec spec;
  spec.t_horizon = 1e-6;
  spec.qoi_grid_points = 8;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(16, 0.5);
  REQUIRE(std::abs(eval_genetic_oscillator(x, spec)) < 1e-6);
}

TEST_CASE("oscillator QoI self-converges under tolerance tightening", "[models][slow]") {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(16, 0.5);
  OscillatorSpec production;  // rtol 1e-6
  OscillatorSpec reference;
  reference.rtol = 1e-10;
  reference.atol = 1e-12;
  const double coarse = eval_genetic_oscillator(x, production);
  const double fine = eval_genetic_oscillator(x, reference);
  REQUIRE(coarse == Approx(fine).epsilon(1e-5));
}

TEST_CASE("model adapter wraps every benchmark uniformly", "[models]") {
  ModelFunction interaction = model_as_function(ModelSpec::interaction(3, 0.0));
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
  REQUIRE(interaction.dimension == 3);
  REQUIRE(interaction.eval(ones) == Approx(3.0).epsilon(1e-15));

  Eigen::VectorXd a(4);
  a << 0, 1, 2, 3;
  ModelFunction gfn = model_as_function(ModelSpec::gfunction(a));
  REQUIRE(gfn.dimension == 4);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(4, 0.3);
  REQUIRE(gfn.eval(x) == gfn.eval(x));  // purity

  ModelFunction lode = model_as_function(ModelSpec::linear_ode());
  REQUIRE(lode.dimension == 50);

  ModelFunction osc = model_as_function(ModelSpec::genetic_oscillator());
  REQUIRE(osc.dimension == 16);
}

TEST_CASE("ground truth is only defined for closed-form models", "[models]") {
  REQUIRE(ModelSpec::interaction(3, 0.5).has_closed_form());
  REQUIRE_FALSE(ModelSpec::linear_ode().has_closed_form());
  REQUIRE_THROWS_AS(ModelSpec::linear_ode().ground_truth(), ConfigError);
  REQUIRE_THROWS_AS(ModelSpec::genetic_oscillator().ground_truth(), ConfigError);
}
