#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "tdefumi/dsrf.hpp"
#include "tdefumi/errors.hpp"

using namespace tdefumi;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("default grid spans the sensor band") {
  const auto g = FrequencyGrid::default_grid();
  REQUIRE(g.size() == 21);
  CHECK_THAT(g.front(), WithinRel(2 * std::numbers::pi * 300, 1e-12));
  CHECK_THAT(g.back(), WithinRel(2 * std::numbers::pi * 90000, 1e-12));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g.omegas()[i] > g.omegas()[i - 1]);
}

TEST_CASE("grid rejects bad frequencies") {
  CHECK_THROWS_AS(FrequencyGrid(std::vector<double>{}), InvalidParameter);
  CHECK_THROWS_AS(FrequencyGrid(std::vector<double>{5.0}), InvalidParameter);
  CHECK_THROWS_AS(FrequencyGrid(std::vector<double>{1.0, 1.0}), InvalidParameter);
  CHECK_THROWS_AS(FrequencyGrid(std::vector<double>{2.0, 1.0}), InvalidParameter);
  CHECK_THROWS_AS(FrequencyGrid(std::vector<double>{-1.0, 1.0}), InvalidParameter);
}

TEST_CASE("dsrf response matches a scalar evaluator") {
  const auto g = FrequencyGrid::default_grid();
  DsrfParams p{0.3, {1.5, -0.4}, {4e3, 6e4}};
  const auto h = dsrf_response(g, p);
  const auto ref = oracle::dsrf(g.omegas(), 0.3, {1.5, -0.4}, {4e3, 6e4});
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK_THAT(h[static_cast<Eigen::Index>(i)].real(), WithinAbs(ref[i].real(), 1e-14));
    CHECK_THAT(h[static_cast<Eigen::Index>(i)].imag(), WithinAbs(ref[i].imag(), 1e-14));
  }
}

TEST_CASE("single relaxation at omega = zeta") {
  FrequencyGrid g(std::vector<double>{1e4, 2e4});
  const auto a = dsrf_atom(g, 1e4);
  CHECK_THAT(a[0].real(), WithinAbs(0.5, 1e-15));
  CHECK_THAT(a[0].imag(), WithinAbs(-0.5, 1e-15));
}

TEST_CASE("dsrf responses are causal-shaped") {
  // In-phase part decreasing, quadrature part non-positive for positive amplitudes.
  const auto g = FrequencyGrid::default_grid();
  for (double zeta : {1e3, 1e4, 1e5, 1e6}) {
    const auto a = dsrf_atom(g, zeta);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      CHECK(a[i].imag() <= 0.0);
      if (i > 0) CHECK(a[i].real() < a[i - 1].real());
    }
  }
}

TEST_CASE("dsrf parameter validation") {
  const auto g = FrequencyGrid::default_grid();
  CHECK_THROWS_AS(dsrf_response(g, {0.0, {1.0}, {}}), InvalidParameter);
  CHECK_THROWS_AS(dsrf_response(g, {0.0, {1.0}, {-5.0}}), InvalidParameter);
  CHECK_THROWS_AS(dsrf_atom(g, 0.0), InvalidParameter);
}

TEST_CASE("stack and unstack round trip") {
  Eigen::VectorXcd s(3);
  s << std::complex<double>(1, 2), std::complex<double>(3, -4), std::complex<double>(-5, 6);
  const auto v = stack_complex(s);
  REQUIRE(v.size() == 6);
  CHECK(v[0] == 1);
  CHECK(v[2] == -5);
  CHECK(v[3] == 2);
  CHECK(v[5] == 6);
  CHECK(unstack(v) == s);
  CHECK_THROWS_AS(unstack(Eigen::VectorXd::Zero(5)), FormatError);
}

TEST_CASE("log-spaced relaxation frequencies span the band") {
  const auto g = FrequencyGrid::default_grid();
  const auto z = log_spaced_zetas(g, 30);
  REQUIRE(z.size() == 30);
  CHECK_THAT(z.front(), WithinRel(g.front(), 1e-12));
  CHECK_THAT(z.back(), WithinRel(g.back(), 1e-12));
  for (std::size_t i = 2; i < z.size(); ++i) CHECK_THAT(z[i] / z[i - 1], WithinRel(z[1] / z[0], 1e-9));
  const auto one = log_spaced_zetas(g, 1);
  CHECK_THAT(one[0], WithinRel(std::sqrt(g.front() * g.back()), 1e-12));
}

TEST_CASE("dsrf dictionary atoms are unit norm with no target block") {
  const auto g = FrequencyGrid::default_grid();
  const Dictionary d = build_dsrf_dictionary(g, log_spaced_zetas(g, 30));
  CHECK(d.size() == 30);
  CHECK(d.dim() == 42);
  CHECK(d.target_count() == 0);
  for (Eigen::Index k = 0; k < d.size(); ++k) CHECK_THAT(d.atom(k).norm(), WithinAbs(1.0, 1e-12));
  const Dictionary raw = build_dsrf_dictionary(g, {1e4}, false);
  CHECK(raw.atom(0).norm() <= 1.0 + 1e-12);
}

TEST_CASE("dictionary enforces the unit ball and block sizes") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(4, 3);
  CHECK_NOTHROW(Dictionary(a, 1));
  CHECK_THROWS_AS(Dictionary(a, 3), InvalidParameter);
  CHECK_THROWS_AS(Dictionary(a, -1), InvalidParameter);
  a(0, 0) = 1.01;
  CHECK_THROWS_AS(Dictionary(a, 1), InvalidParameter);
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(4, 3);
  const Dictionary d(b, 1);
  CHECK(d.nontarget_count() == 2);
  CHECK(d.is_target(0));
  CHECK_FALSE(d.is_target(1));
  CHECK(d.nontarget_subdictionary().size() == 2);
  CHECK(d.nontarget_subdictionary().target_count() == 0);
}

TEST_CASE("constant-only response and the large-zeta limit") {
  const auto g = FrequencyGrid::default_grid();
  const auto h = dsrf_response(g, {2.5, {}, {}});
  for (Eigen::Index i = 0; i < h.size(); ++i) CHECK(h[i] == std::complex<double>(2.5, 0.0));
  const auto a = dsrf_atom(g, 1e15);
  for (Eigen::Index i = 0; i < a.size(); ++i) CHECK_THAT(std::abs(a[i] - 1.0), WithinAbs(0.0, 1e-9));
}

TEST_CASE("dsrf response is linear in the amplitudes") {
  const auto g = FrequencyGrid::default_grid();
  const std::vector<double> z{3e3, 2e4, 2e5};
  DsrfParams p1{0.2, {1.0, -0.5, 0.3}, z}, p2{-0.7, {0.1, 2.0, -1.0}, z}, mix{0.0, {}, z};
  const double a = 1.7, b = -0.4;
  mix.c0 = a * p1.c0 + b * p2.c0;
  for (std::size_t k = 0; k < z.size(); ++k) mix.cks.push_back(a * p1.cks[k] + b * p2.cks[k]);
  const auto lhs = dsrf_response(g, mix);
  const auto rhs = (a * dsrf_response(g, p1) + b * dsrf_response(g, p2)).eval();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("atom magnitude falls with frequency and atoms are distinct") {
  const auto g = FrequencyGrid::default_grid();
  const auto a = dsrf_atom(g, 1e4);
  for (Eigen::Index i = 1; i < a.size(); ++i) CHECK(std::abs(a[i]) < std::abs(a[i - 1]));
  const Dictionary d = build_dsrf_dictionary(g, log_spaced_zetas(g, 30));
  for (Eigen::Index i = 0; i < d.size(); ++i)
    for (Eigen::Index j = i + 1; j < d.size(); ++j) CHECK((d.atom(i) - d.atom(j)).cwiseAbs().maxCoeff() > 1e-12);
  const Dictionary one = build_dsrf_dictionary(g, {1e4});
  const auto ref = stack_complex(a);
  CHECK((one.atom(0) - ref / ref.norm()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("stacking preserves norms and keeps real spectra real") {
  std::mt19937_64 rng(3);
  const auto re = oracle::random_vector(rng, 8), im = oracle::random_vector(rng, 8);
  Eigen::VectorXcd s(8);
  for (int i = 0; i < 8; ++i) s[i] = {re[i], im[i]};
  CHECK_THAT(stack_complex(s).norm(), WithinAbs(s.norm(), 1e-12));
  const auto v = stack_complex(re.cast<std::complex<double>>());
  CHECK(v.tail(8).isZero(0.0));
}
