#include <array>

#include <gtest/gtest.h>

#include "coiso/errors.hpp"
#include "coiso/linfty.hpp"
#include "coiso/sampling.hpp"
#include "coiso/transversal.hpp"
#include "support.hpp"

using namespace coiso;
using coiso::testing::bent_chart;
using coiso::testing::mv;
using coiso::testing::section_of;

namespace {

Multivector fibre_vector(const ChartSpec& chart, const Section& s) { return vertical_field(chart, s); }

} // namespace

TEST(ValidateChart, BuiltinsAreValid) {
  for (const auto& chart : coiso::testing::builtin_charts()) {
    const auto v = validate_chart(chart);
    EXPECT_TRUE(v.poisson_residual.is_zero()) << chart.name();
    EXPECT_TRUE(v.projection_residual.is_zero()) << chart.name();
  }
  EXPECT_TRUE(validate_chart(bent_chart()).valid());
}

TEST(ValidateChart, LinearCoefficientOnBaseDirection) {
  const auto vars = chart_vars({"x1"}, {"p1"});
  const ChartSpec chart("scaled", vars, mv(vars, "x1", {"x1", "p1"}), {Interval{}});
  const auto v = validate_chart(chart);
  EXPECT_TRUE(v.poisson_residual.is_zero());
  EXPECT_TRUE(v.projection_residual.is_zero());
}

TEST(ValidateChart, ReportsFailures) {
  const auto vars = chart_vars({"x1", "x2"}, {"p1", "p2"});
  const ChartSpec not_poisson("np", vars, mv(vars, "1", {"x1", "p1"}) + mv(vars, "x1", {"x2", "p2"}),
                              {Interval{}, Interval{}});
  EXPECT_FALSE(validate_chart(not_poisson).poisson_residual.is_zero());
  const ChartSpec not_coiso("nc", vars, mv(vars, "1", {"x1", "x2"}) + mv(vars, "1", {"p1", "p2"}),
                            {Interval{}, Interval{}});
  EXPECT_EQ(validate_chart(not_coiso).projection_residual, mv(vars, "1", {"p1", "p2"}));
}

TEST(Mu, Examples) {
  const auto chart = lagrangian_chart(2);
  EXPECT_TRUE(mu(chart, zero_section(chart)).is_zero());
  EXPECT_EQ(mu(chart, section_of(chart, {"x2", "0"})), mv(chart.vars(), "-1", {"p1", "p2"}));
  EXPECT_TRUE(mu(chart, section_of(chart, {"x2", "x1"})).is_zero());
  EXPECT_THROW(mu(chart, section_of(chart, {"p1", "0"})), InputError);
}

TEST(Mu, BentChartMatchesConormalValues) {
  const auto chart = bent_chart();
  EXPECT_EQ(mu(chart, section_of(chart, {"x2", "x1^2"})), mv(chart.vars(), "-4*x1*x2 + 2*x1 - 1", {"p1", "p2"}));
  EXPECT_EQ(mu(chart, section_of(chart, {"x1*x2", "x2^2"})), mv(chart.vars(), "4*x1*x2^3 - x1", {"p1", "p2"}));
  EXPECT_TRUE(mu(chart, section_of(chart, {"x1", "x2 - x1^2"})).is_zero());
}

TEST(Lambda, FirstBracketOnLagrangianChart) {
  const auto chart = lagrangian_chart(2);
  const std::array<Multivector, 1> s{fibre_vector(chart, section_of(chart, {"x2", "0"}))};
  EXPECT_EQ(lambda(chart, s), mv(chart.vars(), "1", {"p1", "p2"}));
}

TEST(Lambda, HigherBracketsVanishOnLagrangianChart) {
  const auto chart = lagrangian_chart(2);
  Sampler sampler(31);
  for (int i = 0; i < 30; ++i) {
    const Multivector s = fibre_vector(chart, sampler.section(chart, 3));
    const std::array<Multivector, 2> ss{s, s};
    EXPECT_TRUE(lambda(chart, ss).is_zero());
  }
}

TEST(Lambda, FirstBracketOfFunctionIsProjectedHamiltonianField) {
  for (const auto& chart : coiso::testing::adapted_charts()) {
    Sampler sampler(32);
    for (int i = 0; i < 20; ++i) {
      const ScalarFn f = sampler.base_function(chart, 3);
      const std::array<Multivector, 1> args{Multivector::scalar(f)};
      EXPECT_EQ(lambda(chart, args), project_P(hamiltonian_vf(chart, f))) << chart.name();
    }
  }
}

TEST(Lambda, RejectsArgumentsOutsideAbelianSubalgebra) {
  const auto chart = lagrangian_chart(2);
  const std::array<Multivector, 1> base_dir{mv(chart.vars(), "1", {"x1"})};
  EXPECT_THROW(lambda(chart, base_dir), InputError);
  const std::array<Multivector, 1> fibre_coeff{mv(chart.vars(), "p1", {"p2"})};
  EXPECT_THROW(lambda(chart, fibre_coeff), InputError);
  EXPECT_THROW(lambda(chart, std::span<const Multivector>{}), InputError);
}

TEST(McSeries, ZeroSection) {
  const auto chart = lagrangian_chart(2);
  const auto r = mc_series(chart, zero_section(chart));
  EXPECT_TRUE(r.is_zero);
  EXPECT_TRUE(r.terminated);
  EXPECT_EQ(r.order_terminated, 1u);
  EXPECT_TRUE(r.oracle_agrees);
}

TEST(McSeries, NonCoisotropicFixture) {
  const auto chart = lagrangian_chart(2);
  const auto r = mc_series(chart, section_of(chart, {"x2", "0"}));
  EXPECT_FALSE(r.is_zero);
  EXPECT_EQ(r.residual, mv(chart.vars(), "-1", {"p1", "p2"}));
  EXPECT_TRUE(r.oracle_agrees);
  EXPECT_TRUE(r.terminated);
  EXPECT_LE(r.order_terminated, r.order_bound);
}

TEST(McSeries, HypersurfaceAlwaysZero) {
  const auto chart = hypersurface_chart();
  Sampler sampler(41);
  for (int i = 0; i < 30; ++i) {
    const auto r = mc_series(chart, sampler.section(chart, 2));
    EXPECT_TRUE(r.is_zero);
    EXPECT_TRUE(r.oracle_agrees);
  }
}

TEST(McSeries, BentChartUsesHigherOrders) {
  const auto chart = bent_chart();
  const auto r = mc_series(chart, section_of(chart, {"x2", "x1^2"}));
  EXPECT_TRUE(r.terminated);
  EXPECT_GE(r.order_terminated, 3u);
  EXPECT_LE(r.order_terminated, r.order_bound);
  EXPECT_TRUE(r.oracle_agrees);
  EXPECT_EQ(r.residual, mv(chart.vars(), "-4*x1*x2 + 2*x1 - 1", {"p1", "p2"}));
}

TEST(McSeries, TruncationIsFlagged) {
  const auto chart = bent_chart();
  const auto r = mc_series(chart, section_of(chart, {"x2", "x1^2"}), 1);
  EXPECT_FALSE(r.terminated);
  EXPECT_FALSE(r.oracle_agrees);
}

TEST(Coisotropic, Examples) {
  const auto chart = lagrangian_chart(2);
  EXPECT_TRUE(is_coisotropic(chart, section_of(chart, {"x2", "x1"})).coisotropic);
  const auto cert = is_coisotropic(chart, section_of(chart, {"x2", "0"}));
  EXPECT_FALSE(cert.coisotropic);
  ASSERT_EQ(cert.nonzero.size(), 1u);
  EXPECT_EQ(cert.nonzero[0].value, chart.parse("-1"));

  const auto hyper = hypersurface_chart();
  Sampler sampler(5);
  for (int i = 0; i < 20; ++i)
    EXPECT_TRUE(is_coisotropic(hyper, sampler.section(hyper, 3)).coisotropic);
}

TEST(LinearizedMc, Examples) {
  const auto chart = lagrangian_chart(2);
  EXPECT_TRUE(linearized_mc(chart, zero_section(chart)).is_zero());
  EXPECT_EQ(linearized_mc(chart, section_of(chart, {"x2", "0"})), mv(chart.vars(), "-1", {"p1", "p2"}));
}

TEST(LinearizedMc, AdaptedChartHamiltonianSection) {
  for (const auto& chart : coiso::testing::adapted_charts()) {
    Sampler sampler(12);
    for (int i = 0; i < 10; ++i) {
      const Multivector v = project_P(hamiltonian_vf(chart, sampler.base_function(chart, 3)));
      Section s = zero_section(chart);
      for (std::size_t j = 0; j < chart.fibre_dim(); ++j)
        s.components[j] = v.coefficient({static_cast<std::uint32_t>(chart.fibre()[j])});
      const std::array<Multivector, 1> arg{vertical_field(chart, s)};
      EXPECT_EQ(linearized_mc(chart, s), -lambda(chart, arg)) << chart.name();
    }
  }
}

TEST(Jacobi, ArityOneOnRandomSections) {
  for (const auto& chart : coiso::testing::builtin_charts()) {
    Sampler sampler(99);
    for (int i = 0; i < 50; ++i) {
      const std::array<Multivector, 1> s{fibre_vector(chart, sampler.section(chart, 2))};
      const std::array<Multivector, 1> l{lambda(chart, s)};
      EXPECT_TRUE(lambda(chart, l).is_zero()) << chart.name();
    }
  }
}

TEST(Jacobi, SuiteOnAllCharts) {
  auto charts = coiso::testing::builtin_charts();
  charts.push_back(bent_chart());
  for (const auto& chart : charts) {
    const auto r = jacobi_suite(chart, 3, 20, 5);
    EXPECT_TRUE(r.ok()) << chart.name();
    EXPECT_EQ(r.identity_checks, 60u);
  }
  const auto r4 = jacobi_suite(bent_chart(), 4, 5, 6);
  EXPECT_TRUE(r4.ok());
}

TEST(Jacobi, DetectsBrokenPoissonCondition) {
  // [pi, pi] != 0 breaks the identities for some argument.
  const auto vars = chart_vars({"x1", "x2"}, {"p1", "p2"});
  const ChartSpec broken("broken", vars, mv(vars, "1", {"x1", "p1"}) + mv(vars, "x1*p1", {"x2", "p2"}),
                         {Interval{}, Interval{}});
  ASSERT_FALSE(validate_chart(broken).poisson_residual.is_zero());
  EXPECT_FALSE(jacobi_suite(broken, 2, 30, 1).ok());
}

TEST(Centralizer, Examples) {
  const auto chart = lagrangian_chart(2);
  Sampler sampler(4);
  const std::vector<std::size_t> all{0, 1, 2, 3};
  for (int i = 0; i < 20; ++i)
    EXPECT_TRUE(centralizer_check(chart, hamiltonian_vf(chart, sampler.polynomial(chart.vars(), all, 3))));

  const auto torus = torus_chart();
  OneForm beta{torus.vars(), {}};
  beta.components.insert_or_assign(torus.vars()->index("th3"), ScalarFn(torus.vars(), 1));
  EXPECT_TRUE(centralizer_check(torus, contract(torus.pi(), beta)));

  const auto line = lagrangian_chart(1);
  EXPECT_FALSE(centralizer_check(line, mv(line.vars(), "x1", {"x1"})));
  EXPECT_THROW(centralizer_check(line, line.pi()), InputError);
}

// Cross-path properties on every built-in chart.

class OracleEquivalence : public ::testing::TestWithParam<std::string> {};

TEST_P(OracleEquivalence, SeriesMuAndConormalAgree) {
  const ChartSpec chart = GetParam() == "bent" ? bent_chart() : make_scenario(GetParam()).chart;
  Sampler sampler(1234);
  for (int i = 0; i < 50; ++i) {
    const Section s = sampler.section(chart, 2);
    const auto r = mc_series(chart, s);
    const auto cert = is_coisotropic(chart, s);
    EXPECT_TRUE(r.terminated);
    EXPECT_LE(r.order_terminated, r.order_bound);
    EXPECT_TRUE(r.oracle_agrees);
    EXPECT_EQ(r.is_zero, cert.coisotropic);
    if (chart.fibre_dim() == 2)
      EXPECT_EQ(r.residual.coefficient({static_cast<std::uint32_t>(chart.fibre()[0]),
                                        static_cast<std::uint32_t>(chart.fibre()[1])}),
                cert.coisotropic ? chart.zero() : cert.nonzero.at(0).value);
  }
}

TEST_P(OracleEquivalence, LinearizationIsMinusFirstBracket) {
  const ChartSpec chart = GetParam() == "bent" ? bent_chart() : make_scenario(GetParam()).chart;
  Sampler sampler(4321);
  for (int i = 0; i < 50; ++i) {
    const Section s = sampler.section(chart, 2);
    const std::array<Multivector, 1> arg{vertical_field(chart, s)};
    EXPECT_EQ(linearized_mc(chart, s), -lambda(chart, arg));
  }
}

INSTANTIATE_TEST_SUITE_P(Charts, OracleEquivalence,
                         ::testing::Values("lagrangian_n1", "lagrangian_n2", "torus", "hypersurface", "bent"));

// On T*R^n, lambda_1 of s = sum s_j dp_j is -d(sum s_j dx_j) with dx_i read as dp_i.
TEST(LagrangianRecovery, FirstBracketIsMinusExteriorDerivative) {
  for (std::size_t n : {1u, 2u, 3u}) {
    const auto chart = lagrangian_chart(n);
    Sampler sampler(600 + n);
    for (int trial = 0; trial < 50; ++trial) {
      const Section s = sampler.section(chart, 3);
      Multivector d(chart.vars(), 2);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          d.add_term({static_cast<std::uint32_t>(chart.fibre()[i]), static_cast<std::uint32_t>(chart.fibre()[j])},
                     s.components[j].derivative(chart.base()[i]) - s.components[i].derivative(chart.base()[j]));
      const std::array<Multivector, 1> arg{vertical_field(chart, s)};
      EXPECT_EQ(lambda(chart, arg), -d);
      const std::array<Multivector, 2> two{arg[0], arg[0]};
      EXPECT_TRUE(lambda(chart, two).is_zero());
    }
  }
}
