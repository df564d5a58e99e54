#include <gtest/gtest.h>

#include "coiso/errors.hpp"
#include "coiso/multivector.hpp"
#include "coiso/sampling.hpp"
#include "support.hpp"

using namespace coiso;
using coiso::testing::mv;
using coiso::testing::small_vars;

namespace {

VarSetPtr vars() {
  static const VarSetPtr v = small_vars();
  return v;
}

Multivector d(const std::string& name) { return Multivector::direction(vars(), vars()->index(name)); }
Multivector fn(const std::string& text) { return Multivector::scalar(parse(text, vars())); }
Multivector standard_pi() { return wedge(d("x1"), d("p1")) + wedge(d("x2"), d("p2")); }

int sign_pow(long e) { return e % 2 == 0 ? 1 : -1; }

} // namespace

TEST(Wedge, Examples) {
  EXPECT_EQ(wedge(d("x1"), d("p1")), mv(vars(), "1", {"x1", "p1"}));
  EXPECT_TRUE(wedge(d("x1"), d("x1")).is_zero());
  EXPECT_EQ(wedge(parse("x1", vars()) * d("p1"), d("p2")), mv(vars(), "x1", {"p1", "p2"}));
}

TEST(Wedge, SortsWithSign) {
  EXPECT_EQ(wedge(d("p1"), d("x1")), -mv(vars(), "1", {"x1", "p1"}));
  EXPECT_EQ(Multivector::term(parse("2", vars()), {2, 0}), mv(vars(), "-2", {"x1", "p1"}));
  EXPECT_TRUE(Multivector::term(parse("2", vars()), {1, 1}).is_zero());
}

TEST(Wedge, VariableMismatch) {
  const auto other = chart_vars({"y"}, {"u"});
  EXPECT_THROW(wedge(d("x1"), Multivector::direction(other, 0)), VariableMismatch);
  EXPECT_THROW(schouten(d("x1"), Multivector::direction(other, 0)), VariableMismatch);
}

TEST(Schouten, LieBracketExample) {
  EXPECT_EQ(schouten(d("x1"), parse("x1", vars()) * d("x1")), d("x1"));
}

TEST(Schouten, BivectorWithFunction) {
  // By graded Leibniz and [X, f] = X(f): [X^Y, f] = Y(f) X - X(f) Y.
  EXPECT_EQ(schouten(mv(vars(), "1", {"x1", "p1"}), fn("x1*p1")),
            mv(vars(), "x1", {"x1"}) - mv(vars(), "p1", {"p1"}));
}

TEST(Schouten, ConstantPoissonIsClosed) { EXPECT_TRUE(schouten(standard_pi(), standard_pi()).is_zero()); }

TEST(Schouten, VectorFieldOnFunction) {
  EXPECT_EQ(schouten(parse("x2", vars()) * d("x1"), fn("x1^2*p1")).as_scalar(), parse("2*x1*x2*p1", vars()));
  EXPECT_TRUE(schouten(fn("x1"), fn("p1")).is_zero());
}

TEST(ProjectP, Examples) {
  EXPECT_TRUE(project_P(mv(vars(), "1", {"x1", "p1"})).is_zero());
  EXPECT_TRUE(project_P(mv(vars(), "p1", {"p1", "p2"})).is_zero());
  EXPECT_EQ(project_P(mv(vars(), "x2", {"p1", "p2"})), mv(vars(), "x2", {"p1", "p2"}));
  EXPECT_EQ(project_P(mv(vars(), "x2 + x1*p2", {"p1", "p2"})), mv(vars(), "x2", {"p1", "p2"}));
}

TEST(Pushforward, TranslationExample) {
  const std::vector<ScalarFn> s{parse("x2", vars()), parse("0", vars())};
  EXPECT_EQ(pushforward_translate(standard_pi(), s, -1), standard_pi() - mv(vars(), "1", {"p1", "p2"}));
}

TEST(Pushforward, ZeroSectionIsIdentity) {
  const std::vector<ScalarFn> zero{ScalarFn(vars()), ScalarFn(vars())};
  const Multivector a = mv(vars(), "p1*x2", {"x1", "p2"}) + mv(vars(), "x1", {"x2", "p1"});
  EXPECT_EQ(pushforward_translate(a, zero, -1), a);
}

TEST(Pushforward, InverseTranslation) {
  Sampler sampler(3);
  const std::vector<std::size_t> dirs{0, 1, 2, 3}, base{0, 1}, all{0, 1, 2, 3};
  for (int i = 0; i < 30; ++i) {
    const Multivector a = sampler.multivector(vars(), dirs, 1 + static_cast<unsigned>(sampler.below(3)), all, 2);
    const std::vector<ScalarFn> s{sampler.polynomial(vars(), base, 2), sampler.polynomial(vars(), base, 2)};
    EXPECT_EQ(pushforward_translate(pushforward_translate(a, s, -1), s, 1), a);
  }
}

TEST(Pushforward, RejectsFibreDependentSection) {
  const std::vector<ScalarFn> s{parse("p1", vars()), parse("0", vars())};
  EXPECT_THROW(pushforward_translate(standard_pi(), s, -1), InputError);
}

TEST(HamiltonianField, Examples) {
  const auto chart = coiso::lagrangian_chart(1);
  EXPECT_EQ(hamiltonian_vf(chart, chart.parse("x1")), -Multivector::direction(chart.vars(), 1));
  EXPECT_EQ(hamiltonian_vf(chart, chart.parse("p1")), Multivector::direction(chart.vars(), 0));
  EXPECT_TRUE(hamiltonian_vf(chart, chart.parse("5/2")).is_zero());
}

TEST(Contract, Examples) {
  const auto chart = coiso::lagrangian_chart(1);
  const OneForm dx = exterior_derivative(chart.parse("x1"));
  EXPECT_EQ(contract(chart.pi(), dx), hamiltonian_vf(chart, chart.parse("x1")));
  EXPECT_TRUE(contract(chart.pi(), OneForm{chart.vars(), {}}).is_zero());
}

TEST(Contract, TorusClosedForm) {
  const auto chart = coiso::torus_chart();
  OneForm beta{chart.vars(), {}};
  beta.components.insert_or_assign(chart.vars()->index("th3"), ScalarFn(chart.vars(), 1));
  EXPECT_EQ(contract(chart.pi(), beta), -Multivector::direction(chart.vars(), chart.vars()->index("x4")));
}

TEST(IsClosed, Examples) {
  EXPECT_TRUE(is_closed(exterior_derivative(parse("x1*x2", vars()))));
  OneForm x2dx1{vars(), {}};
  x2dx1.components.insert_or_assign(0, parse("x2", vars()));
  EXPECT_FALSE(is_closed(x2dx1));
  OneForm constant{vars(), {}};
  constant.components.insert_or_assign(2, parse("1", vars()));
  EXPECT_TRUE(is_closed(constant));
}

TEST(InvertSymplectic, StandardBlock) {
  const std::vector<std::size_t> dirs{0, 1, 2, 3};
  const RationalMatrix omega{{0, 0, 1, 0}, {0, 0, 0, 1}, {-1, 0, 0, 0}, {0, -1, 0, 0}};
  EXPECT_EQ(invert_constant_symplectic(vars(), dirs, omega), standard_pi());
}

TEST(InvertSymplectic, LeafBlock) {
  const std::vector<std::size_t> dirs{0, 1};
  EXPECT_EQ(invert_constant_symplectic(vars(), dirs, {{0, 1}, {-1, 0}}), mv(vars(), "1", {"x1", "x2"}));
  EXPECT_EQ(invert_constant_symplectic(vars(), dirs, {{0, 2}, {-2, 0}}), mv(vars(), "1/2", {"x1", "x2"}));
}

TEST(InvertSymplectic, Errors) {
  const std::vector<std::size_t> dirs{0, 1};
  EXPECT_THROW(invert_constant_symplectic(vars(), dirs, {{0, 0}, {0, 0}}), InputError);
  EXPECT_THROW(invert_constant_symplectic(vars(), dirs, {{0, 1}, {1, 0}}), InputError);
  EXPECT_THROW(invert_matrix({{1, 2}, {2, 4}}), InputError);
}

// Randomized graded Lie algebra laws: 2 base + 2 fibre variables, degrees up
// to 3, coefficients of degree up to 2.

class SchoutenLaws : public ::testing::Test {
protected:
  Sampler sampler{424242};
  std::vector<std::size_t> dirs{0, 1, 2, 3};
  std::vector<std::size_t> coeff_vars{0, 1, 2, 3};

  Multivector random() {
    const auto degree = static_cast<unsigned>(sampler.below(4));
    if (degree == 0)
      return Multivector::scalar(sampler.polynomial(vars(), coeff_vars, 2, 3));
    return sampler.multivector(vars(), dirs, degree, coeff_vars, 2);
  }
};

TEST_F(SchoutenLaws, GradedAntisymmetry) {
  for (int i = 0; i < 150; ++i) {
    const Multivector a = random(), b = random();
    const long e = (static_cast<long>(a.degree()) - 1) * (static_cast<long>(b.degree()) - 1);
    EXPECT_EQ(schouten(a, b), Rational(-sign_pow(e)) * schouten(b, a));
  }
}

TEST_F(SchoutenLaws, GradedLeibniz) {
  for (int i = 0; i < 150; ++i) {
    const Multivector a = random(), b = random(), c = random();
    const long e = (static_cast<long>(a.degree()) - 1) * static_cast<long>(b.degree());
    EXPECT_EQ(schouten(a, wedge(b, c)), wedge(schouten(a, b), c) + Rational(sign_pow(e)) * wedge(b, schouten(a, c)));
  }
}

TEST_F(SchoutenLaws, GradedJacobi) {
  for (int i = 0; i < 150; ++i) {
    const Multivector a = random(), b = random(), c = random();
    const long e = (static_cast<long>(a.degree()) - 1) * (static_cast<long>(b.degree()) - 1);
    EXPECT_EQ(schouten(a, schouten(b, c)),
              schouten(schouten(a, b), c) + Rational(sign_pow(e)) * schouten(b, schouten(a, c)));
  }
}

TEST_F(SchoutenLaws, WedgeGradedCommutative) {
  for (int i = 0; i < 100; ++i) {
    const Multivector a = random(), b = random();
    const long e = static_cast<long>(a.degree()) * static_cast<long>(b.degree());
    EXPECT_EQ(wedge(a, b), Rational(sign_pow(e)) * wedge(b, a));
  }
}

TEST_F(SchoutenLaws, PushforwardIsABracketMorphism) {
  const std::vector<std::size_t> base{0, 1};
  for (int i = 0; i < 100; ++i) {
    const Multivector a = random(), b = random();
    const std::vector<ScalarFn> s{sampler.polynomial(vars(), base, 2), sampler.polynomial(vars(), base, 2)};
    const int sign = sampler.below(2) ? 1 : -1;
    EXPECT_EQ(schouten(pushforward_translate(a, s, sign), pushforward_translate(b, s, sign)),
              pushforward_translate(schouten(a, b), s, sign));
  }
}

TEST_F(SchoutenLaws, ContractionOfExactFormIsHamiltonian) {
  for (const auto& chart : coiso::testing::builtin_charts()) {
    std::vector<std::size_t> all = chart.base();
    all.insert(all.end(), chart.fibre().begin(), chart.fibre().end());
    for (int i = 0; i < 30; ++i) {
      const ScalarFn h = sampler.polynomial(chart.vars(), all, 3);
      EXPECT_EQ(contract(chart.pi(), exterior_derivative(h)), hamiltonian_vf(chart, h)) << chart.name();
    }
  }
  const auto bent = coiso::testing::bent_chart();
  const std::vector<std::size_t> all{0, 1, 2, 3};
  for (int i = 0; i < 30; ++i) {
    const ScalarFn h = sampler.polynomial(bent.vars(), all, 3);
    EXPECT_EQ(contract(bent.pi(), exterior_derivative(h)), hamiltonian_vf(bent, h));
  }
}

TEST(OneForm, ContractionInvertsOmega) {
  // i_X omega = beta for X = contract(pi, beta) on the torus chart, with
  // omega = dth1^dth2 + dth3^dx4 written out as a matrix.
  const auto chart = coiso::torus_chart();
  const RationalMatrix omega{{0, 1, 0, 0}, {-1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, -1, 0}};
  Sampler sampler(8);
  const std::vector<std::size_t> all{0, 1, 2, 3};
  for (int trial = 0; trial < 20; ++trial) {
    OneForm beta{chart.vars(), {}};
    for (std::size_t v = 0; v < 4; ++v)
      beta.components.insert_or_assign(v, sampler.polynomial(chart.vars(), all, 2));
    const Multivector x = contract(chart.pi(), beta);
    for (std::size_t j = 0; j < 4; ++j) {
      ScalarFn ix(chart.vars());
      for (std::size_t i = 0; i < 4; ++i)
        ix += x.coefficient({static_cast<std::uint32_t>(i)}) * omega[i][j];
      EXPECT_EQ(ix, beta.component(j));
    }
  }
}
