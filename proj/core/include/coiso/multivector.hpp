#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "coiso/scalar_fn.hpp"

namespace coiso {

// Strictly increasing chart indices of base/fibre directions; (i, j) stands
// for the wedge of the coordinate directions of variables i and j.
using Frame = std::vector<std::uint32_t>;

using RationalMatrix = std::vector<std::vector<Rational>>;

// Homogeneous multivector field on a chart. Degree-0 multivectors are
// functions (frame = {}).
class Multivector {
public:
  using TermMap = std::map<Frame, ScalarFn>;

  Multivector(VarSetPtr vars, unsigned degree);

  static Multivector scalar(const ScalarFn& f);
  static Multivector direction(VarSetPtr vars, std::size_t var);
  // Sorts `frame` into chart order, applying the permutation sign. Repeated
  // directions give zero.
  static Multivector term(const ScalarFn& coeff, Frame frame);

  unsigned degree() const noexcept { return degree_; }
  const VarSetPtr& vars() const noexcept { return vars_; }
  const TermMap& terms() const noexcept { return terms_; }
  std::size_t term_count() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  ScalarFn coefficient(const Frame& frame) const;
  // Degree-0 value; zero for an empty multivector.
  ScalarFn as_scalar() const;

  // Frame must already be strictly increasing.
  void add_term(const Frame& frame, const ScalarFn& coeff);

  Multivector& operator+=(const Multivector& other);
  Multivector& operator-=(const Multivector& other);
  Multivector& operator*=(const Rational& c);
  Multivector& operator*=(const ScalarFn& f);

  friend Multivector operator+(Multivector a, const Multivector& b) { return a += b; }
  friend Multivector operator-(Multivector a, const Multivector& b) { return a -= b; }
  friend Multivector operator*(Multivector a, const Rational& c) { return a *= c; }
  friend Multivector operator*(const Rational& c, Multivector a) { return a *= c; }
  friend Multivector operator*(const ScalarFn& f, Multivector a) { return a *= f; }
  Multivector operator-() const;

  // Equal term maps; two zero multivectors are equal regardless of degree.
  bool operator==(const Multivector& other) const;

  // Applies `fn` to every coefficient and drops the ones that become zero.
  template <typename Fn>
  Multivector map_coefficients(Fn&& fn) const {
    Multivector out(vars_, degree_);
    for (const auto& [frame, c] : terms_)
      out.add_term(frame, fn(c));
    return out;
  }

  // Total number of polynomial terms across all coefficients.
  std::size_t size() const;
  // Largest combined degree of the coefficients in the fibre variables.
  unsigned fibre_degree() const;

  std::string to_string() const;

private:
  VarSetPtr vars_;
  unsigned degree_;
  TermMap terms_;
};

std::ostream& operator<<(std::ostream& os, const Multivector& m);

Multivector wedge(const Multivector& a, const Multivector& b);

// Schouten-Nijenhuis bracket. Conventions: [X, f] = X(f) for a vector field,
// [X, Y] is the Lie bracket, and
//   [A, B] = -(-1)^{(|A|-1)(|B|-1)} [B, A],
//   [A, B^C] = [A, B]^C + (-1)^{(|A|-1)|B|} B^[A, C].
// [f, g] of two functions is the zero function.
Multivector schouten(const Multivector& a, const Multivector& b);

// Restriction to the zero section composed with the projection onto the
// fibre directions: drops every term with a base direction and sets the
// fibre variables to zero.
Multivector project_P(const Multivector& a);

// Pushforward by the fibre translation (x, p) -> (x, p + sign*s(x)).
// `section` holds one function of the base variables per fibre variable.
Multivector pushforward_translate(const Multivector& a, std::span<const ScalarFn> section, int sign);

struct OneForm {
  VarSetPtr vars;
  // Coefficient of d(variable), keyed by chart index of a base/fibre variable.
  std::map<std::size_t, ScalarFn> components;

  ScalarFn component(std::size_t var) const;
};

OneForm exterior_derivative(const ScalarFn& f);

// The vector field X with i_X(omega) = beta, i.e. X^k = Pi^{ki} beta_i. For
// beta = dH this is schouten(pi, H).
Multivector contract(const Multivector& pi, const OneForm& beta);

bool is_closed(const OneForm& beta);

// Constant bivector whose sharp map is -(omega sharp)^{-1} for the constant
// 2-form sum_{i<j} matrix[i][j] d(v_i)^d(v_j), v_i = directions[i].
// Throws InputError when the matrix is not antisymmetric or is singular.
Multivector invert_constant_symplectic(const VarSetPtr& vars, std::span<const std::size_t> directions,
                                       const RationalMatrix& matrix);

// Exact inverse over the rationals; throws InputError if singular.
RationalMatrix invert_matrix(const RationalMatrix& m);

} // namespace coiso
