#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace coiso {

using Rational = mpq_class;

enum class VarKind { base, fibre, time };

std::string_view to_string(VarKind kind);

struct Variable {
  std::string name;
  VarKind kind;

  bool operator==(const Variable&) const = default;
};

// Ordered variable list of a chart. The declared order fixes the canonical
// term ordering and the ordering of frame directions.
class VarSet {
public:
  explicit VarSet(std::vector<Variable> vars);

  std::size_t size() const noexcept { return vars_.size(); }
  const Variable& operator[](std::size_t i) const { return vars_[i]; }
  const std::vector<Variable>& variables() const noexcept { return vars_; }

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws InputError for an unknown name.
  std::size_t index(std::string_view name) const;
  std::vector<std::size_t> indices_of(VarKind kind) const;

  bool operator==(const VarSet& other) const { return vars_ == other.vars_; }

private:
  std::vector<Variable> vars_;
};

using VarSetPtr = std::shared_ptr<const VarSet>;

VarSetPtr make_varset(std::vector<Variable> vars);

// Both pointers refer to the same variable list (by identity or by value).
bool same_vars(const VarSetPtr& a, const VarSetPtr& b);
void require_same_vars(const VarSetPtr& a, const VarSetPtr& b);

using Exponents = std::vector<std::uint32_t>;

// Graded lexicographic order, largest first.
struct GrLexGreater {
  bool operator()(const Exponents& a, const Exponents& b) const;
};

// Exact polynomial with rational coefficients over a chart's variables.
// The term map never stores zero coefficients, so equal functions have equal
// maps.
class ScalarFn {
public:
  using TermMap = std::map<Exponents, Rational, GrLexGreater>;

  explicit ScalarFn(VarSetPtr vars);
  ScalarFn(VarSetPtr vars, const Rational& constant);

  static ScalarFn variable(VarSetPtr vars, std::size_t index);
  static ScalarFn variable(VarSetPtr vars, std::string_view name);
  static ScalarFn monomial(VarSetPtr vars, Exponents exps, const Rational& coeff);

  const VarSetPtr& vars() const noexcept { return vars_; }
  const TermMap& terms() const noexcept { return terms_; }
  std::size_t term_count() const noexcept { return terms_.size(); }

  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_constant() const;
  Rational constant_term() const;

  unsigned total_degree() const;
  unsigned degree_in(std::size_t var) const;
  // Largest combined degree in the variables of one kind.
  unsigned degree_in_kind(VarKind kind) const;
  bool depends_on(std::size_t var) const;
  bool depends_on_kind(VarKind kind) const;

  ScalarFn& operator+=(const ScalarFn& other);
  ScalarFn& operator-=(const ScalarFn& other);
  ScalarFn& operator*=(const ScalarFn& other);
  ScalarFn& operator*=(const Rational& c);

  friend ScalarFn operator+(ScalarFn a, const ScalarFn& b) { return a += b; }
  friend ScalarFn operator-(ScalarFn a, const ScalarFn& b) { return a -= b; }
  friend ScalarFn operator*(const ScalarFn& a, const ScalarFn& b);
  friend ScalarFn operator*(ScalarFn a, const Rational& c) { return a *= c; }
  friend ScalarFn operator*(const Rational& c, ScalarFn a) { return a *= c; }
  ScalarFn operator-() const;

  bool operator==(const ScalarFn& other) const;

  ScalarFn derivative(std::size_t var) const;
  ScalarFn pow(unsigned e) const;

  // Single-pass composition f(..., g, ...): occurrences of `var` inside g are
  // not substituted again.
  ScalarFn substitute(std::size_t var, const ScalarFn& g) const;
  // Simultaneous single-pass substitution of several variables.
  ScalarFn substitute(const std::vector<std::pair<std::size_t, ScalarFn>>& subs) const;
  ScalarFn substitute(std::size_t var, const Rational& value) const;
  // Sets every variable of the given kind to zero.
  ScalarFn drop_kind(VarKind kind) const;

  // `values` holds one entry per chart variable, in declared order.
  double evaluate(std::span<const double> values) const;
  // Throws InputError when a variable appearing in f is unassigned.
  double evaluate(const std::map<std::string, double>& point) const;

  std::string to_string() const;

private:
  void add_term(const Exponents& e, const Rational& c);

  VarSetPtr vars_;
  TermMap terms_;
};

std::ostream& operator<<(std::ostream& os, const ScalarFn& f);

// Grammar: signed terms `c`, `c*v1^e1*...`, rational c as `a` or `a/b`.
ScalarFn parse(std::string_view text, const VarSetPtr& vars);
Rational parse_rational(std::string_view text);
std::string rational_to_string(const Rational& q);

inline ScalarFn partial_derivative(const ScalarFn& f, std::size_t var) {
  return f.derivative(var);
}

// Floating-point image of a ScalarFn for tight numeric loops.
class CompiledPoly {
public:
  CompiledPoly() = default;
  explicit CompiledPoly(const ScalarFn& f);

  bool is_zero() const noexcept { return coeffs_.empty(); }
  double operator()(std::span<const double> values) const;
  double operator()(const double* values) const;
  // Structure-of-arrays evaluation: variable v of state i is
  // columns[v * count + i]. `scratch` holds at least `count` doubles.
  void eval_block(const double* columns, std::size_t count, double* out, double* scratch) const;

private:
  std::vector<double> coeffs_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> factors_;
};

} // namespace coiso
