#include "coiso/scalar_fn.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <ostream>
#include <sstream>

#include "coiso/errors.hpp"

namespace coiso {

std::string_view to_string(VarKind kind) {
  switch (kind) {
  case VarKind::base:
    return "base";
  case VarKind::fibre:
    return "fibre";
  case VarKind::time:
    return "time";
  }
  return "?";
}

VarSet::VarSet(std::vector<Variable> vars) : vars_(std::move(vars)) {
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (vars_[i].name.empty())
      throw InputError("empty variable name");
    for (std::size_t j = 0; j < i; ++j)
      if (vars_[j].name == vars_[i].name)
        throw InputError("duplicate variable '" + vars_[i].name + "'");
  }
}

std::optional<std::size_t> VarSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name)
      return i;
  return std::nullopt;
}

std::size_t VarSet::index(std::string_view name) const {
  if (auto i = find(name))
    return *i;
  throw InputError("unknown variable '" + std::string(name) + "'");
}

std::vector<std::size_t> VarSet::indices_of(VarKind kind) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].kind == kind)
      out.push_back(i);
  return out;
}

VarSetPtr make_varset(std::vector<Variable> vars) {
  return std::make_shared<const VarSet>(std::move(vars));
}

bool same_vars(const VarSetPtr& a, const VarSetPtr& b) {
  return a == b || (a && b && *a == *b);
}

void require_same_vars(const VarSetPtr& a, const VarSetPtr& b) {
  if (!same_vars(a, b))
    throw VariableMismatch("operands use different chart variable sets");
}

bool GrLexGreater::operator()(const Exponents& a, const Exponents& b) const {
  const auto da = std::accumulate(a.begin(), a.end(), 0u);
  const auto db = std::accumulate(b.begin(), b.end(), 0u);
  if (da != db)
    return da > db;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

// --- ScalarFn ---------------------------------------------------------------

ScalarFn::ScalarFn(VarSetPtr vars) : vars_(std::move(vars)) {}

ScalarFn::ScalarFn(VarSetPtr vars, const Rational& constant) : vars_(std::move(vars)) {
  if (constant != 0)
    terms_.emplace(Exponents(vars_->size(), 0), constant);
}

ScalarFn ScalarFn::variable(VarSetPtr vars, std::size_t index) {
  if (index >= vars->size())
    throw InputError("variable index out of range");
  Exponents e(vars->size(), 0);
  e[index] = 1;
  return monomial(std::move(vars), std::move(e), 1);
}

ScalarFn ScalarFn::variable(VarSetPtr vars, std::string_view name) {
  const auto i = vars->index(name);
  return variable(std::move(vars), i);
}

ScalarFn ScalarFn::monomial(VarSetPtr vars, Exponents exps, const Rational& coeff) {
  if (exps.size() != vars->size())
    throw InputError("exponent vector length does not match chart");
  ScalarFn f(std::move(vars));
  if (coeff != 0)
    f.terms_.emplace(std::move(exps), coeff);
  return f;
}

void ScalarFn::add_term(const Exponents& e, const Rational& c) {
  if (c == 0)
    return;
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0)
      terms_.erase(it);
  }
}

bool ScalarFn::is_constant() const {
  return terms_.empty() ||
         (terms_.size() == 1 &&
          std::all_of(terms_.begin()->first.begin(), terms_.begin()->first.end(),
                      [](auto x) { return x == 0; }));
}

Rational ScalarFn::constant_term() const {
  auto it = terms_.find(Exponents(vars_->size(), 0));
  return it == terms_.end() ? Rational(0) : it->second;
}

unsigned ScalarFn::total_degree() const {
  // Graded order puts the highest degree first.
  if (terms_.empty())
    return 0;
  const auto& e = terms_.begin()->first;
  return std::accumulate(e.begin(), e.end(), 0u);
}

unsigned ScalarFn::degree_in(std::size_t var) const {
  unsigned d = 0;
  for (const auto& [e, c] : terms_)
    d = std::max(d, e[var]);
  return d;
}

unsigned ScalarFn::degree_in_kind(VarKind kind) const {
  const auto idx = vars_->indices_of(kind);
  unsigned d = 0;
  for (const auto& [e, c] : terms_) {
    unsigned s = 0;
    for (auto i : idx)
      s += e[i];
    d = std::max(d, s);
  }
  return d;
}

bool ScalarFn::depends_on(std::size_t var) const {
  return std::any_of(terms_.begin(), terms_.end(), [&](const auto& t) { return t.first[var] > 0; });
}

bool ScalarFn::depends_on_kind(VarKind kind) const {
  for (auto i : vars_->indices_of(kind))
    if (depends_on(i))
      return true;
  return false;
}

ScalarFn& ScalarFn::operator+=(const ScalarFn& other) {
  require_same_vars(vars_, other.vars_);
  for (const auto& [e, c] : other.terms_)
    add_term(e, c);
  return *this;
}

ScalarFn& ScalarFn::operator-=(const ScalarFn& other) {
  require_same_vars(vars_, other.vars_);
  for (const auto& [e, c] : other.terms_)
    add_term(e, -c);
  return *this;
}

ScalarFn operator*(const ScalarFn& a, const ScalarFn& b) {
  require_same_vars(a.vars_, b.vars_);
  ScalarFn out(a.vars_);
  const std::size_t n = a.vars_->size();
  Exponents e(n);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      for (std::size_t i = 0; i < n; ++i)
        e[i] = ea[i] + eb[i];
      out.add_term(e, ca * cb);
    }
  }
  return out;
}

ScalarFn& ScalarFn::operator*=(const ScalarFn& other) { return *this = *this * other; }

ScalarFn& ScalarFn::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, coeff] : terms_)
    coeff *= c;
  return *this;
}

ScalarFn ScalarFn::operator-() const {
  ScalarFn out(*this);
  for (auto& [e, c] : out.terms_)
    c = -c;
  return out;
}

bool ScalarFn::operator==(const ScalarFn& other) const {
  return same_vars(vars_, other.vars_) && terms_ == other.terms_;
}

ScalarFn ScalarFn::derivative(std::size_t var) const {
  if (var >= vars_->size())
    throw VariableMismatch("variable index out of range for derivative");
  ScalarFn out(vars_);
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0)
      continue;
    Exponents d = e;
    --d[var];
    out.add_term(d, c * e[var]);
  }
  return out;
}

ScalarFn ScalarFn::pow(unsigned e) const {
  ScalarFn result(vars_, 1);
  ScalarFn base = *this;
  while (e) {
    if (e & 1u)
      result *= base;
    e >>= 1u;
    if (e)
      base *= base;
  }
  return result;
}

ScalarFn ScalarFn::substitute(std::size_t var, const ScalarFn& g) const {
  return substitute(std::vector<std::pair<std::size_t, ScalarFn>>{{var, g}});
}

ScalarFn ScalarFn::substitute(const std::vector<std::pair<std::size_t, ScalarFn>>& subs) const {
  for (const auto& [v, g] : subs) {
    if (v >= vars_->size())
      throw VariableMismatch("substitution variable out of range");
    require_same_vars(vars_, g.vars());
  }
  // Cached powers g^k per substituted variable.
  std::vector<std::vector<ScalarFn>> powers(subs.size());
  auto power = [&](std::size_t s, unsigned k) -> const ScalarFn& {
    auto& cache = powers[s];
    if (cache.empty())
      cache.emplace_back(vars_, 1);
    while (cache.size() <= k)
      cache.push_back(cache.back() * subs[s].second);
    return cache[k];
  };

  ScalarFn out(vars_);
  for (const auto& [e, c] : terms_) {
    Exponents rest = e;
    for (const auto& [v, g] : subs)
      rest[v] = 0;
    ScalarFn term = monomial(vars_, rest, c);
    for (std::size_t s = 0; s < subs.size(); ++s) {
      const unsigned k = e[subs[s].first];
      if (k > 0)
        term *= power(s, k);
    }
    out += term;
  }
  return out;
}

ScalarFn ScalarFn::substitute(std::size_t var, const Rational& value) const {
  if (var >= vars_->size())
    throw VariableMismatch("substitution variable out of range");
  ScalarFn out(vars_);
  for (const auto& [e, c] : terms_) {
    Exponents rest = e;
    rest[var] = 0;
    Rational factor = 1;
    for (unsigned k = 0; k < e[var]; ++k)
      factor *= value;
    out.add_term(rest, c * factor);
  }
  return out;
}

ScalarFn ScalarFn::drop_kind(VarKind kind) const {
  const auto idx = vars_->indices_of(kind);
  ScalarFn out(vars_);
  for (const auto& [e, c] : terms_) {
    if (std::all_of(idx.begin(), idx.end(), [&](auto i) { return e[i] == 0; }))
      out.terms_.emplace(e, c);
  }
  return out;
}

double ScalarFn::evaluate(std::span<const double> values) const {
  if (values.size() != vars_->size())
    throw InputError("evaluation point has wrong dimension");
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    double m = c.get_d();
    for (std::size_t i = 0; i < e.size(); ++i)
      for (unsigned k = 0; k < e[i]; ++k)
        m *= values[i];
    sum += m;
  }
  return sum;
}

double ScalarFn::evaluate(const std::map<std::string, double>& point) const {
  std::vector<double> values(vars_->size(), 0.0);
  for (std::size_t i = 0; i < vars_->size(); ++i) {
    auto it = point.find((*vars_)[i].name);
    if (it != point.end())
      values[i] = it->second;
    else if (depends_on(i))
      throw InputError("no value assigned to variable '" + (*vars_)[i].name + "'");
  }
  return evaluate(values);
}

std::string rational_to_string(const Rational& q) {
  Rational c = q;
  c.canonicalize();
  return c.get_str();
}

std::string ScalarFn::to_string() const {
  if (terms_.empty())
    return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    const bool negative = sgn(c) < 0;
    const Rational mag = abs(c);
    if (first)
      os << (negative ? "-" : "");
    else
      os << (negative ? " - " : " + ");
    first = false;

    bool wrote = false;
    const bool constant = std::all_of(e.begin(), e.end(), [](auto x) { return x == 0; });
    if (mag != 1 || constant) {
      os << rational_to_string(mag);
      wrote = true;
    }
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0)
        continue;
      if (wrote)
        os << '*';
      os << (*vars_)[i].name;
      if (e[i] > 1)
        os << '^' << e[i];
      wrote = true;
    }
  }
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const ScalarFn& f) { return os << f.to_string(); }

// --- Parsing ----------------------------------------------------------------

namespace {

class PolyParser {
public:
  PolyParser(std::string_view text, const VarSetPtr& vars) : text_(text), vars_(vars) {}

  ScalarFn run() {
    skip_ws();
    if (at_end())
      fail("empty polynomial");
    ScalarFn result(vars_);
    bool first = true;
    while (true) {
      skip_ws();
      int sign = 1;
      if (!at_end() && (peek() == '+' || peek() == '-')) {
        sign = peek() == '-' ? -1 : 1;
        ++pos_;
        skip_ws();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      ScalarFn t = term();
      if (sign < 0)
        t = -t;
      result += t;
      first = false;
      skip_ws();
      if (at_end())
        break;
    }
    return result;
  }

private:
  ScalarFn term() {
    ScalarFn t = factor();
    while (true) {
      skip_ws();
      if (at_end() || peek() != '*')
        return t;
      ++pos_;
      skip_ws();
      t *= factor();
    }
  }

  ScalarFn factor() {
    if (at_end())
      fail("expected a number or variable");
    const char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)))
      return ScalarFn(vars_, rational());
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
        ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      const auto idx = vars_->find(name);
      if (!idx)
        fail("unknown variable '" + std::string(name) + "'", start);
      unsigned exponent = 1;
      skip_ws();
      if (!at_end() && peek() == '^') {
        ++pos_;
        skip_ws();
        if (!at_end() && peek() == '-')
          fail("negative exponent");
        exponent = static_cast<unsigned>(integer());
      }
      Exponents e(vars_->size(), 0);
      e[*idx] = exponent;
      return ScalarFn::monomial(vars_, std::move(e), 1);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Rational rational() {
    const std::size_t start = pos_;
    const std::string num = digits();
    skip_ws();
    if (!at_end() && peek() == '/') {
      ++pos_;
      skip_ws();
      if (at_end() || !std::isdigit(static_cast<unsigned char>(peek())))
        fail("malformed rational", start);
      const std::string den = digits();
      mpz_class d(den);
      if (d == 0)
        fail("malformed rational: zero denominator", start);
      Rational q(mpz_class(num), d);
      q.canonicalize();
      return q;
    }
    return Rational(mpz_class(num));
  }

  unsigned long integer() {
    if (at_end() || !std::isdigit(static_cast<unsigned char>(peek())))
      fail("expected an integer exponent");
    const std::string d = digits();
    if (d.size() > 6)
      fail("exponent too large");
    return std::stoul(d);
  }

  std::string digits() {
    const std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek())))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek())))
      ++pos_;
  }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos_); }
  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw ParseError("polynomial '" + std::string(text_) + "': " + msg, 1, at + 1);
  }

  std::string_view text_;
  const VarSetPtr& vars_;
  std::size_t pos_ = 0;
};

} // namespace

ScalarFn parse(std::string_view text, const VarSetPtr& vars) { return PolyParser(text, vars).run(); }

Rational parse_rational(std::string_view text) {
  static const VarSetPtr none = make_varset({});
  const ScalarFn f = parse(text, none);
  return f.constant_term();
}

// --- CompiledPoly -----------------------------------------------------------

CompiledPoly::CompiledPoly(const ScalarFn& f) {
  offsets_.push_back(0);
  for (const auto& [e, c] : f.terms()) {
    coeffs_.push_back(c.get_d());
    for (std::uint32_t i = 0; i < e.size(); ++i)
      if (e[i] > 0)
        factors_.emplace_back(i, e[i]);
    offsets_.push_back(static_cast<std::uint32_t>(factors_.size()));
  }
}

double CompiledPoly::operator()(std::span<const double> values) const { return (*this)(values.data()); }

double CompiledPoly::operator()(const double* values) const {
  double sum = 0.0;
  for (std::size_t t = 0; t < coeffs_.size(); ++t) {
    double m = coeffs_[t];
    for (auto k = offsets_[t]; k < offsets_[t + 1]; ++k) {
      const double x = values[factors_[k].first];
      for (std::uint32_t p = 0; p < factors_[k].second; ++p)
        m *= x;
    }
    sum += m;
  }
  return sum;
}

void CompiledPoly::eval_block(const double* columns, std::size_t count, double* out, double* scratch) const {
  std::fill(out, out + count, 0.0);
  for (std::size_t t = 0; t < coeffs_.size(); ++t) {
    const double c = coeffs_[t];
    const auto begin = offsets_[t], end = offsets_[t + 1];
    if (begin == end) {
      for (std::size_t i = 0; i < count; ++i)
        out[i] += c;
      continue;
    }
    if (end - begin == 1 && factors_[begin].second == 1) {
      const double* x = columns + factors_[begin].first * count;
      for (std::size_t i = 0; i < count; ++i)
        out[i] += c * x[i];
      continue;
    }
    for (std::size_t i = 0; i < count; ++i)
      scratch[i] = c;
    for (auto k = begin; k < end; ++k) {
      const double* x = columns + factors_[k].first * count;
      for (std::uint32_t p = 0; p < factors_[k].second; ++p)
        for (std::size_t i = 0; i < count; ++i)
          scratch[i] *= x[i];
    }
    for (std::size_t i = 0; i < count; ++i)
      out[i] += scratch[i];
  }
}

} // namespace coiso
