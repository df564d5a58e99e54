#include "coiso/multivector.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "coiso/errors.hpp"

namespace coiso {

namespace {

bool is_direction(const VarSet& vars, std::size_t i) {
  return i < vars.size() && vars[i].kind != VarKind::time;
}

// Wedge of two increasing frames. Returns 0 when they share a direction,
// otherwise the sign of the merging permutation; `out` receives the merge.
int merge_frames(const Frame& a, const Frame& b, Frame& out) {
  out.clear();
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  int inversions = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j])
      return 0;
    if (a[i] < b[j]) {
      out.push_back(a[i++]);
    } else {
      // b[j] jumps over the remaining a's.
      inversions += static_cast<int>(a.size() - i);
      out.push_back(b[j++]);
    }
  }
  while (i < a.size())
    out.push_back(a[i++]);
  while (j < b.size())
    out.push_back(b[j++]);
  return (inversions % 2) ? -1 : 1;
}

inline int parity_sign(long n) { return (n % 2 == 0) ? 1 : -1; }

} // namespace

Multivector::Multivector(VarSetPtr vars, unsigned degree) : vars_(std::move(vars)), degree_(degree) {}

Multivector Multivector::scalar(const ScalarFn& f) {
  Multivector m(f.vars(), 0);
  m.add_term({}, f);
  return m;
}

Multivector Multivector::direction(VarSetPtr vars, std::size_t var) {
  if (!is_direction(*vars, var))
    throw InputError("not a base or fibre direction");
  ScalarFn one(vars, 1);
  Multivector m(std::move(vars), 1);
  m.add_term({static_cast<std::uint32_t>(var)}, one);
  return m;
}

Multivector Multivector::term(const ScalarFn& coeff, Frame frame) {
  const auto& vars = coeff.vars();
  for (auto d : frame)
    if (!is_direction(*vars, d))
      throw InputError("frame entry is not a base or fibre direction");
  Multivector m(vars, static_cast<unsigned>(frame.size()));
  // Insertion sort tracking the parity.
  int sign = 1;
  for (std::size_t i = 1; i < frame.size(); ++i) {
    for (std::size_t j = i; j > 0 && frame[j - 1] >= frame[j]; --j) {
      if (frame[j - 1] == frame[j])
        return m;
      std::swap(frame[j - 1], frame[j]);
      sign = -sign;
    }
  }
  m.add_term(frame, sign > 0 ? coeff : -coeff);
  return m;
}

ScalarFn Multivector::coefficient(const Frame& frame) const {
  auto it = terms_.find(frame);
  return it == terms_.end() ? ScalarFn(vars_) : it->second;
}

ScalarFn Multivector::as_scalar() const {
  if (degree_ != 0)
    throw InputError("multivector of positive degree used as a function");
  return coefficient({});
}

void Multivector::add_term(const Frame& frame, const ScalarFn& coeff) {
  if (frame.size() != degree_)
    throw InputError("frame length does not match multivector degree");
  if (coeff.is_zero())
    return;
  require_same_vars(vars_, coeff.vars());
  auto [it, inserted] = terms_.try_emplace(frame, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second.is_zero())
      terms_.erase(it);
  }
}

Multivector& Multivector::operator+=(const Multivector& other) {
  require_same_vars(vars_, other.vars_);
  if (other.is_zero())
    return *this;
  if (is_zero())
    degree_ = other.degree_;
  if (degree_ != other.degree_)
    throw InputError("adding multivectors of different degree");
  for (const auto& [f, c] : other.terms_)
    add_term(f, c);
  return *this;
}

Multivector& Multivector::operator-=(const Multivector& other) { return *this += -other; }

Multivector& Multivector::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [f, coeff] : terms_)
    coeff *= c;
  return *this;
}

Multivector& Multivector::operator*=(const ScalarFn& g) {
  TermMap next;
  for (auto& [f, coeff] : terms_) {
    ScalarFn c = coeff * g;
    if (!c.is_zero())
      next.emplace(f, std::move(c));
  }
  terms_ = std::move(next);
  return *this;
}

Multivector Multivector::operator-() const {
  Multivector out(*this);
  for (auto& [f, c] : out.terms_)
    c = -c;
  return out;
}

bool Multivector::operator==(const Multivector& other) const {
  if (!same_vars(vars_, other.vars_))
    return false;
  if (is_zero() && other.is_zero())
    return true;
  return degree_ == other.degree_ && terms_ == other.terms_;
}

std::size_t Multivector::size() const {
  std::size_t n = 0;
  for (const auto& [f, c] : terms_)
    n += c.term_count();
  return n;
}

unsigned Multivector::fibre_degree() const {
  unsigned d = 0;
  for (const auto& [f, c] : terms_)
    d = std::max(d, c.degree_in_kind(VarKind::fibre));
  return d;
}

std::string Multivector::to_string() const {
  if (terms_.empty())
    return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [f, c] : terms_) {
    if (!first)
      os << " + ";
    first = false;
    os << '(' << c.to_string() << ')';
    for (std::size_t i = 0; i < f.size(); ++i)
      os << (i == 0 ? "*" : "^") << 'd' << (*vars_)[f[i]].name;
  }
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Multivector& m) { return os << m.to_string(); }

Multivector wedge(const Multivector& a, const Multivector& b) {
  require_same_vars(a.vars(), b.vars());
  Multivector out(a.vars(), a.degree() + b.degree());
  Frame merged;
  for (const auto& [fa, ca] : a.terms()) {
    for (const auto& [fb, cb] : b.terms()) {
      const int sign = merge_frames(fa, fb, merged);
      if (sign == 0)
        continue;
      ScalarFn c = ca * cb;
      if (sign < 0)
        c = -c;
      out.add_term(merged, c);
    }
  }
  return out;
}

// Coordinate formula with odd generators xi_i for the directions:
//   [A, B] = sum_i (A d/dxi_i)(d/dx_i B) - (-1)^{(a-1)(b-1)} (B d/dxi_i)(d/dx_i A),
// right derivatives in xi, products in the exterior algebra.
Multivector schouten(const Multivector& a, const Multivector& b) {
  require_same_vars(a.vars(), b.vars());
  const int da = static_cast<int>(a.degree());
  const int db = static_cast<int>(b.degree());
  const unsigned out_degree = (da + db >= 1) ? static_cast<unsigned>(da + db - 1) : 0u;
  Multivector out(a.vars(), out_degree);
  if (da + db == 0)
    return out;
  const int swap_sign = -parity_sign(static_cast<long>(da - 1) * (db - 1));

  Frame reduced, merged;
  // (X d/dxi_i) * (d/dx_i Y) summed over the directions of X's frame.
  auto half = [&](const Multivector& x, const Multivector& y, int outer_sign) {
    for (const auto& [fx, cx] : x.terms()) {
      const std::size_t k = fx.size();
      for (std::size_t m = 0; m < k; ++m) {
        const auto dir = fx[m];
        reduced.assign(fx.begin(), fx.end());
        reduced.erase(reduced.begin() + static_cast<long>(m));
        const int rd_sign = parity_sign(static_cast<long>(k - 1 - m));
        for (const auto& [fy, cy] : y.terms()) {
          if (!cy.depends_on(dir))
            continue;
          const int sign = merge_frames(reduced, fy, merged);
          if (sign == 0)
            continue;
          ScalarFn c = cx * cy.derivative(dir);
          const int total = sign * rd_sign * outer_sign;
          if (total < 0)
            c = -c;
          out.add_term(merged, c);
        }
      }
    }
  };
  half(a, b, 1);
  half(b, a, swap_sign);
  return out;
}

Multivector project_P(const Multivector& a) {
  const auto& vars = *a.vars();
  Multivector out(a.vars(), a.degree());
  for (const auto& [f, c] : a.terms()) {
    const bool vertical =
        std::all_of(f.begin(), f.end(), [&](auto d) { return vars[d].kind == VarKind::fibre; });
    if (vertical)
      out.add_term(f, c.drop_kind(VarKind::fibre));
  }
  return out;
}

Multivector pushforward_translate(const Multivector& a, std::span<const ScalarFn> section, int sign) {
  if (sign != 1 && sign != -1)
    throw InputError("translation sign must be +1 or -1");
  const auto& vars_ptr = a.vars();
  const auto& vars = *vars_ptr;
  const auto fibre = vars.indices_of(VarKind::fibre);
  if (section.size() != fibre.size())
    throw InputError("section must have one component per fibre variable");
  for (const auto& s : section) {
    require_same_vars(vars_ptr, s.vars());
    if (s.depends_on_kind(VarKind::fibre))
      throw InputError("section components must not depend on fibre variables");
  }

  // Coefficients are evaluated at the preimage (x, p - sign*s).
  std::vector<std::pair<std::size_t, ScalarFn>> subs;
  for (std::size_t j = 0; j < fibre.size(); ++j)
    subs.emplace_back(fibre[j], ScalarFn::variable(vars_ptr, fibre[j]) - Rational(sign) * section[j]);

  // Image of each coordinate direction under the differential.
  std::vector<Multivector> image;
  image.reserve(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].kind == VarKind::time) {
      image.emplace_back(vars_ptr, 1);
      continue;
    }
    Multivector d = Multivector::direction(vars_ptr, i);
    if (vars[i].kind == VarKind::base) {
      for (std::size_t j = 0; j < fibre.size(); ++j) {
        ScalarFn ds = section[j].derivative(i);
        if (!ds.is_zero())
          d += Multivector::term(Rational(sign) * ds, {static_cast<std::uint32_t>(fibre[j])});
      }
    }
    image.push_back(std::move(d));
  }

  Multivector out(vars_ptr, a.degree());
  for (const auto& [f, c] : a.terms()) {
    Multivector t = Multivector::scalar(c.substitute(subs));
    for (auto d : f)
      t = wedge(t, image[d]);
    out += t;
  }
  return out;
}

ScalarFn OneForm::component(std::size_t var) const {
  auto it = components.find(var);
  return it == components.end() ? ScalarFn(vars) : it->second;
}

OneForm exterior_derivative(const ScalarFn& f) {
  OneForm beta{f.vars(), {}};
  for (std::size_t i = 0; i < f.vars()->size(); ++i) {
    if (!is_direction(*f.vars(), i))
      continue;
    ScalarFn d = f.derivative(i);
    if (!d.is_zero())
      beta.components.emplace(i, std::move(d));
  }
  return beta;
}

Multivector contract(const Multivector& pi, const OneForm& beta) {
  if (pi.degree() != 2 && !pi.is_zero())
    throw InputError("contract expects a bivector");
  require_same_vars(pi.vars(), beta.vars);
  for (const auto& [v, c] : beta.components)
    if (!is_direction(*beta.vars, v))
      throw InputError("one-form component on a non-direction variable");
  Multivector out(pi.vars(), 1);
  for (const auto& [f, c] : pi.terms()) {
    const auto i = f[0], j = f[1];
    // Pi^{ij} = c, Pi^{ji} = -c.
    ScalarFn bj = beta.component(j);
    if (!bj.is_zero())
      out.add_term({i}, c * bj);
    ScalarFn bi = beta.component(i);
    if (!bi.is_zero())
      out.add_term({j}, -(c * bi));
  }
  return out;
}

bool is_closed(const OneForm& beta) {
  const auto& vars = *beta.vars;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (!is_direction(vars, i))
      continue;
    for (std::size_t j = i + 1; j < vars.size(); ++j) {
      if (!is_direction(vars, j))
        continue;
      if (beta.component(i).derivative(j) != beta.component(j).derivative(i))
        return false;
    }
  }
  return true;
}

RationalMatrix invert_matrix(const RationalMatrix& m) {
  const std::size_t n = m.size();
  for (const auto& row : m)
    if (row.size() != n)
      throw InputError("matrix is not square");
  RationalMatrix a = m;
  RationalMatrix inv(n, std::vector<Rational>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    inv[i][i] = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0)
      ++pivot;
    if (pivot == n)
      throw InputError("singular matrix");
    std::swap(a[pivot], a[col]);
    std::swap(inv[pivot], inv[col]);
    const Rational p = a[col][col];
    for (std::size_t k = 0; k < n; ++k) {
      a[col][k] /= p;
      inv[col][k] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0)
        continue;
      const Rational factor = a[r][col];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= factor * a[col][k];
        inv[r][k] -= factor * inv[col][k];
      }
    }
  }
  return inv;
}

Multivector invert_constant_symplectic(const VarSetPtr& vars, std::span<const std::size_t> directions,
                                       const RationalMatrix& matrix) {
  const std::size_t n = directions.size();
  if (matrix.size() != n)
    throw InputError("matrix size does not match the direction list");
  for (std::size_t i = 0; i < n; ++i) {
    if (matrix[i].size() != n)
      throw InputError("matrix is not square");
    for (std::size_t j = 0; j < n; ++j)
      if (matrix[i][j] != -matrix[j][i])
        throw InputError("matrix is not antisymmetric");
  }
  const RationalMatrix inv = invert_matrix(matrix);
  Multivector pi(vars, 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (inv[i][j] != 0)
        pi += Multivector::term(ScalarFn(vars, -inv[i][j]),
                                {static_cast<std::uint32_t>(directions[i]),
                                 static_cast<std::uint32_t>(directions[j])});
  return pi;
}

} // namespace coiso
