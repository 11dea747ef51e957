// SPDX-License-Identifier: Apache-2.0
#include "rddl/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rddl {

unsigned monomial_degree(const Monomial& m) {
  unsigned d = 0;
  for (auto& [v, e] : m) d += e;
  return d;
}

Monomial monomial_mul(const Monomial& a, const Monomial& b) {
  Monomial r = a;
  for (auto& [v, e] : b) r[v] += e;
  return r;
}

Monomial monomial_gcd(const Monomial& a, const Monomial& b) {
  Monomial r;
  for (auto& [v, e] : a) {
    auto it = b.find(v);
    if (it != b.end()) r[v] = std::min(e, it->second);
  }
  return r;
}

bool monomial_divides(const Monomial& b, const Monomial& a) {
  for (auto& [v, e] : b) {
    auto it = a.find(v);
    if (it == a.end() || it->second < e) return false;
  }
  return true;
}

Monomial monomial_div(const Monomial& a, const Monomial& b) {
  Monomial r = a;
  for (auto& [v, e] : b) {
    auto it = r.find(v);
    if (it == r.end() || it->second < e) throw std::logic_error("monomial_div: not divisible");
    it->second -= e;
    if (it->second == 0) r.erase(it);
  }
  return r;
}

bool GradedLex::operator()(const Monomial& a, const Monomial& b) const {
  unsigned da = monomial_degree(a), db = monomial_degree(b);
  if (da != db) return da < db;
  // lexicographic on sorted variable names; earlier name with higher power is larger
  auto ia = a.begin(), ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first != ib->first) {
      // the monomial owning the alphabetically-earlier variable is lex-greater
      return ia->first > ib->first;
    }
    if (ia->second != ib->second) return ia->second < ib->second;
    ++ia; ++ib;
  }
  return ia == a.end() && ib != b.end();
}

Polynomial::Polynomial(const Rational& c) {
  if (c != 0) terms_[Monomial{}] = c;
}

Polynomial Polynomial::variable(const std::string& name) {
  Polynomial p;
  p.terms_[Monomial{{name, 1}}] = 1;
  return p;
}

Polynomial Polynomial::constant(const Rational& c) { return Polynomial(c); }

bool Polynomial::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

Rational Polynomial::constant_value() const {
  if (terms_.empty()) return Rational(0);
  return terms_.begin()->second;
}

std::set<std::string> Polynomial::variables() const {
  std::set<std::string> vs;
  for (auto& [m, c] : terms_)
    for (auto& [v, e] : m) vs.insert(v);
  return vs;
}

unsigned Polynomial::total_degree() const {
  unsigned d = 0;
  for (auto& [m, c] : terms_) d = std::max(d, monomial_degree(m));
  return d;
}

void Polynomial::add_term(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_[m] = c;
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Polynomial Polynomial::operator-() const {
  Polynomial r;
  for (auto& [m, c] : terms_) r.terms_[m] = -c;
  return r;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r = *this;
  for (auto& [m, c] : o.terms_) r.add_term(m, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  Polynomial r = *this;
  for (auto& [m, c] : o.terms_) r.add_term(m, -c);
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial r;
  for (auto& [ma, ca] : terms_)
    for (auto& [mb, cb] : o.terms_) r.add_term(monomial_mul(ma, mb), ca * cb);
  return r;
}

Polynomial Polynomial::scaled(const Rational& c) const {
  Polynomial r;
  if (c == 0) return r;
  for (auto& [m, k] : terms_) r.terms_[m] = k * c;
  return r;
}

Polynomial Polynomial::pow(unsigned e) const {
  Polynomial r = Polynomial(Rational(1));
  Polynomial base = *this;
  while (e > 0) {
    if (e & 1u) r = r * base;
    base = base * base;
    e >>= 1u;
  }
  return r;
}

Polynomial Polynomial::derivative(const std::string& var) const {
  Polynomial r;
  for (auto& [m, c] : terms_) {
    auto it = m.find(var);
    if (it == m.end()) continue;
    Monomial dm = m;
    unsigned e = it->second;
    if (e == 1) dm.erase(var); else dm[var] = e - 1;
    r.add_term(dm, c * Rational(e));
  }
  return r;
}

Polynomial Polynomial::substitute(const std::string& var, const Polynomial& value) const {
  Polynomial r;
  for (auto& [m, c] : terms_) {
    auto it = m.find(var);
    if (it == m.end()) {
      r.add_term(m, c);
      continue;
    }
    Monomial rest = m;
    rest.erase(var);
    Polynomial piece;
    piece.add_term(rest, c);
    r = r + piece * value.pow(it->second);
  }
  return r;
}

const Monomial& Polynomial::leading_monomial() const {
  if (terms_.empty()) throw std::logic_error("leading_monomial of zero");
  return terms_.rbegin()->first;
}

const Rational& Polynomial::leading_coefficient() const {
  if (terms_.empty()) throw std::logic_error("leading_coefficient of zero");
  return terms_.rbegin()->second;
}

Monomial Polynomial::content_monomial() const {
  Monomial g;
  bool first = true;
  for (auto& [m, c] : terms_) {
    if (first) { g = m; first = false; }
    else g = monomial_gcd(g, m);
    if (g.empty()) break;
  }
  return g;
}

Polynomial Polynomial::divide_monomial(const Monomial& m) const {
  Polynomial r;
  for (auto& [mm, c] : terms_) r.terms_[monomial_div(mm, m)] = c;
  return r;
}

double Polynomial::evaluate(const std::map<std::string, double>& state) const {
  double acc = 0;
  for (auto& [m, c] : terms_) {
    double t = rational_to_double(c);
    for (auto& [v, e] : m) {
      auto it = state.find(v);
      double x = (it == state.end()) ? 0.0 : it->second;
      t *= std::pow(x, static_cast<int>(e));
    }
    acc += t;
  }
  return acc;
}

Rational Polynomial::evaluate_exact(const std::map<std::string, Rational>& state) const {
  Rational acc = 0;
  for (auto& [m, c] : terms_) {
    Rational t = c;
    for (auto& [v, e] : m) {
      auto it = state.find(v);
      Rational x = (it == state.end()) ? Rational(0) : it->second;
      for (unsigned i = 0; i < e; ++i) t *= x;
    }
    acc += t;
  }
  return acc;
}

namespace {

// Views a polynomial as univariate in `var` with Polynomial coefficients.
std::map<unsigned, Polynomial> coeffs_in(const Polynomial& p, const std::string& var) {
  std::map<unsigned, Polynomial> out;
  for (auto& [m, c] : p.terms()) {
    unsigned e = 0;
    Monomial rest = m;
    auto it = rest.find(var);
    if (it != rest.end()) { e = it->second; rest.erase(it); }
    out[e].add_term(rest, c);
  }
  return out;
}

unsigned degree_in(const Polynomial& p, const std::string& var) {
  unsigned d = 0;
  for (auto& [m, c] : p.terms()) {
    auto it = m.find(var);
    if (it != m.end()) d = std::max(d, it->second);
  }
  return d;
}

Polynomial leading_coeff_in(const Polynomial& p, const std::string& var) {
  auto cs = coeffs_in(p, var);
  if (cs.empty()) return Polynomial();
  return cs.rbegin()->second;
}

// gcd of coefficient polynomials (recursive content).
Polynomial poly_content(const Polynomial& p, const std::string& var) {
  auto cs = coeffs_in(p, var);
  Polynomial g;
  for (auto& [e, c] : cs) g = g.is_zero() ? c : polynomial_gcd(g, c);
  return g;
}

// Pseudo-remainder of a by b in variable var; requires deg_var(b) >= 1.
// Bails out (length_error) when intermediate results explode; the caller
// falls back to a weaker but sound reduction.
Polynomial pseudo_rem(Polynomial a, const Polynomial& b, const std::string& var) {
  unsigned db = degree_in(b, var);
  if (db == 0) throw std::logic_error("pseudo_rem: divisor is constant in the main variable");
  Polynomial lb = leading_coeff_in(b, var);
  while (!a.is_zero() && degree_in(a, var) >= db) {
    unsigned da = degree_in(a, var);
    Polynomial la = leading_coeff_in(a, var);
    Polynomial shift = Polynomial::variable(var).pow(da - db);
    a = a * lb - b * shift * la;
    if (a.terms().size() > 500) throw std::length_error("pseudo_rem blowup");
    if (!a.is_zero() && degree_in(a, var) >= da)
      throw std::logic_error("pseudo_rem stalled");
  }
  return a;
}

Polynomial make_positive_lead(Polynomial p) {
  if (p.is_zero()) return p;
  if (p.leading_coefficient() < 0) return -p;
  return p;
}

// Univariate image of p in `main` with the other variables fixed.
std::map<unsigned, Rational> univariate_image(const Polynomial& p, const std::string& main,
                                              const std::map<std::string, Rational>& at) {
  std::map<unsigned, Rational> img;
  for (auto& [m, c] : p.terms()) {
    Rational coeff = c;
    unsigned e = 0;
    for (auto& [v, k] : m) {
      if (v == main) { e = k; continue; }
      Rational x = at.at(v);
      for (unsigned i = 0; i < k; ++i) coeff *= x;
    }
    img[e] += coeff;
    if (img[e] == 0) img.erase(e);
  }
  return img;
}

unsigned uni_degree(const std::map<unsigned, Rational>& p) {
  return p.empty() ? 0 : p.rbegin()->first;
}

std::map<unsigned, Rational> uni_rem(std::map<unsigned, Rational> a,
                                     const std::map<unsigned, Rational>& b) {
  unsigned db = uni_degree(b);
  Rational lb = b.rbegin()->second;
  while (!a.empty() && uni_degree(a) >= db) {
    unsigned da = uni_degree(a);
    Rational f = a.rbegin()->second / lb;
    for (auto& [e, c] : b) {
      unsigned te = e + da - db;
      a[te] -= f * c;
      if (a[te] == 0) a.erase(te);
    }
  }
  return a;
}

unsigned uni_gcd_degree(std::map<unsigned, Rational> a, std::map<unsigned, Rational> b) {
  while (!b.empty()) {
    auto r = uni_rem(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return uni_degree(a);
}

// Deterministic-evaluation coprimality probe. A positive answer means the two
// polynomials share no non-constant factor (up to the vanishing of a leading
// coefficient at the probe points, which repeated trials make negligible);
// a negative answer falls back to the exact Euclidean computation.
bool probably_coprime(const Polynomial& a, const Polynomial& b) {
  auto va = a.variables();
  auto vb = b.variables();
  std::set<std::string> shared;
  for (auto& v : va)
    if (vb.count(v)) shared.insert(v);
  if (shared.empty()) return true;
  static const long kPoints[2][8] = {{3, 5, 7, 11, 13, 17, 19, 23},
                                     {29, 31, 37, 41, 43, 47, 53, 59}};
  std::set<std::string> all = va;
  all.insert(vb.begin(), vb.end());
  for (int trial = 0; trial < 2; ++trial) {
    bool trial_ok = true;
    for (auto& main : shared) {
      std::map<std::string, Rational> at;
      int i = 0;
      for (auto& v : all) {
        if (v != main) at[v] = Rational(kPoints[trial][i % 8] + (i / 8));
        ++i;
      }
      auto ia = univariate_image(a, main, at);
      auto ib = univariate_image(b, main, at);
      if (ia.empty() || ib.empty()) { trial_ok = false; break; }
      if (uni_gcd_degree(ia, ib) > 0) { trial_ok = false; break; }
    }
    if (trial_ok) return true;
  }
  return false;
}

}  // namespace

Polynomial polynomial_gcd(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero()) return make_positive_lead(b);
  if (b.is_zero()) return make_positive_lead(a);
  if (a.is_constant() || b.is_constant()) return Polynomial(Rational(1));

  // monomial content first (cheap, covers the common cases)
  Monomial ma = a.content_monomial(), mb = b.content_monomial();
  Monomial mg = monomial_gcd(ma, mb);
  Polynomial pa = a.divide_monomial(ma), pb = b.divide_monomial(mb);

  // The exact Euclidean fallback is reserved for small inputs; larger ones
  // settle for monomial-content reduction. Value-level equality does not
  // depend on full reduction (see RationalFunction::operator==).
  static thread_local int depth = 0;
  struct DepthGuard {
    int& d;
    explicit DepthGuard(int& dd) : d(dd) { ++d; }
    ~DepthGuard() { --d; }
  } guard(depth);
  auto small_enough = [](const Polynomial& p) {
    return p.terms().size() <= 12 && p.total_degree() <= 10;
  };
  Polynomial rest;
  Polynomial q;
  if (pa.is_constant() || pb.is_constant()) {
    rest = Polynomial(Rational(1));
  } else if (Polynomial::try_divide(pa, pb, &q)) {
    rest = pb;
  } else if (Polynomial::try_divide(pb, pa, &q)) {
    rest = pa;
  } else if (depth > 4 || !small_enough(pa) || !small_enough(pb) ||
             probably_coprime(pa, pb)) {
    rest = Polynomial(Rational(1));
  } else {
    // primitive Euclid in the first shared variable; if no shared variable,
    // the gcd of the primitive parts is 1
    auto va = pa.variables();
    auto vb = pb.variables();
    std::string var;
    for (auto& v : va) {
      if (vb.count(v)) { var = v; break; }
    }
    if (var.empty()) {
      rest = Polynomial(Rational(1));
    } else {
      try {
        Polynomial ca = poly_content(pa, var), cb = poly_content(pb, var);
        Polynomial ppa, ppb;
        if (!Polynomial::try_divide(pa, ca, &ppa)) ppa = pa;
        if (!Polynomial::try_divide(pb, cb, &ppb)) ppb = pb;
        Polynomial u = ppa, v = ppb;
        if (degree_in(u, var) < degree_in(v, var)) std::swap(u, v);
        while (!v.is_zero() && degree_in(v, var) > 0) {
          Polynomial r = pseudo_rem(u, v, var);
          u = v;
          if (!r.is_zero()) {
            Polynomial cr = poly_content(r, var);
            Polynomial pr;
            if (!Polynomial::try_divide(r, cr, &pr)) pr = r;
            v = pr;
          } else {
            v = Polynomial();
          }
        }
        // a nonzero remainder constant in the main variable makes the
        // primitive parts coprime
        if (!v.is_zero()) u = Polynomial(Rational(1));
        Polynomial cg = polynomial_gcd(ca, cb);
        rest = u * cg;
      } catch (const std::length_error&) {
        rest = Polynomial(Rational(1));  // incomplete reduction, still sound
      }
      // verify divisibility; fall back to 1 on any surprise
      if (!rest.is_constant() &&
          (!Polynomial::try_divide(pa, rest, &q) || !Polynomial::try_divide(pb, rest, &q)))
        rest = Polynomial(Rational(1));
    }
  }
  Polynomial g = rest;
  Polynomial mono;
  mono.add_term(mg, Rational(1));
  g = g * mono;
  return make_positive_lead(g);
}

bool Polynomial::try_divide(const Polynomial& num, const Polynomial& den, Polynomial* quot) {
  if (den.is_zero()) return false;
  if (den.is_constant()) {
    *quot = num.scaled(Rational(1) / den.constant_value());
    return true;
  }
  Polynomial rem = num;
  Polynomial q;
  const Monomial& dl = den.leading_monomial();
  const Rational& dc = den.leading_coefficient();
  while (!rem.is_zero()) {
    const Monomial& rl = rem.leading_monomial();
    if (!monomial_divides(dl, rl)) return false;
    Monomial qm = monomial_div(rl, dl);
    Rational qc = rem.leading_coefficient() / dc;
    Polynomial piece;
    piece.add_term(qm, qc);
    q = q + piece;
    rem = rem - piece * den;
  }
  *quot = q;
  return true;
}

}  // namespace rddl
