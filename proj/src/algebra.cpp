// SPDX-License-Identifier: Apache-2.0
#include "rddl/algebra.hpp"

#include <algorithm>

namespace rddl {

void SideConditions::record(const Polynomial& q) {
  if (q.is_constant()) return;
  Polynomial p = q;
  if (p.leading_coefficient() < 0) p = -p;
  nonzero.insert(print_term(to_term(p)));
}

RationalFunction RationalFunction::make(Polynomial num, Polynomial den, SideConditions* sc) {
  if (den.is_zero()) throw ZeroDenominator();
  if (sc) sc->record(den);
  RationalFunction r;
  if (num.is_zero()) return r;
  Polynomial g = polynomial_gcd(num, den);
  if (!g.is_constant()) {
    Polynomial qn, qd;
    if (Polynomial::try_divide(num, g, &qn) && Polynomial::try_divide(den, g, &qd)) {
      num = qn;
      den = qd;
    }
  }
  Rational lc = den.leading_coefficient();
  r.num_ = num.scaled(Rational(1) / lc);
  r.den_ = den.scaled(Rational(1) / lc);
  return r;
}

bool RationalFunction::operator==(const RationalFunction& o) const {
  if (num_ == o.num_ && den_ == o.den_) return true;
  return num_ * o.den_ == o.num_ * den_;
}

RationalFunction RationalFunction::operator+(const RationalFunction& o) const {
  return make(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}
RationalFunction RationalFunction::operator-(const RationalFunction& o) const {
  return make(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}
RationalFunction RationalFunction::operator-() const {
  RationalFunction r = *this;
  r.num_ = -r.num_;
  return r;
}
RationalFunction RationalFunction::operator*(const RationalFunction& o) const {
  return make(num_ * o.num_, den_ * o.den_);
}
RationalFunction RationalFunction::operator/(const RationalFunction& o) const {
  if (o.num_.is_zero()) throw ZeroDenominator();
  return make(num_ * o.den_, den_ * o.num_);
}

std::set<std::string> RationalFunction::variables() const {
  auto vs = num_.variables();
  auto dv = den_.variables();
  vs.insert(dv.begin(), dv.end());
  return vs;
}

double RationalFunction::evaluate(const std::map<std::string, double>& st, bool* pole,
                                  double pole_eps) const {
  double d = den_.evaluate(st);
  if (std::abs(d) < pole_eps) {
    if (pole) *pole = true;
    return 0.0;
  }
  if (pole) *pole = false;
  return num_.evaluate(st) / d;
}

VectorField VectorField::from_dynamics(const Dynamics& d, SideConditions* sc) {
  VectorField f;
  for (auto& [v, rhs] : d.odes) f.entries.emplace_back(v, normalize(rhs, sc));
  return f;
}

const RationalFunction* VectorField::find(const std::string& var) const {
  for (auto& [v, rf] : entries)
    if (v == var) return &rf;
  return nullptr;
}

std::set<std::string> VectorField::domain() const {
  std::set<std::string> s;
  for (auto& [v, rf] : entries) s.insert(v);
  return s;
}

RationalFunction normalize(const TermPtr& t, SideConditions* sc) {
  switch (t->kind) {
    case Term::Kind::Variable:
      return RationalFunction(Polynomial::variable(t->name));
    case Term::Kind::Constant:
      return RationalFunction(Polynomial::constant(t->value));
    case Term::Kind::Neg:
      return -normalize(t->a, sc);
    case Term::Kind::Add:
      return normalize(t->a, sc) + normalize(t->b, sc);
    case Term::Kind::Sub:
      return normalize(t->a, sc) - normalize(t->b, sc);
    case Term::Kind::Mul:
      return normalize(t->a, sc) * normalize(t->b, sc);
    case Term::Kind::Div: {
      RationalFunction a = normalize(t->a, sc);
      RationalFunction b = normalize(t->b, sc);
      if (b.is_zero()) throw ZeroDenominator();
      if (sc) sc->record(b.num());
      return a / b;
    }
    case Term::Kind::Pow: {
      RationalFunction a = normalize(t->a, sc);
      return RationalFunction::make(a.num().pow(t->exponent), a.den().pow(t->exponent));
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

TermPtr monomial_to_term(const Monomial& m, const BigInt& coeff_abs) {
  TermPtr acc;
  if (coeff_abs != 1 || m.empty()) acc = mk_const(Rational(coeff_abs));
  for (auto& [v, e] : m) {
    TermPtr f = e == 1 ? mk_var(v) : mk_pow(mk_var(v), e);
    acc = acc ? mk_mul(acc, f) : f;
  }
  return acc;
}

// Integer-coefficient rendering: p = q / scale with q integer, scale positive.
std::pair<Polynomial, BigInt> scale_to_integer(const Polynomial& p) {
  BigInt l = 1;
  for (auto& [m, c] : p.terms()) l = lcm(l, denominator(c));
  return {p.scaled(Rational(l)), l};
}

TermPtr integer_poly_to_term(const Polynomial& p) {
  if (p.is_zero()) return mk_const(Rational(0));
  // descending monomial order, positive terms rendered first
  std::vector<std::pair<Monomial, Rational>> ts(p.terms().begin(), p.terms().end());
  std::reverse(ts.begin(), ts.end());
  std::stable_partition(ts.begin(), ts.end(), [](const auto& t) { return t.second > 0; });
  TermPtr acc;
  for (auto& [m, c] : ts) {
    BigInt ci = numerator(c);
    TermPtr piece = monomial_to_term(m, abs(ci));
    if (!acc) {
      acc = ci < 0 ? mk_neg(piece) : piece;
    } else {
      acc = ci < 0 ? mk_sub(acc, piece) : mk_add(acc, piece);
    }
  }
  return acc;
}

}  // namespace

TermPtr to_term(const Polynomial& p) {
  auto [q, scale] = scale_to_integer(p);
  TermPtr t = integer_poly_to_term(q);
  if (scale != 1) t = mk_div(t, mk_const(Rational(scale)));
  return t;
}

TermPtr to_term(const RationalFunction& f) {
  if (f.is_polynomial()) {
    // den is monic constant 1
    return to_term(f.num());
  }
  auto [n, sn] = scale_to_integer(f.num());
  auto [d, sd] = scale_to_integer(f.den());
  // f = (n/sn)/(d/sd) = (n*sd)/(d*sn)
  Polynomial nn = n.scaled(Rational(sd));
  Polynomial dd = d.scaled(Rational(sn));
  return mk_div(integer_poly_to_term(nn), integer_poly_to_term(dd));
}

RationalFunction partial_derivative(const RationalFunction& t, const std::string& var) {
  // (n' d - n d') / d^2
  Polynomial np = t.num().derivative(var);
  Polynomial dp = t.den().derivative(var);
  return RationalFunction::make(np * t.den() - t.num() * dp, t.den() * t.den());
}

RationalFunction lie_derivative(const VectorField& f, const RationalFunction& g) {
  RationalFunction acc;
  for (auto& v : g.variables()) {
    const RationalFunction* fv = f.find(v);
    if (!fv) continue;  // parameter: derivative 0
    acc = acc + partial_derivative(g, v) * (*fv);
  }
  return acc;
}

RationalFunction lie_derivative_n(const VectorField& f, const RationalFunction& g, unsigned n) {
  RationalFunction acc = g;
  for (unsigned i = 0; i < n; ++i) acc = lie_derivative(f, acc);
  return acc;
}

FormulaPtr dii_disjunction(const VectorField& f, const RationalFunction& g, unsigned n) {
  std::vector<RationalFunction> lies;  // lies[k] = L^{k+1} g
  lies.push_back(lie_derivative(f, g));
  for (unsigned k = 1; k < n; ++k) lies.push_back(lie_derivative(f, lies.back()));
  FormulaPtr result;
  for (unsigned p = 0; p < n; ++p) {
    FormulaPtr branch = mk_true();
    for (unsigned k = 1; k <= p; ++k)
      branch = mk_and(branch, mk_cmp(to_term(lies[k - 1]), CmpOp::Ge, mk_const(Rational(0))));
    branch = mk_and(branch, mk_cmp(to_term(lies[p]), CmpOp::Gt, mk_const(Rational(0))));
    result = result ? mk_or(result, branch) : branch;
  }
  return result;
}

namespace {
enum class Side { Left, Right, Param, Mixed };

Side side_of(const TermPtr& t, const std::set<std::string>& lv, const std::set<std::string>& rv) {
  bool l = false, r = false;
  for (auto& v : free_variables(t)) {
    if (lv.count(v)) l = true;
    if (rv.count(v)) r = true;
  }
  if (l && r) return Side::Mixed;
  if (l) return Side::Left;
  if (r) return Side::Right;
  return Side::Param;
}
}  // namespace

ExitTerms split_equational_exit(const FormulaPtr& exit, const Dynamics& left,
                                const Dynamics& right, SideConditions* sc) {
  if (exit->kind != Formula::Kind::Cmp || exit->op != CmpOp::Eq)
    throw ExitShapeError("exit condition must be a single equality, got: " + print_formula(exit));
  auto lv = left.ode_variables();
  auto rv = right.ode_variables();
  Side sl = side_of(exit->lhs, lv, rv);
  Side sr = side_of(exit->rhs, lv, rv);
  if (sl == Side::Mixed || sr == Side::Mixed)
    throw ExitShapeError("exit equality mixes variables of both dynamics on one side");
  ExitTerms et;
  if (sl == Side::Left && sr != Side::Left) {
    et.left_term = exit->lhs;
    et.right_term = exit->rhs;
  } else if (sr == Side::Left && sl != Side::Left) {
    et.left_term = exit->rhs;
    et.right_term = exit->lhs;
  } else if (sl == Side::Right && sr == Side::Param) {
    et.left_term = exit->rhs;   // parameter side has zero Lie derivative below
    et.right_term = exit->lhs;
  } else if (sl == Side::Param && sr == Side::Right) {
    et.left_term = exit->lhs;
    et.right_term = exit->rhs;
  } else if (sl == Side::Param && sr == Side::Param) {
    throw DegenerateExit("both exit terms are constant along the flows");
  } else {
    throw ExitShapeError("exit equality does not relate the two dynamics");
  }
  VectorField fl = VectorField::from_dynamics(left, sc);
  VectorField fr = VectorField::from_dynamics(right, sc);
  et.left_lie = lie_derivative(fl, normalize(et.left_term, sc));
  et.right_lie = lie_derivative(fr, normalize(et.right_term, sc));
  if (et.left_lie.is_zero())
    throw DegenerateExit("exit term " + print_term(et.left_term) + " has zero Lie derivative");
  if (et.right_lie.is_zero())
    throw DegenerateExit("exit term " + print_term(et.right_term) + " has zero Lie derivative");
  return et;
}

Dynamics sync_vector_field(const RddFormula& a, SideConditions* sc) {
  ExitTerms et = split_equational_exit(a.exit, a.left, a.right, sc);
  Dynamics out;
  out.odes = a.left.odes;
  if (et.left_lie == et.right_lie) {
    // stretch ratio is identically 1
    for (auto& [v, rhs] : a.right.odes) out.odes.emplace_back(v, rhs);
  } else {
    TermPtr ratio = mk_div(to_term(et.left_lie), to_term(et.right_lie));
    if (sc) sc->record(et.right_lie.num());
    for (auto& [v, rhs] : a.right.odes) out.odes.emplace_back(v, mk_mul(rhs, ratio));
  }
  out.constraint = mk_and(a.left.constraint, a.right.constraint);
  return out;
}

}  // namespace rddl
