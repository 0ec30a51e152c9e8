#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <variant>

#include "detproc/common.hpp"

namespace detproc {

// ---------------------------------------------------------------------------
// Points on the torus
// ---------------------------------------------------------------------------

/// A point of T^d; coordinates are reduced modulo 1 into [0, 1).
struct Point {
  std::vector<double> x;

  static Point reduce(std::vector<double> v) {
    for (double& t : v) {
      t -= std::floor(t);
      if (t >= 1.0) t = 0.0;  // guard against floor(1-eps) rounding
    }
    return Point{std::move(v)};
  }
};

// ---------------------------------------------------------------------------
// Expression AST
// ---------------------------------------------------------------------------

enum class Op {
  Const, Var, Add, Sub, Mul, Div, Pow, Neg,
  Sin, Cos, Abs, Sqrt, Exp, Min, Max, Arc
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  Op op;
  double value = 0.0;        // Const: value; Arc: a
  double value2 = 0.0;       // Arc: b
  int var = 0;               // Var: coordinate index, 1-based
  ExprPtr a, b;              // children

  virtual ~Expr() = default;

  static ExprPtr constant(double v) {
    auto e = std::make_shared<Expr>();
    e->op = Op::Const; e->value = v;
    return e;
  }
  static ExprPtr variable(int i) {
    auto e = std::make_shared<Expr>();
    e->op = Op::Var; e->var = i;
    return e;
  }
  static ExprPtr node(Op op, ExprPtr a, ExprPtr b = nullptr) {
    auto e = std::make_shared<Expr>();
    e->op = op; e->a = std::move(a); e->b = std::move(b);
    return e;
  }
  static ExprPtr arc(double a, double b) {
    auto e = std::make_shared<Expr>();
    e->op = Op::Arc; e->value = a; e->value2 = b;
    return e;
  }
};

namespace detail {
double eval_maybe_builtin(const Expr& e, const Point& p, bool& handled);
}

inline double eval_expr(const Expr& e, const Point& p) {
  {
    bool handled = false;
    double v = detail::eval_maybe_builtin(e, p, handled);
    if (handled) return v;
  }
  switch (e.op) {
    case Op::Const: return e.value;
    case Op::Var: {
      if (e.var < 1 || size_t(e.var) > p.x.size())
        throw DetprocError("variable index out of range");
      return p.x[e.var - 1];
    }
    case Op::Add: return eval_expr(*e.a, p) + eval_expr(*e.b, p);
    case Op::Sub: return eval_expr(*e.a, p) - eval_expr(*e.b, p);
    case Op::Mul: return eval_expr(*e.a, p) * eval_expr(*e.b, p);
    case Op::Div: {
      double num = eval_expr(*e.a, p), den = eval_expr(*e.b, p);
      if (den == 0.0) throw SingularEvaluation("division by zero");
      return num / den;
    }
    case Op::Pow: return std::pow(eval_expr(*e.a, p), eval_expr(*e.b, p));
    case Op::Neg: return -eval_expr(*e.a, p);
    case Op::Sin: return std::sin(eval_expr(*e.a, p));
    case Op::Cos: return std::cos(eval_expr(*e.a, p));
    case Op::Abs: return std::fabs(eval_expr(*e.a, p));
    case Op::Sqrt: {
      double v = eval_expr(*e.a, p);
      if (v < 0) {
        if (v > -1e-12) return 0.0;
        throw SingularEvaluation("sqrt of negative value");
      }
      return std::sqrt(v);
    }
    case Op::Exp: return std::exp(eval_expr(*e.a, p));
    case Op::Min: return std::min(eval_expr(*e.a, p), eval_expr(*e.b, p));
    case Op::Max: return std::max(eval_expr(*e.a, p), eval_expr(*e.b, p));
    case Op::Arc: {
      // indicator of x1 mod 1 in [a, b)
      double t = p.x[0] - std::floor(p.x[0]);
      return (t >= e.value && t < e.value2) ? 1.0 : 0.0;
    }
  }
  throw DetprocError("bad expression node");
}

// ---------------------------------------------------------------------------
// Builtins
// ---------------------------------------------------------------------------

enum class Builtin {
  Const,      // const(p)
  ArcInd,     // arc(a,b); half_ind = arc(0,1/2); lozenge = arc(1/3,2/3)
  Sin2,       // sin^2(pi x)
  Sin2Half,   // sin^2(pi t / 2)
  Ust2d,      // sin^2(pi x) / (sin^2(pi x) + sin^2(pi y))
  Ustd,       // d-dimensional version, d = params[0]
  UstAxisG,   // sin(pi x) / sqrt(1 + sin^2(pi x))
  Zigzag,     // 1/2 + (|sin 2 pi x| - 1)/(2 cos 2 pi x)
  Renewal,    // (1-a)^2 / |e^{2 pi i x} - a|^2
  RecipTrig,  // 1 / (c0 + 2 c1 cos(2 pi x) + ... + 2 cn cos(2 pi n x))
  Poly3       // |1 + e_1 + e_2|^2 / 9
};

struct BuiltinCall {
  Builtin tag;
  std::vector<double> params;
};

// ---------------------------------------------------------------------------
// Declared zero structure
// ---------------------------------------------------------------------------

enum class ZeroSide { F, OneMinusF };
enum class ZeroKind { IsolatedPoint, AlgebraicCurve, NonAlgebraicCurve, PositiveMeasure };

struct ZeroEntry {
  ZeroSide side;
  ZeroKind kind;
  bool flat = false;  // flat/exponential vanishing; otherwise finite order
  int order = 0;      // vanishing order when finite (0 = unspecified)
};

/// User-declared metadata, never inferred. nullopt = undeclared;
/// an empty list declares that neither f nor 1-f vanishes anywhere.
using ZeroProfile = std::optional<std::vector<ZeroEntry>>;

// ---------------------------------------------------------------------------
// SymbolSpec
// ---------------------------------------------------------------------------

/**
 * A measurable symbol f : T^d -> [0,1], given either by a builtin tag or an
 * expression tree. `complemented` replaces f by 1-f and `arg_scale`
 * replaces f(x) by f(n x) (d = 1). Immutable after construction.
 */
struct SymbolSpec {
  int dim = 1;
  std::variant<BuiltinCall, ExprPtr> body;
  bool complemented = false;
  int arg_scale = 1;
  ZeroProfile zero_profile;
  std::string name;  // optional display name (config files)

  bool is_builtin() const { return std::holds_alternative<BuiltinCall>(body); }
  const BuiltinCall* builtin() const { return std::get_if<BuiltinCall>(&body); }
  /// The underlying builtin when no transform is stacked on top.
  const BuiltinCall* plain_builtin() const {
    if (complemented || arg_scale != 1) return nullptr;
    return builtin();
  }
};

inline double eval_builtin(const BuiltinCall& b, const Point& p) {
  const double x = p.x.empty() ? 0.0 : p.x[0];
  switch (b.tag) {
    case Builtin::Const: return b.params[0];
    case Builtin::ArcInd: return (x >= b.params[0] && x < b.params[1]) ? 1.0 : 0.0;
    case Builtin::Sin2: { double s = std::sin(kPi * x); return s * s; }
    case Builtin::Sin2Half: { double s = std::sin(kPi * x / 2); return s * s; }
    case Builtin::Ust2d: {
      double sx = std::sin(kPi * x), sy = std::sin(kPi * p.x[1]);
      double den = sx * sx + sy * sy;
      if (den == 0.0) throw SingularEvaluation("ust2d at the origin");
      return sx * sx / den;
    }
    case Builtin::Ustd: {
      int d = int(b.params[0]);
      double sx = std::sin(kPi * x), den = 0;
      for (int j = 0; j < d; ++j) {
        double s = std::sin(kPi * p.x[j]);
        den += s * s;
      }
      if (den == 0.0) throw SingularEvaluation("ustd at the origin");
      return sx * sx / den;
    }
    case Builtin::UstAxisG: {
      double s = std::sin(kPi * x);
      return std::fabs(s) / std::sqrt(1 + s * s);
    }
    case Builtin::Zigzag: {
      double c = std::cos(2 * kPi * x);
      // removable singularity at cos = 0; the limit value is 1/2
      if (std::fabs(c) < 1e-9) return 0.5;
      double s = std::fabs(std::sin(2 * kPi * x));
      return 0.5 + (s - 1) / (2 * c);
    }
    case Builtin::Renewal: {
      double a = b.params[0];
      double cr = std::cos(2 * kPi * x) - a, ci = std::sin(2 * kPi * x);
      return (1 - a) * (1 - a) / (cr * cr + ci * ci);
    }
    case Builtin::RecipTrig: {
      double t = b.params[0];
      for (size_t k = 1; k < b.params.size(); ++k)
        t += 2 * b.params[k] * std::cos(2 * kPi * double(k) * x);
      if (t <= 0.0) throw SingularEvaluation("recip_trig denominator not positive");
      return 1.0 / t;
    }
    case Builtin::Poly3:
      return (3 + 4 * std::cos(2 * kPi * x) + 2 * std::cos(4 * kPi * x)) / 9.0;
  }
  throw DetprocError("bad builtin");
}

/**
 * Evaluate a symbol at a point of T^d. The raw expression value is clamped to
 * [0,1]; values outside [-1e-9, 1+1e-9] before clamping indicate a mistyped
 * symbol and raise an error instead of being silently clamped.
 */
inline double eval_symbol(const SymbolSpec& spec, const Point& pt) {
  if (int(pt.x.size()) != spec.dim) throw DetprocError("point dimension mismatch");
  Point p = Point::reduce(pt.x);
  if (spec.arg_scale != 1) {
    for (double& t : p.x) {
      t *= spec.arg_scale;
      t -= std::floor(t);
    }
  }
  double v;
  if (spec.is_builtin()) {
    v = eval_builtin(*spec.builtin(), p);
  } else {
    v = eval_expr(*std::get<ExprPtr>(spec.body), p);
    if (!std::isfinite(v)) throw SingularEvaluation("non-finite value");
    if (v < -1e-9 || v > 1 + 1e-9)
      throw DetprocError("symbol value " + std::to_string(v) + " outside [0,1]");
  }
  v = clamp01(v);
  return spec.complemented ? 1.0 - v : v;
}

/// The symbol 1-f. An involution: complement(complement(f)) evaluates as f.
inline SymbolSpec complement(SymbolSpec spec) {
  if (const BuiltinCall* b = spec.builtin(); b && b->tag == Builtin::Const) {
    SymbolSpec r = spec;
    std::get<BuiltinCall>(r.body).params[0] = 1 - b->params[0];
    r.name.clear();
    return r;
  }
  spec.complemented = !spec.complemented;
  if (spec.zero_profile) {
    for (ZeroEntry& z : *spec.zero_profile)
      z.side = z.side == ZeroSide::F ? ZeroSide::OneMinusF : ZeroSide::F;
  }
  spec.name.clear();
  return spec;
}

/// x |-> f(n x) for d = 1. Its coefficient table lives on the sublattice nZ.
inline SymbolSpec mult_arg(SymbolSpec spec, int n) {
  if (spec.dim != 1) throw DetprocError("mult_arg requires d = 1");
  if (n < 1) throw DetprocError("mult_arg requires n >= 1");
  spec.arg_scale *= n;
  spec.name.clear();
  return spec;
}

// ---------------------------------------------------------------------------
// Builtin construction and registry
// ---------------------------------------------------------------------------

inline SymbolSpec make_builtin(Builtin tag, std::vector<double> params = {}, int dim = 1) {
  BuiltinCall call{tag, std::move(params)};
  SymbolSpec s;
  s.dim = dim;
  s.body = call;

  auto zeros = [&](std::vector<ZeroEntry> v) { s.zero_profile = std::move(v); };
  switch (tag) {
    case Builtin::Const: {
      double p = call.params.at(0);
      if (p < 0 || p > 1) throw DetprocError("const parameter outside [0,1]");
      if (p > 0 && p < 1) zeros({});
      else zeros({{p == 0 ? ZeroSide::F : ZeroSide::OneMinusF, ZeroKind::PositiveMeasure, false, 0}});
      break;
    }
    case Builtin::ArcInd: {
      double a = call.params.at(0), b = call.params.at(1);
      if (!(0 <= a && a < b && b <= 1)) throw DetprocError("arc needs 0 <= a < b <= 1");
      zeros({{ZeroSide::F, ZeroKind::PositiveMeasure, false, 0},
             {ZeroSide::OneMinusF, ZeroKind::PositiveMeasure, false, 0}});
      break;
    }
    case Builtin::Sin2:
    case Builtin::Sin2Half:
      zeros({{ZeroSide::F, ZeroKind::IsolatedPoint, false, 2},
             {ZeroSide::OneMinusF, ZeroKind::IsolatedPoint, false, 2}});
      break;
    case Builtin::Ust2d:
      s.dim = 2;
      zeros({{ZeroSide::F, ZeroKind::AlgebraicCurve, false, 2},
             {ZeroSide::OneMinusF, ZeroKind::AlgebraicCurve, false, 2}});
      break;
    case Builtin::Ustd: {
      int d = int(call.params.at(0));
      if (d < 1 || d > 8) throw DetprocError("ustd dimension out of range");
      s.dim = d;
      break;  // codimension-1 zero sets; no d>2 decision table, leave undeclared
    }
    case Builtin::UstAxisG:
      zeros({{ZeroSide::F, ZeroKind::IsolatedPoint, false, 1}});
      break;
    case Builtin::Zigzag:
      zeros({{ZeroSide::F, ZeroKind::IsolatedPoint, false, 1},
             {ZeroSide::OneMinusF, ZeroKind::IsolatedPoint, false, 1}});
      break;
    case Builtin::Renewal: {
      double a = call.params.at(0);
      if (!(a > 0 && a < 1)) throw DetprocError("renewal parameter must lie in (0,1)");
      zeros({{ZeroSide::OneMinusF, ZeroKind::IsolatedPoint, false, 2}});
      break;
    }
    case Builtin::RecipTrig: {
      if (call.params.empty()) throw DetprocError("recip_trig needs coefficients");
      break;  // zeros of 1 - f depend on the polynomial; leave undeclared
    }
    case Builtin::Poly3:
      zeros({{ZeroSide::F, ZeroKind::IsolatedPoint, false, 2},
             {ZeroSide::OneMinusF, ZeroKind::IsolatedPoint, false, 2}});
      break;
  }
  return s;
}

struct BuiltinInfo {
  const char* name;
  Builtin tag;
  int arity;        // -1: variadic (>= 1)
  int dim;          // 0: from parameter
};

inline const std::vector<BuiltinInfo>& builtin_registry() {
  static const std::vector<BuiltinInfo> reg = {
      {"const", Builtin::Const, 1, 1},
      {"arc", Builtin::ArcInd, 2, 1},
      {"sin2", Builtin::Sin2, 0, 1},
      {"sin2half", Builtin::Sin2Half, 0, 1},
      {"half_ind", Builtin::ArcInd, 0, 1},
      {"lozenge", Builtin::ArcInd, 0, 1},
      {"ust2d", Builtin::Ust2d, 0, 2},
      {"ustd", Builtin::Ustd, 1, 0},
      {"ust_axis_g", Builtin::UstAxisG, 0, 1},
      {"zigzag", Builtin::Zigzag, 0, 1},
      {"renewal", Builtin::Renewal, 1, 1},
      {"recip_trig", Builtin::RecipTrig, -1, 1},
      {"poly3", Builtin::Poly3, 0, 1},
  };
  return reg;
}

inline SymbolSpec make_named_builtin(const std::string& name, const std::vector<double>& params) {
  for (const BuiltinInfo& info : builtin_registry()) {
    if (name != info.name) continue;
    if (info.arity >= 0 && int(params.size()) != info.arity &&
        !(info.arity == 0 && params.empty()))
      throw DetprocError("builtin " + name + " expects " + std::to_string(info.arity) + " argument(s)");
    if (info.arity == -1 && params.empty())
      throw DetprocError("builtin " + name + " expects at least one argument");
    if (name == "half_ind") return make_builtin(Builtin::ArcInd, {0.0, 0.5});
    if (name == "lozenge") return make_builtin(Builtin::ArcInd, {1.0 / 3.0, 2.0 / 3.0});
    SymbolSpec s = make_builtin(info.tag, params, info.dim == 0 ? 1 : info.dim);
    s.name = name;
    return s;
  }
  throw DetprocError("unknown builtin " + name);
}

/// Closed-form expression text for builtins, used to cross-check the builtin
/// evaluators against the parser. Empty when the builtin has no grammar form.
inline std::string builtin_expression_text(const SymbolSpec& s) {
  const BuiltinCall* b = s.plain_builtin();
  if (!b) return {};
  char buf[512];
  switch (b->tag) {
    case Builtin::Const:
      std::snprintf(buf, sizeof buf, "%.17g", b->params[0]);
      return buf;
    case Builtin::ArcInd:
      std::snprintf(buf, sizeof buf, "arc(%.17g,%.17g)", b->params[0], b->params[1]);
      return buf;
    case Builtin::Sin2: return "sin(pi*x1)^2";
    case Builtin::Sin2Half: return "sin(pi*x1/2)^2";
    case Builtin::Ust2d: return "sin(pi*x1)^2/(sin(pi*x1)^2+sin(pi*x2)^2)";
    case Builtin::Ustd: {
      int d = int(b->params[0]);
      if (d > 8) return {};
      std::string den = "sin(pi*x1)^2";
      for (int j = 2; j <= d; ++j) den += "+sin(pi*x" + std::to_string(j) + ")^2";
      return "sin(pi*x1)^2/(" + den + ")";
    }
    case Builtin::UstAxisG: return "abs(sin(pi*x1))/sqrt(1+sin(pi*x1)^2)";
    case Builtin::Zigzag: return "0.5+(abs(sin(2*pi*x1))-1)/(2*cos(2*pi*x1))";
    case Builtin::Renewal:
      std::snprintf(buf, sizeof buf,
                    "(1-%.17g)^2/((cos(2*pi*x1)-%.17g)^2+sin(2*pi*x1)^2)",
                    b->params[0], b->params[0]);
      return buf;
    case Builtin::RecipTrig: {
      std::string t;
      std::snprintf(buf, sizeof buf, "%.17g", b->params[0]);
      t = buf;
      for (size_t k = 1; k < b->params.size(); ++k) {
        std::snprintf(buf, sizeof buf, "+2*%.17g*cos(2*pi*%zu*x1)", b->params[k], k);
        t += buf;
      }
      return "1/(" + t + ")";
    }
    case Builtin::Poly3: return "(3+4*cos(2*pi*x1)+2*cos(4*pi*x1))/9";
  }
  return {};
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct ParseError : DetprocError {
  size_t offset;
  ParseError(const std::string& msg, size_t off)
      : DetprocError(msg + " at offset " + std::to_string(off)), offset(off) {}
};

namespace detail {

class Parser {
 public:
  Parser(const std::string& text, int dim) : s_(text), dim_(dim) {}

  ExprPtr parse() {
    ExprPtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected trailing input", pos_);
    return e;
  }

  int max_var() const { return max_var_; }

 private:
  ExprPtr expr() {  // additive
    ExprPtr e = term();
    for (;;) {
      skip_ws();
      if (match('+')) e = Expr::node(Op::Add, e, term());
      else if (match('-')) e = Expr::node(Op::Sub, e, term());
      else return e;
    }
  }

  ExprPtr term() {  // multiplicative
    ExprPtr e = unary();
    for (;;) {
      skip_ws();
      if (match('*')) e = Expr::node(Op::Mul, e, unary());
      else if (match('/')) e = Expr::node(Op::Div, e, unary());
      else return e;
    }
  }

  ExprPtr unary() {
    skip_ws();
    if (match('-')) return Expr::node(Op::Neg, unary());
    if (match('+')) return unary();
    return power();
  }

  ExprPtr power() {
    ExprPtr base = atom();
    skip_ws();
    if (match('^')) return Expr::node(Op::Pow, base, unary());  // right assoc
    return base;
  }

  ExprPtr atom() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    char c = s_[pos_];
    if (std::isdigit(uchar(c)) || c == '.') return number();
    if (std::isalpha(uchar(c)) || c == '_') return identifier();
    if (match('(')) {
      ExprPtr e = expr();
      expect(')');
      return e;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  ExprPtr number() {
    size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(uchar(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      size_t save = pos_;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(uchar(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(uchar(s_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    try {
      return Expr::constant(std::stod(s_.substr(start, pos_ - start)));
    } catch (const std::exception&) {
      throw ParseError("bad numeric literal", start);
    }
  }

  ExprPtr identifier() {
    size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(uchar(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    std::string id = s_.substr(start, pos_ - start);

    if (id == "pi") return Expr::constant(kPi);

    // variables: x1..x8 and the x,y,z,w aliases
    static const std::map<std::string, int> aliases = {{"x", 1}, {"y", 2}, {"z", 3}, {"w", 4}};
    int vi = 0;
    if (auto it = aliases.find(id); it != aliases.end()) vi = it->second;
    else if (id.size() == 2 && id[0] == 'x' && id[1] >= '1' && id[1] <= '8') vi = id[1] - '0';
    if (vi > 0) {
      if (vi > dim_) throw ParseError("variable " + id + " exceeds dimension " + std::to_string(dim_), start);
      max_var_ = std::max(max_var_, vi);
      return Expr::variable(vi);
    }

    static const std::map<std::string, Op> fns = {
        {"sin", Op::Sin}, {"cos", Op::Cos}, {"abs", Op::Abs},
        {"sqrt", Op::Sqrt}, {"exp", Op::Exp}, {"min", Op::Min}, {"max", Op::Max}};
    if (auto it = fns.find(id); it != fns.end()) {
      expect('(');
      ExprPtr a = expr();
      if (it->second == Op::Min || it->second == Op::Max) {
        expect(',');
        ExprPtr b = expr();
        expect(')');
        return Expr::node(it->second, a, b);
      }
      expect(')');
      return Expr::node(it->second, a);
    }

    if (id == "arc") {
      expect('(');
      double a = const_arg();
      expect(',');
      double b = const_arg();
      expect(')');
      if (!(0 <= a && a < b && b <= 1)) throw ParseError("arc needs 0 <= a < b <= 1", start);
      return Expr::arc(a, b);
    }

    // builtin invocation; mark it so the caller can lift a lone call to a tag
    for (const BuiltinInfo& info : builtin_registry()) {
      if (id != info.name) continue;
      std::vector<double> params;
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == '(') {
        ++pos_;
        skip_ws();
        if (!match(')')) {
          params.push_back(const_arg());
          for (;;) {
            skip_ws();
            if (match(',')) params.push_back(const_arg());
            else break;
          }
          expect(')');
        }
      }
      SymbolSpec sub = make_named_builtin(id, params);
      if (sub.dim > dim_)
        throw ParseError("builtin " + id + " needs dimension " + std::to_string(sub.dim), start);
      last_builtin_ = sub;
      builtin_span_ = {start, pos_};
      // wrapped in a larger expression the builtin acts as an opaque function
      return make_builtin_node(sub);
    }

    throw ParseError("unknown identifier " + id, start);
  }

  // Builtins inside larger expressions are evaluated through a captured spec.
  ExprPtr make_builtin_node(const SymbolSpec& sub);

  double const_arg() {
    ExprPtr e = expr();
    // constant-fold; arc/builtin arguments must not involve variables
    Point dummy{std::vector<double>(8, 0.0)};
    double v;
    try {
      v = eval_expr(*e, dummy);
    } catch (const std::exception&) {
      throw ParseError("argument must be a constant", pos_);
    }
    if (contains_var(*e)) throw ParseError("argument must be a constant", pos_);
    return v;
  }

  static bool contains_var(const Expr& e) {
    if (e.op == Op::Var) return true;
    if (e.a && contains_var(*e.a)) return true;
    if (e.b && contains_var(*e.b)) return true;
    return false;
  }

  static unsigned char uchar(char c) { return static_cast<unsigned char>(c); }
  void skip_ws() { while (pos_ < s_.size() && std::isspace(uchar(s_[pos_]))) ++pos_; }
  bool match(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
    return false;
  }
  void expect(char c) {
    if (!match(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
  }

  std::string s_;
  size_t pos_ = 0;
  int dim_;
  int max_var_ = 0;

 public:
  std::optional<SymbolSpec> last_builtin_;
  std::pair<size_t, size_t> builtin_span_{0, 0};
};

// An Expr node that defers to a full SymbolSpec (builtins used inside
// expressions, e.g. "0.99*arc(0,0.5)+0.01" or "0.9*ust_axis_g").
struct BuiltinExpr : Expr {
  SymbolSpec spec;
};

inline ExprPtr Parser::make_builtin_node(const SymbolSpec& sub) {
  auto e = std::make_shared<BuiltinExpr>();
  e->op = Op::Const;
  e->spec = sub;
  e->value = std::nan("");
  return e;
}

inline double eval_maybe_builtin(const Expr& e, const Point& p, bool& handled) {
  if (auto* be = dynamic_cast<const BuiltinExpr*>(&e)) {
    handled = true;
    Point q{std::vector<double>(p.x.begin(), p.x.begin() + be->spec.dim)};
    return eval_symbol(be->spec, q);
  }
  handled = false;
  return 0.0;
}

}  // namespace detail

/**
 * Parse an expression in the symbol grammar into a SymbolSpec of the given
 * dimension. A lone builtin invocation resolves to its builtin tag.
 */
inline SymbolSpec parse_symbol(const std::string& text, int dim) {
  if (dim < 1 || dim > 8) throw DetprocError("dimension must lie in 1..8");
  detail::Parser p(text, dim);
  ExprPtr root = p.parse();
  if (p.last_builtin_) {
    // whole input was one builtin call (allowing surrounding whitespace)
    std::string rest = text.substr(p.builtin_span_.second);
    if (rest.find_first_not_of(" \t\r\n") == std::string::npos &&
        text.substr(0, p.builtin_span_.first).find_first_not_of(" \t\r\n") == std::string::npos) {
      return *p.last_builtin_;
    }
  }
  // lone literals and lone arc indicators resolve to builtin tags too
  if (root->op == Op::Const && root->value >= 0 && root->value <= 1)
    return make_builtin(Builtin::Const, {root->value}, dim == 1 ? 1 : dim);
  if (root->op == Op::Arc) return make_builtin(Builtin::ArcInd, {root->value, root->value2});
  SymbolSpec s;
  s.dim = dim;
  s.body = root;
  return s;
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

namespace detail {
inline void print_expr(const Expr& e, std::ostringstream& out);

inline void print_child(const Expr& e, std::ostringstream& out) {
  bool paren = !(e.op == Op::Const || e.op == Op::Var || e.op == Op::Sin ||
                 e.op == Op::Cos || e.op == Op::Abs || e.op == Op::Sqrt ||
                 e.op == Op::Exp || e.op == Op::Min || e.op == Op::Max ||
                 e.op == Op::Arc);
  if (paren) out << '(';
  print_expr(e, out);
  if (paren) out << ')';
}

inline void print_expr(const Expr& e, std::ostringstream& out) {
  char buf[64];
  if (auto* be = dynamic_cast<const BuiltinExpr*>(&e)) {
    std::string t = builtin_expression_text(be->spec);
    if (t.empty()) throw DetprocError("builtin has no printable form");
    out << '(' << t << ')';
    return;
  }
  switch (e.op) {
    case Op::Const:
      std::snprintf(buf, sizeof buf, "%.17g", e.value);
      out << buf;
      return;
    case Op::Var: out << 'x' << e.var; return;
    case Op::Add: print_child(*e.a, out); out << '+'; print_child(*e.b, out); return;
    case Op::Sub: print_child(*e.a, out); out << '-'; print_child(*e.b, out); return;
    case Op::Mul: print_child(*e.a, out); out << '*'; print_child(*e.b, out); return;
    case Op::Div: print_child(*e.a, out); out << '/'; print_child(*e.b, out); return;
    case Op::Pow: print_child(*e.a, out); out << '^'; print_child(*e.b, out); return;
    case Op::Neg: out << "-"; print_child(*e.a, out); return;
    case Op::Sin: out << "sin("; print_expr(*e.a, out); out << ')'; return;
    case Op::Cos: out << "cos("; print_expr(*e.a, out); out << ')'; return;
    case Op::Abs: out << "abs("; print_expr(*e.a, out); out << ')'; return;
    case Op::Sqrt: out << "sqrt("; print_expr(*e.a, out); out << ')'; return;
    case Op::Exp: out << "exp("; print_expr(*e.a, out); out << ')'; return;
    case Op::Min: out << "min("; print_expr(*e.a, out); out << ','; print_expr(*e.b, out); out << ')'; return;
    case Op::Max: out << "max("; print_expr(*e.a, out); out << ','; print_expr(*e.b, out); out << ')'; return;
    case Op::Arc:
      std::snprintf(buf, sizeof buf, "arc(%.17g,%.17g)", e.value, e.value2);
      out << buf;
      return;
  }
}
}  // namespace detail

/// Human-readable label: the declared name, the builtin call, or the
/// expression text, with transform annotations.
inline std::string display_name(const SymbolSpec& s) {
  std::string core;
  if (!s.name.empty()) {
    core = s.name;
  } else if (s.is_builtin()) {
    const BuiltinCall& b = *s.builtin();
    for (const BuiltinInfo& info : builtin_registry()) {
      if (info.tag != b.tag) continue;
      core = info.name;
      break;
    }
    if (!b.params.empty()) {
      std::ostringstream out;
      out << core << '(';
      for (size_t i = 0; i < b.params.size(); ++i) {
        if (i) out << ',';
        out << b.params[i];
      }
      out << ')';
      core = out.str();
    }
  } else {
    std::ostringstream out;
    detail::print_expr(*std::get<ExprPtr>(s.body), out);
    core = out.str();
  }
  if (s.arg_scale != 1) core = "mult" + std::to_string(s.arg_scale) + "(" + core + ")";
  if (s.complemented) core = "1-(" + core + ")";
  return core;
}

/// Grammar text that reparses to a pointwise-identical symbol.
inline std::string print_symbol(const SymbolSpec& s) {
  std::string core;
  if (s.is_builtin()) {
    core = builtin_expression_text(SymbolSpec{s.dim, s.body, false, 1, {}, {}});
    if (core.empty()) throw DetprocError("symbol has no printable form");
  } else {
    std::ostringstream out;
    detail::print_expr(*std::get<ExprPtr>(s.body), out);
    core = out.str();
  }
  if (s.arg_scale != 1) {
    // substitute x1 -> arg_scale * x1 textually is fragile; keep wrapper form
    throw DetprocError("printing of argument-scaled symbols is not supported");
  }
  if (s.complemented) core = "1-(" + core + ")";
  return core;
}

// ---------------------------------------------------------------------------
// Config file loading
// ---------------------------------------------------------------------------

/**
 * Load a symbol from a key-value config file. Recognized keys:
 *   name = <string>
 *   dim = <int>
 *   expr = <grammar text>       (or: builtin = <name>(<args>))
 *   zero = <f|comp> <isolated|algebraic-curve|non-algebraic-curve|positive-measure> [order <n>|flat]
 * Lines starting with '#' are comments; 'zero' may repeat.
 */
inline SymbolSpec load_symbol_config(std::istream& in) {
  std::string name, expr_text;
  int dim = 0;
  std::vector<ZeroEntry> zeros;
  bool have_zero = false;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw DetprocError("config line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    auto trim = [](std::string t) {
      size_t a = t.find_first_not_of(" \t\r");
      size_t b = t.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : t.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key == "name") name = val;
    else if (key == "dim") dim = std::stoi(val);
    else if (key == "expr" || key == "builtin") expr_text = val;
    else if (key == "zero") {
      ZeroEntry z;
      std::istringstream ss(val);
      std::string side, kind, tail;
      ss >> side >> kind;
      if (side == "f") z.side = ZeroSide::F;
      else if (side == "comp" || side == "1-f") z.side = ZeroSide::OneMinusF;
      else throw DetprocError("config line " + std::to_string(lineno) + ": zero side must be f or comp");
      if (kind == "isolated") z.kind = ZeroKind::IsolatedPoint;
      else if (kind == "algebraic-curve") z.kind = ZeroKind::AlgebraicCurve;
      else if (kind == "non-algebraic-curve") z.kind = ZeroKind::NonAlgebraicCurve;
      else if (kind == "positive-measure") z.kind = ZeroKind::PositiveMeasure;
      else throw DetprocError("config line " + std::to_string(lineno) + ": bad zero kind " + kind);
      while (ss >> tail) {
        if (tail == "flat") z.flat = true;
        else if (tail == "order") { int n; ss >> n; z.order = n; }
        else throw DetprocError("config line " + std::to_string(lineno) + ": bad zero attribute " + tail);
      }
      zeros.push_back(z);
      have_zero = true;
    } else if (!key.empty()) {
      throw DetprocError("config line " + std::to_string(lineno) + ": unknown key " + key);
    }
  }
  if (expr_text.empty()) throw DetprocError("config: missing expr/builtin");
  if (dim == 0) dim = 1;
  SymbolSpec s = parse_symbol(expr_text, dim);
  if (!name.empty()) s.name = name;
  if (have_zero) s.zero_profile = zeros;
  return s;
}

inline SymbolSpec load_symbol_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DetprocError("cannot open config file " + path);
  return load_symbol_config(in);
}

}  // namespace detproc
