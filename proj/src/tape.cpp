#include "qpseudo/tape.hpp"

#include <cmath>

#include "qpseudo/scalar_math.hpp"

namespace qpseudo::ad {

namespace {

bool is_scalar(const Eigen::MatrixXd& m) { return m.rows() == 1 && m.cols() == 1; }

}  // namespace

const Eigen::MatrixXd& Var::value() const { return tape_->nodes_[id_].val; }

const Eigen::MatrixXd& Var::grad() const {
  const Tape::Node& n = tape_->nodes_[id_];
  if (!n.has_adj) {
    // Never touched by the reverse sweep: gradient is zero.
    Tape::Node& m = const_cast<Tape::Node&>(n);
    m.adj = Eigen::MatrixXd::Zero(n.val.rows(), n.val.cols());
    m.has_adj = true;
  }
  return n.adj;
}

double Var::scalar() const {
  const Eigen::MatrixXd& v = value();
  if (!is_scalar(v)) throw DimensionError("Var::scalar on non-scalar node");
  return v(0, 0);
}

int Tape::push(Node&& n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Var Tape::input(const Eigen::MatrixXd& value) {
  Node n;
  n.op = Op::Input;
  n.val = value;
  return Var(this, push(std::move(n)));
}

Var Tape::constant(const Eigen::MatrixXd& value) {
  Node n;
  n.op = Op::Const;
  n.val = value;
  return Var(this, push(std::move(n)));
}

Var Tape::constant(double value) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = value;
  return constant(m);
}

void Tape::accumulate(int id, const Eigen::MatrixXd& g) {
  Node& n = nodes_[id];
  if (!n.has_adj) {
    n.adj = g;
    n.has_adj = true;
  } else {
    n.adj += g;
  }
}

// --- node builders ------------------------------------------------------

namespace {
void check_same_tape(const Var& a, const Var& b) {
  if (a.tape() != b.tape()) throw DimensionError("operands recorded on different tapes");
}
}  // namespace

Var binary(Op op, const Var& a, const Var& b) {
  check_same_tape(a, b);
  Tape* t = a.tape();
  const Eigen::MatrixXd& av = a.value();
  const Eigen::MatrixXd& bv = b.value();
  const bool sa = is_scalar(av), sb = is_scalar(bv);
  if (!sa && !sb && (av.rows() != bv.rows() || av.cols() != bv.cols()))
    throw DimensionError("shape mismatch in elementwise op");

  Tape::Node n;
  n.op = op;
  n.a = a.id();
  n.b = b.id();
  switch (op) {
    case Op::Add:
      n.val = sa ? (av(0, 0) + bv.array()).matrix()
                 : (sb ? (av.array() + bv(0, 0)).matrix() : Eigen::MatrixXd(av + bv));
      break;
    case Op::Sub:
      n.val = sa ? (av(0, 0) - bv.array()).matrix()
                 : (sb ? (av.array() - bv(0, 0)).matrix() : Eigen::MatrixXd(av - bv));
      break;
    case Op::Mul:
      n.val = sa ? Eigen::MatrixXd(av(0, 0) * bv)
                 : (sb ? Eigen::MatrixXd(av * bv(0, 0))
                       : Eigen::MatrixXd(av.cwiseProduct(bv)));
      break;
    case Op::Div:
      n.val = sa ? (av(0, 0) / bv.array()).matrix()
                 : (sb ? Eigen::MatrixXd(av / bv(0, 0))
                       : Eigen::MatrixXd(av.cwiseQuotient(bv)));
      break;
    default:
      throw DimensionError("binary: bad op");
  }
  return Var(t, t->push(std::move(n)));
}

Var operator+(const Var& a, const Var& b) { return binary(Op::Add, a, b); }
Var operator-(const Var& a, const Var& b) { return binary(Op::Sub, a, b); }
Var operator*(const Var& a, const Var& b) { return binary(Op::Mul, a, b); }
Var operator/(const Var& a, const Var& b) { return binary(Op::Div, a, b); }

Var unary(Op op, const Var& a, double c0 = 0.0, double c1 = 0.0) {
  Tape* t = a.tape();
  const Eigen::MatrixXd& v = a.value();
  Tape::Node n;
  n.op = op;
  n.a = a.id();
  n.c0 = c0;
  n.c1 = c1;
  switch (op) {
    case Op::Neg: n.val = -v; break;
    case Op::AddC: n.val = (v.array() + c0).matrix(); break;
    case Op::ScaleC: n.val = c0 * v; break;
    case Op::Sinh: n.val = v.unaryExpr([](double x) { return std::sinh(x); }); break;
    case Op::Cosh: n.val = v.unaryExpr([](double x) { return std::cosh(x); }); break;
    case Op::Sin: n.val = v.unaryExpr([](double x) { return std::sin(x); }); break;
    case Op::Cos: n.val = v.unaryExpr([](double x) { return std::cos(x); }); break;
    case Op::Acos: n.val = v.unaryExpr([](double x) { return qpseudo::acos(x); }); break;
    case Op::Acosh: n.val = v.unaryExpr([](double x) { return qpseudo::acosh(x); }); break;
    case Op::Sqrt: n.val = v.unaryExpr([](double x) { return std::sqrt(x); }); break;
    case Op::Abs: n.val = v.unaryExpr([](double x) { return std::fabs(x); }); break;
    case Op::Clamp:
      n.val = v.unaryExpr([c0, c1](double x) { return qpseudo::clamp(x, c0, c1); });
      break;
    case Op::Softplus: n.val = v.unaryExpr([](double x) { return qpseudo::softplus(x); }); break;
    case Op::Tanh: n.val = v.unaryExpr([](double x) { return std::tanh(x); }); break;
    case Op::Relu: n.val = v.unaryExpr([](double x) { return qpseudo::relu(x); }); break;
    case Op::Exp: n.val = v.unaryExpr([](double x) { return std::exp(x); }); break;
    case Op::Log: n.val = v.unaryExpr([](double x) { return std::log(x); }); break;
    case Op::Sigmoid: n.val = v.unaryExpr([](double x) { return qpseudo::sigmoid(x); }); break;
    case Op::Elu: n.val = v.unaryExpr([](double x) { return qpseudo::elu(x); }); break;
    default:
      throw DimensionError("unary: bad op");
  }
  return Var(t, t->push(std::move(n)));
}

Var operator-(const Var& a) { return unary(Op::Neg, a); }
Var operator+(const Var& a, double c) { return unary(Op::AddC, a, c); }
Var operator+(double c, const Var& a) { return unary(Op::AddC, a, c); }
Var operator-(const Var& a, double c) { return unary(Op::AddC, a, -c); }
Var operator-(double c, const Var& a) { return unary(Op::AddC, unary(Op::Neg, a), c); }
Var operator*(double c, const Var& a) { return unary(Op::ScaleC, a, c); }
Var operator*(const Var& a, double c) { return unary(Op::ScaleC, a, c); }
Var operator/(const Var& a, double c) { return unary(Op::ScaleC, a, 1.0 / c); }
Var operator/(double c, const Var& a) {
  // constant numerator of a's shape, divided elementwise
  return binary(Op::Div, unary(Op::AddC, unary(Op::ScaleC, a, 0.0), c), a);
}
Var scale(double c, const Var& a) { return unary(Op::ScaleC, a, c); }
Var add_const(const Var& a, double c) { return unary(Op::AddC, a, c); }

Var sinh(const Var& a) { return unary(Op::Sinh, a); }
Var cosh(const Var& a) { return unary(Op::Cosh, a); }
Var sin(const Var& a) { return unary(Op::Sin, a); }
Var cos(const Var& a) { return unary(Op::Cos, a); }
Var acos(const Var& a) { return unary(Op::Acos, a); }
Var acosh(const Var& a) { return unary(Op::Acosh, a); }
Var sqrt(const Var& a) { return unary(Op::Sqrt, a); }
Var abs(const Var& a) { return unary(Op::Abs, a); }
Var clamp(const Var& a, double lo, double hi) { return unary(Op::Clamp, a, lo, hi); }
Var softplus(const Var& a) { return unary(Op::Softplus, a); }
Var tanh(const Var& a) { return unary(Op::Tanh, a); }
Var relu(const Var& a) { return unary(Op::Relu, a); }
Var exp(const Var& a) { return unary(Op::Exp, a); }
Var log(const Var& a) { return unary(Op::Log, a); }
Var sigmoid(const Var& a) { return unary(Op::Sigmoid, a); }
Var elu(const Var& a) { return unary(Op::Elu, a); }

Var matmul(const Var& m, const Var& v) {
  check_same_tape(m, v);
  Tape* t = m.tape();
  if (m.value().cols() != v.value().rows())
    throw DimensionError("matmul: inner dimensions differ");
  Tape::Node n;
  n.op = Op::MatMul;
  n.a = m.id();
  n.b = v.id();
  n.val = m.value() * v.value();
  return Var(t, t->push(std::move(n)));
}

Var dot(const Var& a, const Var& b) {
  check_same_tape(a, b);
  Tape* t = a.tape();
  if (a.value().cols() != 1 || b.value().cols() != 1 || a.value().rows() != b.value().rows())
    throw DimensionError("dot: operands must be equal-length column vectors");
  Tape::Node n;
  n.op = Op::Dot;
  n.a = a.id();
  n.b = b.id();
  Eigen::MatrixXd r(1, 1);
  r(0, 0) = a.value().col(0).dot(b.value().col(0));
  n.val = std::move(r);
  return Var(t, t->push(std::move(n)));
}

Var sum(const Var& a) {
  Tape* t = a.tape();
  Tape::Node n;
  n.op = Op::Sum;
  n.a = a.id();
  Eigen::MatrixXd r(1, 1);
  r(0, 0) = a.value().sum();
  n.val = std::move(r);
  return Var(t, t->push(std::move(n)));
}

Var segment(const Var& v, int offset, int len) {
  Tape* t = v.tape();
  if (v.value().cols() != 1) throw DimensionError("segment: column vectors only");
  if (offset < 0 || len < 0 || offset + len > v.value().rows())
    throw DimensionError("segment: out of range");
  Tape::Node n;
  n.op = Op::Segment;
  n.a = v.id();
  n.i0 = offset;
  n.i1 = len;
  n.val = v.value().block(offset, 0, len, 1);
  return Var(t, t->push(std::move(n)));
}

Var concat(const Var& a, const Var& b) {
  check_same_tape(a, b);
  Tape* t = a.tape();
  if (a.value().cols() != 1 || b.value().cols() != 1)
    throw DimensionError("concat: column vectors only");
  Tape::Node n;
  n.op = Op::Concat;
  n.a = a.id();
  n.b = b.id();
  n.i0 = static_cast<int>(a.value().rows());
  Eigen::MatrixXd r(a.value().rows() + b.value().rows(), 1);
  r << a.value(), b.value();
  n.val = std::move(r);
  return Var(t, t->push(std::move(n)));
}

Var zero_first(const Var& v) {
  Tape* t = v.tape();
  if (v.value().cols() != 1) throw DimensionError("zero_first: column vectors only");
  Tape::Node n;
  n.op = Op::ZeroFirst;
  n.a = v.id();
  n.val = v.value();
  n.val(0, 0) = 0.0;
  return Var(t, t->push(std::move(n)));
}

// --- reverse sweep -------------------------------------------------------

void Tape::backward(const Var& output) {
  if (output.tape() != this) throw DimensionError("backward: output from another tape");
  Node& out = nodes_[output.id()];
  if (!is_scalar(out.val)) throw DimensionError("backward: output must be scalar");

  for (Node& n : nodes_) n.has_adj = false;
  out.adj = Eigen::MatrixXd::Ones(1, 1);
  out.has_adj = true;

  for (int id = output.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.has_adj) continue;
    const Eigen::MatrixXd& g = n.adj;
    switch (n.op) {
      case Op::Input:
      case Op::Const:
        break;
      case Op::Add: {
        const Eigen::MatrixXd& av = nodes_[n.a].val;
        const Eigen::MatrixXd& bv = nodes_[n.b].val;
        if (is_scalar(av) && !is_scalar(g)) {
          Eigen::MatrixXd s(1, 1);
          s(0, 0) = g.sum();
          accumulate(n.a, s);
        } else {
          accumulate(n.a, g);
        }
        if (is_scalar(bv) && !is_scalar(g)) {
          Eigen::MatrixXd s(1, 1);
          s(0, 0) = g.sum();
          accumulate(n.b, s);
        } else {
          accumulate(n.b, g);
        }
        break;
      }
      case Op::Sub: {
        const Eigen::MatrixXd& av = nodes_[n.a].val;
        const Eigen::MatrixXd& bv = nodes_[n.b].val;
        if (is_scalar(av) && !is_scalar(g)) {
          Eigen::MatrixXd s(1, 1);
          s(0, 0) = g.sum();
          accumulate(n.a, s);
        } else {
          accumulate(n.a, g);
        }
        if (is_scalar(bv) && !is_scalar(g)) {
          Eigen::MatrixXd s(1, 1);
          s(0, 0) = -g.sum();
          accumulate(n.b, s);
        } else {
          accumulate(n.b, Eigen::MatrixXd(-g));
        }
        break;
      }
      case Op::Mul: {
        const Eigen::MatrixXd& av = nodes_[n.a].val;
        const Eigen::MatrixXd& bv = nodes_[n.b].val;
        if (is_scalar(av) && !is_scalar(bv)) {
          Eigen::MatrixXd s(1, 1);
          s(0, 0) = g.cwiseProduct(bv).sum();
          accumulate(n.a, s);
          accumulate(n.b, Eigen::MatrixXd(av(0, 0) * g));
        } else if (is_scalar(bv) && !is_scalar(av)) {
          accumulate(n.a, Eigen::MatrixXd(bv(0, 0) * g));
          Eigen::MatrixXd s(1, 1);
          s(0, 0) = g.cwiseProduct(av).sum();
          accumulate(n.b, s);
        } else {
          accumulate(n.a, Eigen::MatrixXd(g.cwiseProduct(bv)));
          accumulate(n.b, Eigen::MatrixXd(g.cwiseProduct(av)));
        }
        break;
      }
      case Op::Div: {
        const Eigen::MatrixXd& av = nodes_[n.a].val;
        const Eigen::MatrixXd& bv = nodes_[n.b].val;
        if (is_scalar(bv) && !is_scalar(av)) {
          accumulate(n.a, Eigen::MatrixXd(g / bv(0, 0)));
          Eigen::MatrixXd s(1, 1);
          s(0, 0) = -g.cwiseProduct(n.val).sum() / bv(0, 0);
          accumulate(n.b, s);
        } else if (is_scalar(av) && !is_scalar(bv)) {
          Eigen::MatrixXd s(1, 1);
          s(0, 0) = g.cwiseQuotient(bv).sum();
          accumulate(n.a, s);
          accumulate(n.b, Eigen::MatrixXd(-g.cwiseProduct(n.val).cwiseQuotient(bv)));
        } else {
          accumulate(n.a, Eigen::MatrixXd(g.cwiseQuotient(bv)));
          accumulate(n.b, Eigen::MatrixXd(-g.cwiseProduct(n.val).cwiseQuotient(bv)));
        }
        break;
      }
      case Op::Neg: accumulate(n.a, Eigen::MatrixXd(-g)); break;
      case Op::AddC: accumulate(n.a, g); break;
      case Op::ScaleC: accumulate(n.a, Eigen::MatrixXd(n.c0 * g)); break;
      case Op::MatMul: {
        const Eigen::MatrixXd& mv = nodes_[n.a].val;
        const Eigen::MatrixXd& vv = nodes_[n.b].val;
        accumulate(n.a, Eigen::MatrixXd(g * vv.transpose()));
        accumulate(n.b, Eigen::MatrixXd(mv.transpose() * g));
        break;
      }
      case Op::Dot: {
        const double gs = g(0, 0);
        accumulate(n.a, Eigen::MatrixXd(gs * nodes_[n.b].val));
        accumulate(n.b, Eigen::MatrixXd(gs * nodes_[n.a].val));
        break;
      }
      case Op::Sum: {
        const Eigen::MatrixXd& av = nodes_[n.a].val;
        accumulate(n.a, Eigen::MatrixXd(Eigen::MatrixXd::Constant(av.rows(), av.cols(), g(0, 0))));
        break;
      }
      case Op::Segment: {
        const Eigen::MatrixXd& av = nodes_[n.a].val;
        Eigen::MatrixXd full = Eigen::MatrixXd::Zero(av.rows(), 1);
        full.block(n.i0, 0, n.i1, 1) = g;
        accumulate(n.a, full);
        break;
      }
      case Op::Concat: {
        const int na = n.i0;
        accumulate(n.a, Eigen::MatrixXd(g.topRows(na)));
        accumulate(n.b, Eigen::MatrixXd(g.bottomRows(g.rows() - na)));
        break;
      }
      case Op::ZeroFirst: {
        Eigen::MatrixXd ga = g;
        ga(0, 0) = 0.0;
        accumulate(n.a, ga);
        break;
      }
      case Op::Sinh:
        accumulate(n.a, Eigen::MatrixXd(g.cwiseProduct(nodes_[n.a].val.array().cosh().matrix())));
        break;
      case Op::Cosh:
        accumulate(n.a, Eigen::MatrixXd(g.cwiseProduct(nodes_[n.a].val.array().sinh().matrix())));
        break;
      case Op::Sin:
        accumulate(n.a, Eigen::MatrixXd(g.cwiseProduct(nodes_[n.a].val.array().cos().matrix())));
        break;
      case Op::Cos:
        accumulate(n.a, Eigen::MatrixXd(-g.cwiseProduct(nodes_[n.a].val.array().sin().matrix())));
        break;
      case Op::Acos: {
        Eigen::MatrixXd d = nodes_[n.a].val.unaryExpr([](double x) {
          return (x > -1.0 && x < 1.0) ? -1.0 / std::sqrt(1.0 - x * x) : 0.0;
        });
        accumulate(n.a, Eigen::MatrixXd(g.cwiseProduct(d)));
        break;
      }
      case Op::Acosh: {
        Eigen::MatrixXd d = nodes_[n.a].val.unaryExpr([](double x) {
          return x > 1.0 ? 1.0 / std::sqrt(x * x - 1.0) : 0.0;
        });
        accumulate(n.a, Eigen::MatrixXd(g.cwiseProduct(d)));
        break;
      }
      case Op::Sqrt:
        accumulate(n.a, Eigen::MatrixXd(g.cwiseQuotient(2.0 * n.val)));
        break;
      case Op::Abs: {
        Eigen::MatrixXd d = nodes_[n.a].val.unaryExpr(
            [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
        accumulate(n.a, Eigen::MatrixXd(g.cwiseProduct(d)));
        break;
      }
      case Op::Clamp: {
        const double lo = n.c0, hi = n.c1;
        Eigen::MatrixXd d = nodes_[n.a].val.unaryExpr(
            [lo, hi](double x) { return (x > lo && x < hi) ? 1.0 : 0.0; });
        accumulate(n.a, Eigen::MatrixXd(g.cwiseProduct(d)));
        break;
      }
      case Op::Softplus: {
        Eigen::MatrixXd d = nodes_[n.a].val.unaryExpr([](double x) { return qpseudo::sigmoid(x); });
        accumulate(n.a, Eigen::MatrixXd(g.cwiseProduct(d)));
        break;
      }
      case Op::Tanh: {
        Eigen::MatrixXd d = (1.0 - n.val.array().square()).matrix();
        accumulate(n.a, Eigen::MatrixXd(g.cwiseProduct(d)));
        break;
      }
      case Op::Relu: {
        Eigen::MatrixXd d = nodes_[n.a].val.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; });
        accumulate(n.a, Eigen::MatrixXd(g.cwiseProduct(d)));
        break;
      }
      case Op::Exp:
        accumulate(n.a, Eigen::MatrixXd(g.cwiseProduct(n.val)));
        break;
      case Op::Log:
        accumulate(n.a, Eigen::MatrixXd(g.cwiseQuotient(nodes_[n.a].val)));
        break;
      case Op::Sigmoid: {
        Eigen::MatrixXd d = n.val.cwiseProduct((1.0 - n.val.array()).matrix());
        accumulate(n.a, Eigen::MatrixXd(g.cwiseProduct(d)));
        break;
      }
      case Op::Elu: {
        Eigen::MatrixXd d = nodes_[n.a].val.unaryExpr(
            [](double x) { return x > 0.0 ? 1.0 : std::exp(x); });
        accumulate(n.a, Eigen::MatrixXd(g.cwiseProduct(d)));
        break;
      }
    }
  }
}

// --- grad check ----------------------------------------------------------

GradCheckReport grad_check(const ExprFn& f, const std::vector<Eigen::MatrixXd>& inputs,
                           double step, double rel_tol) {
  GradCheckReport report;

  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Eigen::MatrixXd& m : inputs) vars.push_back(tape.input(m));
  Var out = f(tape, vars);
  if (out.value().rows() != 1 || out.value().cols() != 1)
    throw DimensionError("grad_check: expression must be scalar-valued");
  tape.backward(out);

  std::vector<Eigen::MatrixXd> ad_grads;
  ad_grads.reserve(vars.size());
  for (const Var& v : vars) ad_grads.push_back(v.grad());

  auto eval_at = [&](const std::vector<Eigen::MatrixXd>& pts) {
    Tape t2;
    std::vector<Var> vs;
    vs.reserve(pts.size());
    for (const Eigen::MatrixXd& m : pts) vs.push_back(t2.input(m));
    return f(t2, vs).scalar();
  };

  std::vector<Eigen::MatrixXd> work = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (int i = 0; i < inputs[k].rows(); ++i) {
      for (int j = 0; j < inputs[k].cols(); ++j) {
        const double orig = work[k](i, j);
        work[k](i, j) = orig + step;
        const double fp = eval_at(work);
        work[k](i, j) = orig - step;
        const double fm = eval_at(work);
        work[k](i, j) = orig;
        const double fd = (fp - fm) / (2.0 * step);
        const double ad = ad_grads[k](i, j);
        const double denom = std::max({std::fabs(ad), std::fabs(fd), 1e-8});
        const double rel = std::fabs(ad - fd) / denom;
        if (rel > report.max_rel_err) {
          report.max_rel_err = rel;
          report.worst_input = static_cast<int>(k);
          report.worst_row = i;
          report.worst_col = j;
          report.ad_grad = ad;
          report.fd_grad = fd;
        }
      }
    }
  }
  report.passed = report.max_rel_err <= rel_tol;
  return report;
}

}  // namespace qpseudo::ad
