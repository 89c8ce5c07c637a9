#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "qpseudo/types.hpp"

namespace qpseudo::ad {

class Tape;

// Handle to a node on a tape. Values are dense arrays: column vectors are
// n x 1, scalars are 1 x 1. Gradients become available after Tape::backward.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Eigen::MatrixXd& value() const;
  const Eigen::MatrixXd& grad() const;
  double scalar() const;  // value()(0,0); requires a 1 x 1 node

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

enum class Op : std::uint8_t {
  Input, Const,
  Add, AddC, Sub, Neg, Mul, ScaleC, Div,
  MatMul, Dot, Sum,
  Segment, Concat, ZeroFirst,
  Sinh, Cosh, Sin, Cos, Acos, Acosh, Sqrt, Abs, Clamp,
  Softplus, Tanh, Relu, Exp, Log, Sigmoid, Elu,
};

// Reverse-mode tape over dense double arrays. Nodes are recorded in
// topological order by construction (define-by-run); a branch taken at
// recording time is the only branch on the tape, so predicates are never
// differentiated. Single-writer; independent tapes are independent.
class Tape {
 public:
  Var input(const Eigen::MatrixXd& value);
  Var constant(const Eigen::MatrixXd& value);
  Var constant(double value);

  // Reverse sweep from a scalar output. Deterministic accumulation order.
  void backward(const Var& output);

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }
  void reserve(std::size_t n) { nodes_.reserve(n); }

 private:
  struct Node {
    Op op;
    int a = -1, b = -1;
    double c0 = 0.0, c1 = 0.0;  // op constants (clamp bounds, scale factor)
    int i0 = 0, i1 = 0;         // segment offset / length
    Eigen::MatrixXd val;
    Eigen::MatrixXd adj;
    bool has_adj = false;
  };

  std::vector<Node> nodes_;

  int push(Node&& n);
  void accumulate(int id, const Eigen::MatrixXd& g);

  friend class Var;
  friend Var binary(Op, const Var&, const Var&);
  friend Var unary(Op, const Var&, double, double);
  friend Var matmul(const Var&, const Var&);
  friend Var dot(const Var&, const Var&);
  friend Var sum(const Var&);
  friend Var segment(const Var&, int, int);
  friend Var concat(const Var&, const Var&);
  friend Var zero_first(const Var&);
  friend Var scale(double, const Var&);
  friend Var add_const(const Var&, double);
};

// Arithmetic. Elementwise; a 1 x 1 operand broadcasts against any shape.
Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator-(const Var& a);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator+(const Var& a, double c);
Var operator+(double c, const Var& a);
Var operator-(const Var& a, double c);
Var operator-(double c, const Var& a);
Var operator*(double c, const Var& a);
Var operator*(const Var& a, double c);
Var operator/(const Var& a, double c);
Var operator/(double c, const Var& a);

Var matmul(const Var& m, const Var& v);
Var dot(const Var& a, const Var& b);
Var sum(const Var& a);
Var segment(const Var& v, int offset, int len);
Var concat(const Var& a, const Var& b);
Var zero_first(const Var& v);  // copy with row 0 set to zero
Var scale(double c, const Var& a);
Var add_const(const Var& a, double c);

Var sinh(const Var& a);
Var cosh(const Var& a);
Var sin(const Var& a);
Var cos(const Var& a);
Var acos(const Var& a);   // forward clamps to [-1,1]; zero gradient when saturated
Var acosh(const Var& a);  // forward clamps to [1,inf); zero gradient when saturated
Var sqrt(const Var& a);
Var abs(const Var& a);
Var clamp(const Var& a, double lo, double hi);
Var softplus(const Var& a);
Var tanh(const Var& a);
Var relu(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var sigmoid(const Var& a);
Var elu(const Var& a);

// Branch selection by a non-differentiated predicate: the tape keeps only
// the taken branch, so no gradient flows through the other one.
inline Var select(bool take_first, const Var& a, const Var& b) {
  return take_first ? a : b;
}

// --- gradient checking -------------------------------------------------

using ExprFn = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheckReport {
  bool passed = true;
  double max_rel_err = 0.0;
  int worst_input = -1;
  int worst_row = -1;
  int worst_col = -1;
  double ad_grad = 0.0;
  double fd_grad = 0.0;
};

// Per-coordinate comparison of reverse-mode gradients against central finite
// differences. Relative error uses an absolute floor of 1e-8.
GradCheckReport grad_check(const ExprFn& f, const std::vector<Eigen::MatrixXd>& inputs,
                           double step, double rel_tol);

}  // namespace qpseudo::ad
