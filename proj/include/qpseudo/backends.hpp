#pragma once

#include <Eigen/Dense>

#include "qpseudo/scalar_math.hpp"
#include "qpseudo/tape.hpp"
#include "qpseudo/types.hpp"

namespace qpseudo {

enum class Activation { Identity, Relu, Tanh, Sigmoid, Elu };

// Evaluation backends for the shared geometry formulas. Eager computes plain
// doubles and Eigen vectors; Taped records the identical operation sequence
// on an ad::Tape. Structural accessors live here; arithmetic goes through
// operators and ADL so the formula templates read the same either way.

struct Eager {
  using Vec = Eigen::VectorXd;
  using Sca = double;
  using Mat = Eigen::MatrixXd;

  static double val(Sca s) { return s; }
  static Sca dot(const Vec& a, const Vec& b) { return a.dot(b); }
  static Sca at(const Vec& v, int i) { return v(i); }
  static Vec head(const Vec& v, int n) { return v.head(n); }
  static Vec segment(const Vec& v, int offset, int n) { return v.segment(offset, n); }
  static Vec vec1(Sca s) {
    Vec v(1);
    v(0) = s;
    return v;
  }
  static Vec concat2(const Vec& a, const Vec& b) {
    Vec r(a.size() + b.size());
    r << a, b;
    return r;
  }
  static Vec matvec(const Mat& m, const Vec& v) { return m * v; }
  static Vec zero_first(Vec v) {
    if (v.size() > 0) v(0) = 0.0;
    return v;
  }
  static double max_coeff(const Vec& v) { return v.maxCoeff(); }
  static Sca sum(const Vec& v) { return v.sum(); }
  static Vec exp_elem(const Vec& v) {
    return v.unaryExpr([](double x) { return std::exp(x); });
  }
  static Vec add_scalar(const Vec& v, double c) { return (v.array() + c).matrix(); }
  static Vec cwise_mul(const Vec& a, const Vec& b) { return a.cwiseProduct(b); }
  static Vec activation(const Vec& v, Activation a) {
    switch (a) {
      case Activation::Identity: return v;
      case Activation::Relu: return v.unaryExpr([](double x) { return qpseudo::relu(x); });
      case Activation::Tanh: return v.unaryExpr([](double x) { return std::tanh(x); });
      case Activation::Sigmoid: return v.unaryExpr([](double x) { return qpseudo::sigmoid(x); });
      case Activation::Elu: return v.unaryExpr([](double x) { return qpseudo::elu(x); });
    }
    return v;
  }
};

struct Taped {
  using Vec = ad::Var;
  using Sca = ad::Var;
  using Mat = ad::Var;

  static double val(const Sca& s) { return s.scalar(); }
  static Sca dot(const Vec& a, const Vec& b) { return ad::dot(a, b); }
  static Sca at(const Vec& v, int i) { return ad::segment(v, i, 1); }
  static Vec head(const Vec& v, int n) { return ad::segment(v, 0, n); }
  static Vec segment(const Vec& v, int offset, int n) { return ad::segment(v, offset, n); }
  static Vec vec1(const Sca& s) { return s; }
  static Vec concat2(const Vec& a, const Vec& b) { return ad::concat(a, b); }
  static Vec matvec(const Mat& m, const Vec& v) { return ad::matmul(m, v); }
  static Vec zero_first(const Vec& v) { return ad::zero_first(v); }
  static double max_coeff(const Vec& v) { return v.value().maxCoeff(); }
  static Sca sum(const Vec& v) { return ad::sum(v); }
  static Vec exp_elem(const Vec& v) { return ad::exp(v); }
  static Vec add_scalar(const Vec& v, double c) { return ad::add_const(v, c); }
  static Vec cwise_mul(const Vec& a, const Vec& b) { return a * b; }
  static Vec activation(const Vec& v, Activation a) {
    switch (a) {
      case Activation::Identity: return v;
      case Activation::Relu: return ad::relu(v);
      case Activation::Tanh: return ad::tanh(v);
      case Activation::Sigmoid: return ad::sigmoid(v);
      case Activation::Elu: return ad::elu(v);
    }
    return v;
  }
};

}  // namespace qpseudo
