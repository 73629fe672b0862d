#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace stratlearn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point of the ambient parameter space R^n.
using AmbientPoint = Eigen::VectorXd;

inline constexpr int kMaxVars = 8;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exponent vector of a monomial, one entry per variable.
using Exponent = std::vector<int>;

/// Sparse multivariate polynomial with real coefficients.
///
/// Terms are kept in lexicographic order of their exponent vectors, so
/// evaluation sums in the same order on every run. Zero coefficients are
/// dropped on construction and after every arithmetic operation.
class Polynomial {
 public:
  explicit Polynomial(int nvars);
  Polynomial(int nvars, const std::vector<std::pair<Exponent, double>>& terms);

  /// Parses a sum of monomials such as `x0^2 + x1^2 - x2^2` or `2*x0*x1 - 0.5`.
  /// When nvars is 0 it is inferred from the largest variable index used.
  static Polynomial parse(std::string_view text, int nvars = 0);

  static Polynomial constant(int nvars, double value);
  static Polynomial variable(int nvars, int index);

  int nvars() const { return nvars_; }
  std::size_t size() const { return terms_.size(); }
  int degree() const;
  const std::map<Exponent, double>& terms() const { return terms_; }
  double coefficient(const Exponent& e) const;

  double eval(const AmbientPoint& x) const;
  Vector grad(const AmbientPoint& x) const;
  Matrix hessian(const AmbientPoint& x) const;

  /// Formats in the same grammar `parse` accepts; highest exponent first.
  std::string to_string() const;

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator*(double s) const;
  friend Polynomial operator*(double s, const Polynomial& p) { return p * s; }

  bool operator==(const Polynomial& other) const = default;

 private:
  void check_dim(const AmbientPoint& x) const;
  void add_term(const Exponent& e, double c);

  int nvars_;
  std::map<Exponent, double> terms_;
};

/// Named varieties used throughout the project.
namespace varieties {

/// Double cone x1^2 + x2^2 - x0^2, consistent with the (xi, theta) chart
/// (x0 = xi, x1 = xi cos theta, x2 = xi sin theta).
Polynomial cone();

/// Cusp x0^2 + x1^3.
Polynomial cusp();

/// Coordinate cross x0 * x1.
Polynomial cross();

}  // namespace varieties

}  // namespace stratlearn
