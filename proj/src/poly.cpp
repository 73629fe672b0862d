#include "stratlearn/poly.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

namespace stratlearn {

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= x;
  return r;
}

double monomial(const Exponent& e, const AmbientPoint& x) {
  double v = 1.0;
  for (std::size_t i = 0; i < e.size(); ++i) v *= ipow(x[static_cast<Eigen::Index>(i)], e[i]);
  return v;
}

class Parser {
 public:
  Parser(std::string_view text, int nvars) : s_(text), nvars_(nvars) {}

  std::vector<std::pair<Exponent, double>> parse_terms() {
    std::vector<std::pair<Exponent, double>> out;
    skip_ws();
    if (at_end()) fail("empty polynomial");
    bool first = true;
    while (!at_end()) {
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') {
        sign = (get() == '-') ? -1.0 : 1.0;
        skip_ws();
      } else if (!first) {
        fail("expected '+' or '-' between terms");
      }
      first = false;
      auto [e, c] = parse_term();
      out.emplace_back(std::move(e), sign * c);
      skip_ws();
    }
    return out;
  }

  int max_index() const { return max_index_; }

 private:
  std::pair<Exponent, double> parse_term() {
    double coeff = 1.0;
    Exponent e(kMaxVars, 0);
    bool need_factor = true;
    while (true) {
      skip_ws();
      if (at_end()) {
        if (need_factor) fail("expected a factor");
        break;
      }
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        coeff *= parse_number();
      } else if (c == 'x') {
        get();
        int idx = parse_int("variable index");
        if (idx < 0 || idx >= kMaxVars) fail(fmt::format("variable x{} out of range", idx));
        if (nvars_ > 0 && idx >= nvars_) fail(fmt::format("variable x{} exceeds nvars={}", idx, nvars_));
        max_index_ = std::max(max_index_, idx);
        skip_ws();
        int power = 1;
        if (!at_end() && peek() == '^') {
          get();
          skip_ws();
          power = parse_int("exponent");
        }
        e[static_cast<std::size_t>(idx)] += power;
      } else {
        fail(fmt::format("unexpected character '{}'", c));
      }
      need_factor = false;
      skip_ws();
      if (!at_end() && peek() == '*') {
        get();
        need_factor = true;
        continue;
      }
      // Implicit multiplication: "2x0", "x0 x1".
      if (!at_end() && (peek() == 'x' || std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) continue;
      if (need_factor) fail("expected a factor after '*'");
      break;
    }
    return {e, coeff};
  }

  double parse_number() {
    const char* begin = s_.data() + pos_;
    std::size_t len = 0;
    auto is_num = [&](std::size_t k) {
      char c = s_[k];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return true;
      if ((c == 'e' || c == 'E') && k + 1 < s_.size()) return true;
      if ((c == '+' || c == '-') && k > pos_ && (s_[k - 1] == 'e' || s_[k - 1] == 'E')) return true;
      return false;
    };
    while (pos_ + len < s_.size() && is_num(pos_ + len)) ++len;
    std::string tok(begin, len);
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(v)) fail(fmt::format("malformed number '{}'", tok));
    pos_ += len;
    return v;
  }

  int parse_int(const char* what) {
    std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (start == pos_) fail(fmt::format("expected {}", what));
    return std::atoi(std::string(s_.substr(start, pos_ - start)).c_str());
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }
  char get() { return s_[pos_++]; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(fmt::format("polynomial parse error at column {}: {}", pos_ + 1, msg));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int nvars_;
  int max_index_ = -1;
};

}  // namespace

Polynomial::Polynomial(int nvars) : nvars_(nvars) {
  if (nvars < 1 || nvars > kMaxVars)
    throw DimensionError(fmt::format("nvars must be in [1, {}], got {}", kMaxVars, nvars));
}

Polynomial::Polynomial(int nvars, const std::vector<std::pair<Exponent, double>>& terms) : Polynomial(nvars) {
  for (const auto& [e, c] : terms) add_term(e, c);
}

Polynomial Polynomial::parse(std::string_view text, int nvars) {
  Parser parser(text, nvars);
  auto raw = parser.parse_terms();
  int n = nvars > 0 ? nvars : std::max(1, parser.max_index() + 1);
  Polynomial p(n);
  for (auto& [e, c] : raw) {
    e.resize(static_cast<std::size_t>(n));
    p.add_term(e, c);
  }
  return p;
}

Polynomial Polynomial::constant(int nvars, double value) {
  Polynomial p(nvars);
  p.add_term(Exponent(static_cast<std::size_t>(nvars), 0), value);
  return p;
}

Polynomial Polynomial::variable(int nvars, int index) {
  Polynomial p(nvars);
  if (index < 0 || index >= nvars) throw DimensionError("variable index out of range");
  Exponent e(static_cast<std::size_t>(nvars), 0);
  e[static_cast<std::size_t>(index)] = 1;
  p.add_term(e, 1.0);
  return p;
}

void Polynomial::add_term(const Exponent& e, double c) {
  if (static_cast<int>(e.size()) != nvars_)
    throw DimensionError(fmt::format("exponent vector has length {}, expected {}", e.size(), nvars_));
  for (int k : e)
    if (k < 0) throw DimensionError("negative exponent");
  if (!std::isfinite(c)) throw std::invalid_argument("non-finite coefficient");
  if (c == 0.0) return;
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_.emplace(e, c);
  } else {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (int k : e) s += k;
    d = std::max(d, s);
  }
  return d;
}

double Polynomial::coefficient(const Exponent& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::check_dim(const AmbientPoint& x) const {
  if (x.size() != nvars_)
    throw DimensionError(fmt::format("point has dimension {}, polynomial has {} variables", x.size(), nvars_));
}

double Polynomial::eval(const AmbientPoint& x) const {
  check_dim(x);
  double sum = 0.0;
  for (const auto& [e, c] : terms_) sum += c * monomial(e, x);
  return sum;
}

Vector Polynomial::grad(const AmbientPoint& x) const {
  check_dim(x);
  Vector g = Vector::Zero(nvars_);
  for (const auto& [e, c] : terms_) {
    for (int i = 0; i < nvars_; ++i) {
      int k = e[static_cast<std::size_t>(i)];
      if (k == 0) continue;
      Exponent d = e;
      d[static_cast<std::size_t>(i)] = k - 1;
      g[i] += c * k * monomial(d, x);
    }
  }
  return g;
}

Matrix Polynomial::hessian(const AmbientPoint& x) const {
  check_dim(x);
  Matrix h = Matrix::Zero(nvars_, nvars_);
  for (const auto& [e, c] : terms_) {
    for (int i = 0; i < nvars_; ++i) {
      int ki = e[static_cast<std::size_t>(i)];
      if (ki == 0) continue;
      for (int j = i; j < nvars_; ++j) {
        Exponent d = e;
        double factor;
        if (i == j) {
          if (ki < 2) continue;
          d[static_cast<std::size_t>(i)] = ki - 2;
          factor = static_cast<double>(ki) * (ki - 1);
        } else {
          int kj = e[static_cast<std::size_t>(j)];
          if (kj == 0) continue;
          d[static_cast<std::size_t>(i)] = ki - 1;
          d[static_cast<std::size_t>(j)] = kj - 1;
          factor = static_cast<double>(ki) * kj;
        }
        h(i, j) += c * factor * monomial(d, x);
      }
    }
  }
  // Mirror the upper triangle so the result is exactly symmetric.
  for (int i = 0; i < nvars_; ++i)
    for (int j = 0; j < i; ++j) h(i, j) = h(j, i);
  return h;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [e, c] = *it;
    double mag = std::abs(c);
    if (first) {
      if (c < 0) out += "-";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    first = false;
    std::string body;
    for (int i = 0; i < nvars_; ++i) {
      int k = e[static_cast<std::size_t>(i)];
      if (k == 0) continue;
      if (!body.empty()) body += "*";
      body += k == 1 ? fmt::format("x{}", i) : fmt::format("x{}^{}", i, k);
    }
    if (body.empty()) {
      out += fmt::format("{}", mag);
    } else if (mag != 1.0) {
      out += fmt::format("{}*{}", mag, body);
    } else {
      out += body;
    }
  }
  return out;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  if (other.nvars_ != nvars_) throw DimensionError("nvars mismatch");
  Polynomial r = *this;
  for (const auto& [e, c] : other.terms_) r.add_term(e, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& other) const { return *this + other * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& other) const {
  if (other.nvars_ != nvars_) throw DimensionError("nvars mismatch");
  Polynomial r(nvars_);
  for (const auto& [ea, ca] : terms_) {
    for (const auto& [eb, cb] : other.terms_) {
      Exponent e = ea;
      for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
      r.add_term(e, ca * cb);
    }
  }
  return r;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial r(nvars_);
  for (const auto& [e, c] : terms_) r.add_term(e, c * s);
  return r;
}

namespace varieties {

Polynomial cone() { return Polynomial::parse("x1^2 + x2^2 - x0^2", 3); }
Polynomial cusp() { return Polynomial::parse("x0^2 + x1^3", 2); }
Polynomial cross() { return Polynomial::parse("x0*x1", 2); }

}  // namespace varieties

}  // namespace stratlearn
