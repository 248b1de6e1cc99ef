#pragma once

// Dense self-adjoint matrix kernels: the numerical substrate shared by every
// other header. Storage is complex throughout; a field tag tracks whether the
// value semantically lives over the reals.

#include <Eigen/Dense>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace psdc {

enum class Field { real, complex_ };

inline const char* field_name(Field f) { return f == Field::real ? "real" : "complex"; }

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

class RectMatrix;

class SymMatrix {
 public:
  SymMatrix(Field field, CMat entries) : field_(field), m_(std::move(entries)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols())
      throw std::invalid_argument("SymMatrix: square matrix with dim >= 1 required");
    double scale = m_.norm();
    double drift = (m_ - m_.adjoint()).norm();
    if (drift > 1e-12 * std::max(1.0, scale))
      throw std::invalid_argument("SymMatrix: input is not self-adjoint within tolerance");
    m_ = ((m_ + m_.adjoint()) / 2.0).eval();
    if (field_ == Field::real && m_.imag().norm() > 1e-12 * std::max(1.0, scale))
      throw std::invalid_argument("SymMatrix: complex entries under real field tag");
  }

  static SymMatrix zero(Field f, int d) { return SymMatrix(f, CMat::Zero(d, d)); }
  static SymMatrix identity(Field f, int d) { return SymMatrix(f, CMat::Identity(d, d)); }
  static SymMatrix diagonal(Field f, const std::vector<double>& diag) {
    CMat m = CMat::Zero(static_cast<int>(diag.size()), static_cast<int>(diag.size()));
    for (size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return SymMatrix(f, std::move(m));
  }

  Field field() const { return field_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  const CMat& entries() const { return m_; }

  SymMatrix operator+(const SymMatrix& o) const {
    require_compatible(o);
    return SymMatrix(field_, m_ + o.m_);
  }
  SymMatrix operator-(const SymMatrix& o) const {
    require_compatible(o);
    return SymMatrix(field_, m_ - o.m_);
  }
  SymMatrix scaled(double c) const { return SymMatrix(field_, c * m_); }

  double frobenius_norm() const { return m_.norm(); }
  double trace() const { return m_.trace().real(); }

  void require_compatible(const SymMatrix& o) const {
    if (dim() != o.dim()) throw std::invalid_argument("SymMatrix: dimension mismatch");
    if (field_ != o.field_) throw std::invalid_argument("SymMatrix: field mismatch");
  }

 private:
  Field field_;
  CMat m_;
};

class RectMatrix {
 public:
  RectMatrix(Field field, CMat entries) : field_(field), m_(std::move(entries)) {
    if (m_.rows() < 1 || m_.cols() < 1)
      throw std::invalid_argument("RectMatrix: positive shape required");
  }

  Field field() const { return field_; }
  int rows() const { return static_cast<int>(m_.rows()); }
  int cols() const { return static_cast<int>(m_.cols()); }
  const CMat& entries() const { return m_; }

 private:
  Field field_;
  CMat m_;
};

// All eigenvalues, sorted ascending.
inline std::vector<double> sym_eigvals(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(m.entries(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sym_eigvals: eigensolver failed to converge");
  std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + m.dim());
  return out;
}

inline double lambda_min(const SymMatrix& m) { return sym_eigvals(m).front(); }
inline double lambda_max(const SymMatrix& m) { return sym_eigvals(m).back(); }

inline double spectral_norm(const SymMatrix& m) {
  auto ev = sym_eigvals(m);
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

// Tr[a* b]; real for self-adjoint arguments.
inline double trace_inner(const SymMatrix& a, const SymMatrix& b) {
  a.require_compatible(b);
  return (a.entries().adjoint() * b.entries()).trace().real();
}

// k* m k, the congruence transform; psd in, psd out.
inline SymMatrix congruence(const RectMatrix& k, const SymMatrix& m) {
  if (k.rows() != m.dim()) throw std::invalid_argument("congruence: shape mismatch");
  Field f = (k.field() == Field::complex_ || m.field() == Field::complex_) ? Field::complex_
                                                                           : Field::real;
  return SymMatrix(f, k.entries().adjoint() * m.entries() * k.entries());
}

// ---------------------------------------------------------------------------
// CSV matrix format: header `dim=<d>,field=<real|complex>` (square) or
// `rows=<n>,cols=<d>,field=<...>` (rectangular); entries row-major, complex
// written as a+bi literals.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_entry(const std::complex<double>& z, Field f) {
  char buf[96];
  if (f == Field::real) {
    std::snprintf(buf, sizeof buf, "%.17g", z.real());
    return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real(), z.imag());
  return buf;
}

inline std::complex<double> parse_entry(const std::string& s) {
  if (!s.empty() && s.back() == 'i') {
    std::string body = s.substr(0, s.size() - 1);
    // Split at the sign that starts the imaginary part (skip exponent signs).
    for (size_t i = body.size(); i-- > 1;) {
      char ch = body[i];
      if ((ch == '+' || ch == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
        return {std::stod(body.substr(0, i)), std::stod(body.substr(i))};
      }
    }
    return {0.0, std::stod(body)};
  }
  return {std::stod(s), 0.0};
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

inline Field parse_field_token(const std::string& tok) {
  auto eq = tok.find('=');
  std::string v = (eq == std::string::npos) ? tok : tok.substr(eq + 1);
  if (v == "real") return Field::real;
  if (v == "complex") return Field::complex_;
  throw std::invalid_argument("matrix CSV: unknown field tag '" + v + "'");
}

inline void write_entries(std::ostream& os, const CMat& m, Field f) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_entry(m(i, j), f);
    }
    os << '\n';
  }
}

inline CMat read_entries(std::istream& is, int rows, int cols) {
  CMat m(rows, cols);
  std::string line;
  for (int i = 0; i < rows; ++i) {
    if (!std::getline(is, line)) throw std::invalid_argument("matrix CSV: truncated file");
    auto toks = split_csv_line(line);
    if (static_cast<int>(toks.size()) != cols)
      throw std::invalid_argument("matrix CSV: wrong entry count in row");
    for (int j = 0; j < cols; ++j) m(i, j) = parse_entry(toks[j]);
  }
  return m;
}

}  // namespace detail

inline void write_sym_csv(const SymMatrix& m, std::ostream& os) {
  os << "dim=" << m.dim() << ",field=" << field_name(m.field()) << '\n';
  detail::write_entries(os, m.entries(), m.field());
}

inline void write_rect_csv(const RectMatrix& m, std::ostream& os) {
  os << "rows=" << m.rows() << ",cols=" << m.cols() << ",field=" << field_name(m.field())
     << '\n';
  detail::write_entries(os, m.entries(), m.field());
}

inline SymMatrix read_sym_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::invalid_argument("matrix CSV: empty file");
  auto toks = detail::split_csv_line(header);
  if (toks.size() != 2 || toks[0].rfind("dim=", 0) != 0)
    throw std::invalid_argument("matrix CSV: expected header dim=<d>,field=<...>");
  int d = std::stoi(toks[0].substr(4));
  Field f = detail::parse_field_token(toks[1]);
  return SymMatrix(f, detail::read_entries(is, d, d));
}

inline RectMatrix read_rect_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::invalid_argument("matrix CSV: empty file");
  auto toks = detail::split_csv_line(header);
  if (toks.size() == 2 && toks[0].rfind("dim=", 0) == 0) {
    int d = std::stoi(toks[0].substr(4));
    Field f = detail::parse_field_token(toks[1]);
    return RectMatrix(f, detail::read_entries(is, d, d));
  }
  if (toks.size() != 3 || toks[0].rfind("rows=", 0) != 0 || toks[1].rfind("cols=", 0) != 0)
    throw std::invalid_argument("matrix CSV: expected rows=<n>,cols=<d>,field=<...>");
  int rows = std::stoi(toks[0].substr(5));
  int cols = std::stoi(toks[1].substr(5));
  Field f = detail::parse_field_token(toks[2]);
  return RectMatrix(f, detail::read_entries(is, rows, cols));
}

inline SymMatrix read_sym_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_sym_csv(in);
}

inline RectMatrix read_rect_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_rect_csv(in);
}

}  // namespace psdc
