#pragma once

// Application suites: Wishart bounds, projective-design subsampling plans,
// sample covariance sizing (four-moment and sparse), sparse subspace
// injection sketches.

#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "psdc/compare.hpp"
#include "psdc/gaussian.hpp"
#include "psdc/matrix.hpp"
#include "psdc/rng.hpp"

namespace psdc {

// ---------------------------------------------------------------------------
// Wishart
// ---------------------------------------------------------------------------

struct WishartReport {
  BoundReport report;
  GaussianModel model;
  double rescaled_lb;  // 1 - 2*sqrt(d/n)
};

inline WishartReport wishart_report(int d, long long n) {
  if (d < 1 || n < 1) throw std::invalid_argument("wishart_report: d, n >= 1 required");
  double nd = static_cast<double>(n);
  double sq = std::sqrt(nd);
  GaussianModel model(SymMatrix::identity(Field::real, d).scaled(nd),
                      {ScalarComp{sq}, GoeComp{sq}});
  double elmin = nd - 2.0 * std::sqrt(d * nd);
  BoundReport rep =
      detail::assemble_report(elmin, 0.0, "analytic", 3.0 * nd, false, 2.0 * d);
  return {rep, std::move(model), 1.0 - 2.0 * std::sqrt(d / nd)};
}

// Single-copy statistics: the weak variance blows up to n^2 + 2n and the
// resulting bound is vacuous for every parameter choice.
inline WishartReport wishart_nonexample_report(int d, long long n) {
  if (d < 1 || n < 1)
    throw std::invalid_argument("wishart_nonexample_report: d, n >= 1 required");
  double nd = static_cast<double>(n);
  GaussianModel model(SymMatrix::identity(Field::real, d).scaled(nd),
                      {ScalarComp{nd}, GoeComp{std::sqrt(nd)}});
  double elmin = nd - 2.0 * std::sqrt(d * nd);
  BoundReport rep = detail::assemble_report(elmin, 0.0, "analytic", nd * nd + 2.0 * nd,
                                            false, 2.0 * d);
  return {rep, std::move(model), 1.0 - 2.0 * std::sqrt(d / nd)};
}

// ---------------------------------------------------------------------------
// Projective designs
// ---------------------------------------------------------------------------

struct DesignSystem {
  Field field;
  int d;
  std::vector<CVec> vectors;

  void validate() const {
    if (vectors.empty()) throw std::invalid_argument("DesignSystem: empty system");
    for (const auto& u : vectors) {
      if (u.size() != d) throw std::invalid_argument("DesignSystem: dimension mismatch");
      if (std::abs(u.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("DesignSystem: vectors must be unit norm");
    }
  }
};

struct DesignCheck {
  bool ok;
  double residual;
};

namespace detail {

inline std::vector<SymMatrix> hermitian_basis(int d) {
  std::vector<SymMatrix> basis;
  for (int j = 0; j < d; ++j) {
    CMat m = CMat::Zero(d, d);
    m(j, j) = 1.0;
    basis.push_back(SymMatrix(Field::complex_, std::move(m)));
  }
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      CMat re = CMat::Zero(d, d);
      re(j, k) = 0.5;
      re(k, j) = 0.5;
      basis.push_back(SymMatrix(Field::complex_, std::move(re)));
      CMat im = CMat::Zero(d, d);
      im(j, k) = std::complex<double>(0.0, 0.5);
      im(k, j) = std::complex<double>(0.0, -0.5);
      basis.push_back(SymMatrix(Field::complex_, std::move(im)));
    }
  return basis;
}

inline SymMatrix random_hermitian(int d, CounterRng& rng) {
  CMat m(d, d);
  for (int i = 0; i < d; ++i) {
    m(i, i) = rng.next_normal();
    for (int j = i + 1; j < d; ++j) {
      std::complex<double> z(rng.next_normal(), rng.next_normal());
      m(i, j) = z;
      m(j, i) = std::conj(z);
    }
  }
  return SymMatrix(Field::complex_, std::move(m));
}

}  // namespace detail

// Accepts non-unit systems on purpose: a rescaled system is a well-posed
// query that simply fails the residual test.
inline DesignCheck check_design(const DesignSystem& sys, int order, double tol) {
  if (sys.vectors.empty()) throw std::invalid_argument("check_design: empty system");
  for (const auto& u : sys.vectors)
    if (u.size() != sys.d) throw std::invalid_argument("check_design: dimension mismatch");
  int d = sys.d;
  double n = static_cast<double>(sys.vectors.size());
  if (order == 1) {
    CMat acc = CMat::Zero(d, d);
    for (const auto& u : sys.vectors) acc += u * u.adjoint();
    acc /= n;
    double residual = (acc - CMat::Identity(d, d) / static_cast<double>(d)).norm();
    return {residual <= tol, residual};
  }
  if (order != 2) throw std::invalid_argument("check_design: order must be 1 or 2");
  std::vector<SymMatrix> probes;
  if (d <= 30) {
    probes = detail::hermitian_basis(d);
  } else {
    CounterRng rng(subkey(0x64657332ull, 0));
    for (int i = 0; i < 200; ++i) probes.push_back(detail::random_hermitian(d, rng));
  }
  double worst = 0.0;
  for (const auto& m : probes) {
    double empirical = 0.0;
    for (const auto& u : sys.vectors) {
      double inner = (u.adjoint() * m.entries() * u).value().real();
      empirical += inner * inner;
    }
    empirical /= n;
    double fro2 = m.frobenius_norm() * m.frobenius_norm();
    double tr = m.trace();
    double target = (fro2 + tr * tr) / (d * (d + 1.0));
    worst = std::max(worst, std::abs(empirical - target));
  }
  return {worst <= tol, worst};
}

struct DesignPlan {
  int order;
  int d;
  double delta;
  double s;  // required subsample size (real; ceil before use)

  // order 1: residual failure probability at oversampling beta.
  double fail_prob(double beta) const { return d * std::exp(-beta); }
  // order 2: lower-tail bound at oversampling beta and deviation t.
  double tail(double beta, double t) const {
    return d * std::exp(-t * t * d / (4.0 * beta));
  }
  double elmin_lb(double beta) const { return beta - 2.0 * std::sqrt(beta); }
  double sigma_star2_ub(double beta) const { return 2.0 * beta / d; }
};

inline DesignPlan design_sampling_plan(int d, double delta, int order) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("design_sampling_plan: delta in (0,1) required");
  if (order != 1 && order != 2)
    throw std::invalid_argument("design_sampling_plan: order must be 1 or 2");
  double s;
  if (order == 1) {
    s = d * std::log(d / delta);
  } else {
    double root = std::sqrt(static_cast<double>(d)) + std::sqrt(std::log(d / delta));
    s = 4.0 * root * root;
  }
  return {order, d, delta, s};
}

// ---------------------------------------------------------------------------
// Sample covariance
// ---------------------------------------------------------------------------

struct CovarianceProblem {
  int d;
  double epsilon;
  double delta;
  std::optional<double> beta;  // fourth-to-second moment ratio
  std::optional<double> zeta;  // expected sparsity
  double C = 1.0;              // fourth moment of the entry distribution

  void validate() const {
    if (d < 1) throw std::invalid_argument("CovarianceProblem: d >= 1 required");
    if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0))
      throw std::invalid_argument("CovarianceProblem: epsilon, delta in (0,1) required");
    if (beta && *beta < 1.0) throw std::invalid_argument("CovarianceProblem: beta >= 1");
    if (zeta && (*zeta <= 0.0 || *zeta > d))
      throw std::invalid_argument("CovarianceProblem: zeta in (0, d] required");
    if (C < 1.0) throw std::invalid_argument("CovarianceProblem: C >= 1 required");
  }
};

struct ScovPlan {
  long long n;
  double norm_bound;      // sqrt(12 beta^2 d)
  double sigma_star2_ub;  // beta^2
};

inline ScovPlan scov_sample_size(const CovarianceProblem& p) {
  p.validate();
  if (!p.beta) throw std::invalid_argument("scov_sample_size: beta-mode problem required");
  double b2 = *p.beta * *p.beta;
  double lead = std::max(static_cast<double>(p.d), std::log(2.0 * p.d / p.delta));
  double n = 24.0 * b2 * lead / (p.epsilon * p.epsilon);
  return {static_cast<long long>(std::ceil(n)), std::sqrt(12.0 * b2 * p.d), b2};
}

struct SparseCovReport {
  long long required_n;
  GaussianModel model;  // comparison model scaled by 1/sqrt(n)
  BoundReport report;
  double zeta;
  double C;
};

// Closed-form second moment function of the sparse-vector covariance summand.
inline double sparse_cov_mom(const SymMatrix& m, double C, double zeta) {
  const CMat& e = m.entries();
  int d = m.dim();
  double acc = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j)
        acc += 2.0 * std::norm(e(i, j)) + e(i, i).real() * e(j, j).real();
  double diag2 = 0.0;
  for (int i = 0; i < d; ++i) diag2 += e(i, i).real() * e(i, i).real();
  return acc + (C * d / zeta) * diag2;
}

inline SparseCovReport sparse_cov_report(const CovarianceProblem& p,
                                         long long n_override = 0) {
  p.validate();
  if (!p.zeta) throw std::invalid_argument("sparse_cov_report: zeta-mode problem required");
  double zeta = *p.zeta;
  double d = p.d;
  double lead = std::max(1.0, 2.0 * p.C / zeta * std::log(2.0 * d / p.delta));
  long long required_n =
      static_cast<long long>(std::ceil(25.0 * d * lead / (p.epsilon * p.epsilon)));
  long long n = n_override > 0 ? n_override : required_n;
  double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  double diag_coeff = std::sqrt(p.C * d / zeta) * inv_sqrt_n;
  GaussianModel model(SymMatrix::identity(Field::real, p.d),
                      {GoeComp{inv_sqrt_n}, ScalarComp{inv_sqrt_n}, DiagonalComp{diag_coeff}});
  double elmin_lb = 1.0 - 2.0 * std::sqrt(d / n) -
                    std::sqrt(2.0 * p.C * d * std::log(d) / (zeta * n));
  double sigma_star2_ub = (3.0 + p.C * d / zeta) / n;
  BoundReport rep =
      detail::assemble_report(elmin_lb, 0.0, "analytic", sigma_star2_ub, false, 2.0 * d);
  return {required_n, std::move(model), rep, zeta, p.C};
}

// ---------------------------------------------------------------------------
// Sparse subspace injection
// ---------------------------------------------------------------------------

inline double coherence(const RectMatrix& q) {
  if (!detail::columns_orthonormal(q))
    throw std::invalid_argument("coherence: columns must be orthonormal");
  double mu = 0.0;
  for (int i = 0; i < q.rows(); ++i) mu = std::max(mu, q.entries().row(i).squaredNorm());
  double lo = static_cast<double>(q.cols()) / q.rows();
  if (mu < lo - 1e-8 || mu > 1.0 + 1e-8)
    throw std::runtime_error("coherence: result escaped [d/n, 1]");
  return std::min(1.0, std::max(lo, mu));
}

struct SketchParams {
  long long k;
  double zeta;
};

inline SketchParams sketch_params(int d, double mu, double epsilon, double delta) {
  if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("sketch_params: mu in (0,1]");
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("sketch_params: epsilon, delta in (0,1)");
  double logterm = std::log(2.0 * d / delta);
  double k = std::ceil(16.0 * std::max(static_cast<double>(d), 6.0 * logterm) /
                       (epsilon * epsilon));
  double zeta = 32.0 * mu * logterm / (epsilon * epsilon);
  if (zeta > k)
    throw std::invalid_argument(
        "sketch_params: zeta formula exceeds k; increase epsilon or reduce coherence");
  return {static_cast<long long>(k), zeta};
}

struct SparseSketch {
  long long k;
  long long n;
  double zeta;
  std::uint64_t seed;
  // Column-grouped triplets: cols[j] lists (row, value) with value = ±1/sqrt(zeta).
  std::vector<std::vector<std::pair<int, double>>> cols;
};

inline SparseSketch make_sketch(long long k, long long n, double zeta, std::uint64_t seed) {
  if (!(zeta > 0.0 && zeta <= static_cast<double>(k)))
    throw std::invalid_argument("make_sketch: zeta in (0, k] required");
  SparseSketch s{k, n, zeta, seed, {}};
  s.cols.resize(n);
  double p = zeta / k;
  double value = 1.0 / std::sqrt(zeta);
  for (long long j = 0; j < n; ++j) {
    CounterRng rng(subkey(seed, static_cast<std::uint64_t>(j)));
    for (long long i = 0; i < k; ++i) {
      if (rng.next_uniform() < p) {
        double sign = rng.next_uniform() < 0.5 ? -1.0 : 1.0;
        s.cols[j].emplace_back(static_cast<int>(i), sign * value);
      }
    }
  }
  return s;
}

inline RectMatrix apply_sketch(const SparseSketch& s, const RectMatrix& q) {
  if (q.rows() != s.n) throw std::invalid_argument("apply_sketch: shape mismatch");
  CMat out = CMat::Zero(s.k, q.cols());
  for (long long j = 0; j < s.n; ++j)
    for (const auto& [row, value] : s.cols[j]) out.row(row) += value * q.entries().row(j);
  return RectMatrix(q.field(), std::move(out));
}

inline double injection_lmin(const RectMatrix& q, const SparseSketch& s) {
  RectMatrix sq = apply_sketch(s, q);
  CMat gram = sq.entries().adjoint() * sq.entries();
  return lambda_min(SymMatrix(q.field(), std::move(gram)));
}

struct InjectionModelReport {
  GaussianModel model;
  double mu;
  double elmin_lb;             // 1 - 2 sqrt(d/k) - sqrt(2 mu log(d) / zeta)
  double sigma_star2_ub;       // 3/k + mu/zeta
  double compdiag_sigma2_ub;   // sigma^2 of the compressed diagonal part <= mu
  double compdiag_khinchin;    // sqrt(2 mu log d)
};

inline InjectionModelReport injection_model(const RectMatrix& q, long long k, double zeta) {
  double mu = coherence(q);
  int d = q.cols();
  double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(k));
  // The diagonal compression enters the model as zeta^{-1/2} q^T D_n q.  The
  // compressed-diagonal law is quadratic in the stored rows, so the stored
  // matrix carries a zeta^{-1/4} factor.
  double row_scale = std::pow(zeta, -0.25);
  GaussianModel model(
      SymMatrix::identity(q.field(), d),
      {GoeComp{inv_sqrt_k}, ScalarComp{inv_sqrt_k},
       CompressedDiagonalComp{RectMatrix(q.field(), row_scale * q.entries())}});
  double elmin_lb = 1.0 - 2.0 * std::sqrt(static_cast<double>(d) / k) -
                    std::sqrt(2.0 * mu * std::log(static_cast<double>(d)) / zeta);
  return {std::move(model), mu,       elmin_lb, 3.0 / k + mu / zeta,
          mu,               std::sqrt(2.0 * mu * std::log(static_cast<double>(d)))};
}

// Rule-of-thumb parameters without a certified failure bound.
struct PracticalPreset {
  long long k;
  double zeta;
  const char* label = "uncertified";
};

inline PracticalPreset practical_preset(int d) { return {2LL * d, 8.0}; }

}  // namespace psdc
