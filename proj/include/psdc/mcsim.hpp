#pragma once

// Monte Carlo and exact-enumeration verification of the comparison
// inequalities: trace-mgf and polynomial-moment comparisons, tail bounds, the
// completely monotone covariance lemma, Poissonization, and figure data.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "psdc/apps.hpp"
#include "psdc/compare.hpp"
#include "psdc/csv.hpp"
#include "psdc/gaussian.hpp"
#include "psdc/util.hpp"

namespace psdc {

// ---------------------------------------------------------------------------
// Numeric kernels
// ---------------------------------------------------------------------------

// Tr exp(-theta * m) via eigenvalues with max-shifted accumulation, so large
// arguments stay finite as long as the result itself is representable.
inline double trace_exp_neg(const SymMatrix& m, double theta) {
  auto ev = sym_eigvals(m);
  double shift = -theta * ev.front();
  for (double l : ev) shift = std::max(shift, -theta * l);
  long double acc = 0.0L;
  for (double l : ev) acc += std::exp(static_cast<long double>(-theta * l - shift));
  return static_cast<double>(std::exp(static_cast<long double>(shift)) * acc);
}

// Tr of the p-th power of the negative part.
inline double trace_neg_pow(const SymMatrix& m, int p) {
  long double acc = 0.0L;
  for (double l : sym_eigvals(m))
    if (l < 0.0) acc += std::pow(static_cast<long double>(-l), p);
  return static_cast<double>(acc);
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

struct Scenario {
  std::string name;
  int dim;
  std::function<SymMatrix(std::uint64_t)> sample_y;  // one psd-sum draw per seed
  GaussianModel z;                                   // centered comparison model
  SymMatrix mean_y;                                  // closed-form E Y
  double sigma_star2;                                // analytic (upper bound)
  double dim_factor;                                 // d or 2d
  int mgf_factor;                                    // 1 (weighted) or 2 (iid)
};

namespace detail {

inline SymMatrix random_psd(int d, std::uint64_t key) {
  CounterRng rng(key);
  CMat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.next_normal();
  return SymMatrix(Field::real, (g * g.adjoint() / static_cast<double>(d)).eval());
}

}  // namespace detail

// Fixed psd matrices with iid Bernoulli(p) weights (weighted theorem, factor 1).
inline Scenario scenario_bernoulli_weighted(int d, int n, double p,
                                            std::uint64_t matrix_seed) {
  std::vector<SymMatrix> a;
  for (int i = 0; i < n; ++i) a.push_back(detail::random_psd(d, subkey(matrix_seed, i)));
  MomentSpec spec;
  for (int i = 0; i < n; ++i) spec.entries.push_back({p, p});
  spec.matrices = a;
  GaussianModel z_full = weighted_model(spec);
  GaussianModel z_centered(SymMatrix::zero(Field::real, d), z_full.components());
  SymMatrix mean = z_full.shift();
  auto s2 = weighted_sigma_star2_full(spec);
  auto sampler = [a, p, n](std::uint64_t seed) {
    CounterRng rng(seed);
    CMat acc = CMat::Zero(a.front().dim(), a.front().dim());
    for (int i = 0; i < n; ++i)
      if (rng.next_uniform() < p) acc += a[i].entries();
    return SymMatrix(Field::real, std::move(acc));
  };
  return {"bernoulli-weighted", d,     sampler, std::move(z_centered), std::move(mean),
          s2.value,             double(d), 1};
}

// Y = sum of n rank-one standard Gaussian outer products (iid theorem, factor 2).
inline Scenario scenario_wishart(int d, int n) {
  double nd = static_cast<double>(n);
  double sq = std::sqrt(nd);
  GaussianModel z(SymMatrix::zero(Field::real, d), {ScalarComp{sq}, GoeComp{sq}});
  auto sampler = [d, n](std::uint64_t seed) {
    CounterRng rng(seed);
    CMat acc = CMat::Zero(d, d);
    CVec g(d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) g(j) = rng.next_normal();
      acc += g * g.adjoint();
    }
    return SymMatrix(Field::real, std::move(acc));
  };
  return {"wishart", d, sampler, std::move(z), SymMatrix::identity(Field::real, d).scaled(nd),
          3.0 * nd,  2.0 * d, 2};
}

// Bernoulli subsampling of a projective 2-design at oversampling beta
// (weighted theorem, factor 1).
inline Scenario scenario_design2(const DesignSystem& sys, double beta) {
  sys.validate();
  int d = sys.d;
  int n = static_cast<int>(sys.vectors.size());
  double p = beta * d / n;
  if (p > 1.0) throw std::invalid_argument("scenario_design2: beta too large for system");
  RankOneSeriesComp series;
  for (const auto& u : sys.vectors) {
    series.w.push_back(p);
    series.u.push_back(u);
  }
  GaussianModel z(SymMatrix::zero(Field::complex_, d), {std::move(series)});
  auto vectors = sys.vectors;
  auto sampler = [vectors, p, d](std::uint64_t seed) {
    CounterRng rng(seed);
    CMat acc = CMat::Zero(d, d);
    for (const auto& u : vectors)
      if (rng.next_uniform() < p) acc += u * u.adjoint();
    return SymMatrix(Field::complex_, std::move(acc));
  };
  return {"design2", d, sampler, std::move(z),
          SymMatrix::identity(Field::complex_, d).scaled(beta), 2.0 * beta / d,
          double(d), 1};
}

// Empirical covariance of sparse sign vectors (iid theorem, factor 2).
inline Scenario scenario_sparse_cov(int d, double zeta, int n) {
  double p = zeta / d;
  double amp = std::sqrt(d / zeta);
  double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  const double C = 1.0;  // fourth moment of the +/-1 entry distribution
  GaussianModel z(SymMatrix::zero(Field::real, d),
                  {GoeComp{inv_sqrt_n}, ScalarComp{inv_sqrt_n},
                   DiagonalComp{std::sqrt(C * d / zeta) * inv_sqrt_n}});
  auto sampler = [d, n, p, amp](std::uint64_t seed) {
    CounterRng rng(seed);
    CMat acc = CMat::Zero(d, d);
    CVec w(d);
    for (int t = 0; t < n; ++t) {
      for (int j = 0; j < d; ++j) {
        if (rng.next_uniform() < p)
          w(j) = rng.next_uniform() < 0.5 ? -amp : amp;
        else
          w(j) = 0.0;
      }
      acc += w * w.adjoint();
    }
    acc /= static_cast<double>(n);
    return SymMatrix(Field::real, std::move(acc));
  };
  return {"sparse-cov", d, sampler, std::move(z), SymMatrix::identity(Field::real, d),
          (3.0 + C * d / zeta) / n, 2.0 * d, 2};
}

// Gram matrix of a sparse sketch applied to orthonormal Q (iid theorem, factor 2).
inline Scenario scenario_sketch_gram(const RectMatrix& q, long long k, double zeta) {
  auto inj = injection_model(q, k, zeta);
  int d = q.cols();
  GaussianModel z(SymMatrix::zero(q.field(), d), inj.model.components());
  RectMatrix qc = q;
  auto sampler = [qc, k, zeta](std::uint64_t seed) {
    SparseSketch s = make_sketch(k, qc.rows(), zeta, seed);
    RectMatrix sq = apply_sketch(s, qc);
    CMat gram = sq.entries().adjoint() * sq.entries();
    return SymMatrix(qc.field(), std::move(gram));
  };
  return {"sketch-gram", d, sampler, std::move(z), SymMatrix::identity(q.field(), d),
          inj.sigma_star2_ub, 2.0 * d, 2};
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct VerificationRow {
  double grid_value;
  double lhs;
  double lhs_se;
  double rhs;
  double rhs_se;
  double bound;  // acceptance threshold for lhs
  bool pass;
};

struct VerificationReport {
  std::string name;
  std::string slack_policy;
  std::vector<VerificationRow> rows;

  bool pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }

  static const std::vector<std::string>& csv_schema() {
    static const std::vector<std::string> s = {"grid_value", "lhs",   "lhs_se", "rhs",
                                               "rhs_se",     "bound", "pass"};
    return s;
  }

  std::vector<std::vector<std::string>> csv_rows() const {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows)
      out.push_back({csv_num(r.grid_value), csv_num(r.lhs), csv_num(r.lhs_se),
                     csv_num(r.rhs), csv_num(r.rhs_se), csv_num(r.bound),
                     r.pass ? "1" : "0"});
    return out;
  }
};

namespace detail {

// Per-trial evaluation sharded across workers; each slot is a pure function
// of the trial index, so the result is independent of the worker count.
inline void for_each_trial(std::size_t n, const std::function<void(std::size_t)>& fn) {
  int workers = worker_count();
  if (workers <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

constexpr std::uint64_t kSaltY = 0x59a1b2c3d4e5f607ull;
constexpr std::uint64_t kSaltZ = 0x5a0f1e2d3c4b5a69ull;

}  // namespace detail

// ---------------------------------------------------------------------------
// Verifiers
// ---------------------------------------------------------------------------

namespace detail {

// Shared core for trace-mgf and polynomial-moment comparisons: evaluate a
// spectral statistic of (Y - EY + delta) and factor * the same statistic of
// (Z + delta) over a grid.
inline VerificationReport compare_statistic(
    const Scenario& sc, const std::vector<double>& grid, std::size_t trials,
    std::uint64_t seed, int factor, const std::optional<SymMatrix>& delta_opt,
    const std::function<double(const SymMatrix&, double)>& statistic,
    const std::string& name) {
  if (trials < 2) throw std::invalid_argument(name + ": trials >= 2 required");
  SymMatrix delta = delta_opt.value_or(sc.mean_y);
  SymMatrix center = delta - sc.mean_y;  // added to Y; Z gets delta itself
  std::size_t g = grid.size();
  std::vector<std::vector<double>> ly(g, std::vector<double>(trials));
  std::vector<std::vector<double>> lz(g, std::vector<double>(trials));
  for_each_trial(trials, [&](std::size_t t) {
    SymMatrix y = sc.sample_y(subkey(seed ^ kSaltY, t)) + center;
    SymMatrix z = sample(sc.z, subkey(seed ^ kSaltZ, t)) + delta;
    for (std::size_t i = 0; i < g; ++i) {
      ly[i][t] = statistic(y, grid[i]);
      lz[i][t] = statistic(z, grid[i]);
    }
  });
  VerificationReport rep{name, "lhs <= rhs + 3*sqrt(se_lhs^2 + se_rhs^2)", {}};
  for (std::size_t i = 0; i < g; ++i) {
    auto my = mean_stderr(ly[i]);
    auto mz = mean_stderr(lz[i]);
    double rhs = factor * mz.mean;
    double rhs_se = factor * mz.stderr_;
    double bound = rhs + 3.0 * std::sqrt(my.stderr_ * my.stderr_ + rhs_se * rhs_se);
    rep.rows.push_back(
        {grid[i], my.mean, my.stderr_, rhs, rhs_se, bound, my.mean <= bound});
  }
  return rep;
}

}  // namespace detail

inline VerificationReport verify_trace_mgf(const Scenario& sc,
                                           const std::vector<double>& theta_grid,
                                           std::size_t trials, std::uint64_t seed,
                                           int factor,
                                           std::optional<SymMatrix> delta = std::nullopt) {
  for (double th : theta_grid)
    if (th < 0) throw std::invalid_argument("verify_trace_mgf: theta >= 0 required");
  return detail::compare_statistic(
      sc, theta_grid, trials, seed, factor, delta,
      [](const SymMatrix& m, double th) { return trace_exp_neg(m, th); },
      "trace-mgf:" + sc.name);
}

inline VerificationReport verify_poly_moment(const Scenario& sc,
                                             const std::vector<int>& p_grid,
                                             std::size_t trials, std::uint64_t seed,
                                             int factor,
                                             std::optional<SymMatrix> delta = std::nullopt) {
  for (int p : p_grid)
    if (p < 4) throw std::invalid_argument("verify_poly_moment: p >= 4 required");
  std::vector<double> grid(p_grid.begin(), p_grid.end());
  return detail::compare_statistic(
      sc, grid, trials, seed, factor, delta,
      [](const SymMatrix& m, double p) { return trace_neg_pow(m, static_cast<int>(p)); },
      "poly-moment:" + sc.name);
}

inline VerificationReport verify_tail(const Scenario& sc, const std::vector<double>& t_grid,
                                      std::size_t trials, std::uint64_t seed,
                                      std::optional<SymMatrix> delta_opt = std::nullopt) {
  for (double t : t_grid)
    if (t < 0) throw std::invalid_argument("verify_tail: t >= 0 required");
  SymMatrix delta = delta_opt.value_or(sc.mean_y);
  SymMatrix center = delta - sc.mean_y;
  GaussianModel z_shifted(sc.z.shift() + delta, sc.z.components());
  auto elmin = mc_expected_lmin(z_shifted, trials, seed ^ detail::kSaltZ);
  auto lmins = parallel_map(trials, [&](std::size_t t) {
    return lambda_min(sc.sample_y(subkey(seed ^ detail::kSaltY, t)) + center);
  });
  VerificationReport rep{
      "tail:" + sc.name,
      "freq at threshold (elmin_mc - 3*se) - t; pass iff freq <= bound + 3*binom_se", {}};
  for (double t : t_grid) {
    double threshold = (elmin.mean - 3.0 * elmin.stderr_) - t;
    std::size_t count = 0;
    for (double l : lmins)
      if (l <= threshold) ++count;
    double freq = static_cast<double>(count) / trials;
    double binom_se = std::sqrt(std::max(freq * (1.0 - freq), 1.0 / trials) / trials);
    double bound =
        std::min(1.0, sc.dim_factor * std::exp(-t * t / (2.0 * sc.sigma_star2)));
    double accept = bound + 3.0 * binom_se;
    rep.rows.push_back({t, freq, binom_se, bound, 0.0, accept, freq <= accept});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Covariance lemma for completely monotone f
// ---------------------------------------------------------------------------

struct DeterministicW {
  double c;
};
struct BernoulliW {
  double p;
};
struct TwoPointW {
  double x1;
  double p1;
  double x2;
};
struct Uniform01W {};
struct ExponentialW {
  double rate = 1.0;
};
// Square of a standard normal.
struct ChiSq1W {};
using WeightDist =
    std::variant<DeterministicW, BernoulliW, TwoPointW, Uniform01W, ExponentialW, ChiSq1W>;

namespace detail {

inline std::optional<std::vector<std::pair<double, double>>> atoms(const WeightDist& d) {
  if (auto* det = std::get_if<DeterministicW>(&d))
    return std::vector<std::pair<double, double>>{{det->c, 1.0}};
  if (auto* b = std::get_if<BernoulliW>(&d))
    return std::vector<std::pair<double, double>>{{0.0, 1.0 - b->p}, {1.0, b->p}};
  if (auto* t = std::get_if<TwoPointW>(&d))
    return std::vector<std::pair<double, double>>{{t->x1, t->p1}, {t->x2, 1.0 - t->p1}};
  return std::nullopt;
}

inline double draw_weight(const WeightDist& d, CounterRng& rng) {
  if (auto* det = std::get_if<DeterministicW>(&d)) return det->c;
  if (auto* b = std::get_if<BernoulliW>(&d)) return rng.next_uniform() < b->p ? 1.0 : 0.0;
  if (auto* t = std::get_if<TwoPointW>(&d))
    return rng.next_uniform() < t->p1 ? t->x1 : t->x2;
  if (std::get_if<Uniform01W>(&d)) return rng.next_uniform();
  if (auto* e = std::get_if<ExponentialW>(&d)) return -std::log(rng.next_uniform()) / e->rate;
  double g = rng.next_normal();
  return g * g;
}

}  // namespace detail

// Checks Cov(W, f'(W)) <= E[W^2] * E[f''(W)] for f(w) = e^{b - theta w}.
// Discrete distributions enumerate exactly; continuous ones use MC with a
// linearized 3-sigma slack.
inline VerificationReport covcm_check(const WeightDist& dist,
                                      const std::vector<double>& theta_grid,
                                      const std::vector<double>& b_grid, std::size_t trials,
                                      std::uint64_t seed) {
  auto atoms = detail::atoms(dist);
  VerificationReport rep{"covcm",
                         atoms ? "exact enumeration, slack 1e-12 * scale"
                               : "linearized difference, pass iff mean <= 3*se",
                         {}};
  if (atoms) {
    for (double b : b_grid)
      for (double th : theta_grid) {
        double ew = 0, ew2 = 0, efp = 0, ewfp = 0, efpp = 0;
        for (auto [x, p] : *atoms) {
          double fp = -th * std::exp(b - th * x);
          double fpp = th * th * std::exp(b - th * x);
          ew += p * x;
          ew2 += p * x * x;
          efp += p * fp;
          ewfp += p * x * fp;
          efpp += p * fpp;
        }
        double lhs = ewfp - ew * efp;
        double rhs = ew2 * efpp;
        double slack = 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
        rep.rows.push_back({th, lhs, 0.0, rhs, 0.0, rhs + slack, lhs <= rhs + slack});
      }
    return rep;
  }
  if (trials < 2) throw std::invalid_argument("covcm_check: trials >= 2 required");
  std::vector<double> w(trials);
  detail::for_each_trial(trials, [&](std::size_t t) {
    CounterRng rng(subkey(seed, t));
    w[t] = detail::draw_weight(dist, rng);
  });
  for (double b : b_grid)
    for (double th : theta_grid) {
      double mw = 0, mw2 = 0, mfp = 0, mfpp = 0, mwfp = 0;
      std::vector<double> fp(trials), fpp(trials);
      for (std::size_t t = 0; t < trials; ++t) {
        fp[t] = -th * std::exp(b - th * w[t]);
        fpp[t] = th * th * std::exp(b - th * w[t]);
        mw += w[t];
        mw2 += w[t] * w[t];
        mfp += fp[t];
        mfpp += fpp[t];
        mwfp += w[t] * fp[t];
      }
      mw /= trials;
      mw2 /= trials;
      mfp /= trials;
      mfpp /= trials;
      mwfp /= trials;
      // Linearized per-trial difference lhs_t - rhs_t around the plug-in means.
      std::vector<double> diff(trials);
      for (std::size_t t = 0; t < trials; ++t) {
        double lhs_t = w[t] * fp[t] - mw * fp[t] - mfp * w[t] + mw * mfp;
        double rhs_t = mw2 * fpp[t] + mfpp * w[t] * w[t] - mw2 * mfpp;
        diff[t] = lhs_t - rhs_t;
      }
      auto ms = mean_stderr(diff);
      double lhs = mwfp - mw * mfp;
      double rhs = mw2 * mfpp;
      rep.rows.push_back(
          {th, lhs, ms.stderr_, rhs, 0.0, rhs + 3.0 * ms.stderr_, ms.mean <= 3.0 * ms.stderr_});
    }
  return rep;
}

// ---------------------------------------------------------------------------
// Poissonization
// ---------------------------------------------------------------------------

// Exact check of the multinomial-vs-Poisson trace-exponential comparison on
// tiny instances: lhs enumerates all n^k placements, rhs enumerates the iid
// Poisson counts truncated where the residual mass is negligible.
inline VerificationReport poissonization_check(const std::vector<SymMatrix>& a_list, int k,
                                               const std::vector<double>& theta_grid,
                                               double truncation = 1e-12) {
  int n = static_cast<int>(a_list.size());
  if (n < 1 || k < 1) throw std::invalid_argument("poissonization_check: need n, k >= 1");
  double placements = std::pow(static_cast<double>(n), k);
  if (placements > 256.0)
    throw std::invalid_argument("poissonization_check: n^k must be <= 256");
  int d = a_list.front().dim();
  for (const auto& a : a_list)
    if (lambda_min(a) < -1e-10 * std::max(1.0, a.frobenius_norm()))
      throw std::invalid_argument("poissonization_check: non-psd input");

  double lambda = static_cast<double>(k) / n;
  CMat mean = CMat::Zero(d, d);
  for (const auto& a : a_list) mean += lambda * a.entries();

  // Per-coordinate truncation point: keep mass 1 - truncation/10.
  int qmax = 0;
  {
    double pmf = std::exp(-lambda);
    double cum = pmf;
    while (1.0 - cum > truncation / 10.0) {
      ++qmax;
      pmf *= lambda / qmax;
      cum += pmf;
    }
  }
  std::vector<double> pois_pmf(qmax + 1);
  {
    double pmf = std::exp(-lambda);
    for (int q = 0; q <= qmax; ++q) {
      pois_pmf[q] = pmf;
      pmf *= lambda / (q + 1);
    }
  }

  VerificationReport rep{"poissonization", "exact; pass iff lhs <= 2*rhs*(1+1e-12)", {}};
  for (double th : theta_grid) {
    // lhs: uniform average over all placements of k balls into n bins.
    long double lhs_acc = 0.0L;
    std::vector<int> idx(k, 0);
    long long total = static_cast<long long>(placements + 0.5);
    for (long long code = 0; code < total; ++code) {
      long long c = code;
      CMat sum = CMat::Zero(d, d);
      for (int j = 0; j < k; ++j) {
        sum += a_list[c % n].entries();
        c /= n;
      }
      lhs_acc += trace_exp_neg(SymMatrix(a_list.front().field(), sum - mean), th);
    }
    double lhs = static_cast<double>(lhs_acc / total);

    // rhs: expectation over iid truncated Poisson counts.
    long double rhs_acc = 0.0L;
    std::vector<int> q(n, 0);
    bool done = false;
    while (!done) {
      long double prob = 1.0L;
      CMat sum = CMat::Zero(d, d);
      for (int i = 0; i < n; ++i) {
        prob *= pois_pmf[q[i]];
        if (q[i]) sum += static_cast<double>(q[i]) * a_list[i].entries();
      }
      rhs_acc +=
          prob * trace_exp_neg(SymMatrix(a_list.front().field(), sum - mean), th);
      int pos = 0;
      while (pos < n) {
        if (++q[pos] <= qmax) break;
        q[pos] = 0;
        ++pos;
      }
      done = pos == n;
    }
    double rhs = static_cast<double>(rhs_acc);
    double bound = 2.0 * rhs * (1.0 + 1e-12);
    rep.rows.push_back({th, lhs, 0.0, rhs, 0.0, bound, lhs <= bound});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Figure data
// ---------------------------------------------------------------------------

namespace detail {

inline std::pair<double, double> weight_moments(const WeightDist& d) {
  if (auto a = atoms(d)) {
    double m1 = 0, m2 = 0;
    for (auto [x, p] : *a) {
      m1 += p * x;
      m2 += p * x * x;
    }
    return {m1, m2};
  }
  if (std::get_if<Uniform01W>(&d)) return {0.5, 1.0 / 3.0};
  if (auto* e = std::get_if<ExponentialW>(&d))
    return {1.0 / e->rate, 2.0 / (e->rate * e->rate)};
  return {1.0, 3.0};  // chi-square with one degree of freedom
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double scalar_tail_curve(double x, double mean, double l2) {
  if (x >= mean) return 1.0;
  if (l2 <= 0.0) return 0.0;
  double t = mean - x;
  return std::exp(-t * t / (2.0 * l2));
}

}  // namespace detail

struct FigureParams {
  WeightDist w1 = BernoulliW{0.5};
  WeightDist w2 = BernoulliW{0.5};  // used by sum2x2 only
  int n = 20;
};

// Emits cumulative-distribution data for a positive scalar sum (sum1d) or the
// minimum coordinate of a 2x2 diagonal sum (sum2x2), with the matching
// Gaussian CDF and the lower-tail bound curve.
inline std::vector<std::string> emit_figure_data(const std::string& kind,
                                                 const FigureParams& params,
                                                 std::size_t trials, std::uint64_t seed,
                                                 std::ostream& out) {
  if (trials < 2) throw std::invalid_argument("emit_figure_data: trials >= 2 required");
  const int grid_points = 201;
  auto [m1a, m2a] = detail::weight_moments(params.w1);
  double mean1 = params.n * m1a;
  double l21 = params.n * m2a;
  auto ecdf = [](const std::vector<double>& sorted, double x) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) / sorted.size();
  };
  if (kind == "sum1d") {
    std::vector<double> ys(trials);
    detail::for_each_trial(trials, [&](std::size_t t) {
      CounterRng rng(subkey(seed, t));
      double acc = 0.0;
      for (int i = 0; i < params.n; ++i) acc += detail::draw_weight(params.w1, rng);
      ys[t] = acc;
    });
    std::sort(ys.begin(), ys.end());
    double lo = ys.front() - 1e-9, hi = ys.back() + 1e-9;
    std::vector<std::string> schema = {"x", "ecdf_y", "gauss_cdf", "tail_bound"};
    std::vector<std::vector<std::string>> rows;
    double sd = std::sqrt(std::max(l21, 1e-300));
    for (int i = 0; i < grid_points; ++i) {
      double x = lo + (hi - lo) * i / (grid_points - 1);
      rows.push_back({csv_num(x), csv_num(ecdf(ys, x)),
                      csv_num(detail::normal_cdf((x - mean1) / sd)),
                      csv_num(detail::scalar_tail_curve(x, mean1, l21))});
    }
    write_csv(out, schema, rows);
    return schema;
  }
  if (kind != "sum2x2") throw std::invalid_argument("emit_figure_data: unknown kind");
  auto [m1b, m2b] = detail::weight_moments(params.w2);
  double mean2 = params.n * m1b;
  double l22 = params.n * m2b;
  std::vector<double> y1(trials), y2(trials), ymin(trials);
  detail::for_each_trial(trials, [&](std::size_t t) {
    CounterRng rng(subkey(seed, t));
    double a = 0.0, b = 0.0;
    for (int i = 0; i < params.n; ++i) a += detail::draw_weight(params.w1, rng);
    for (int i = 0; i < params.n; ++i) b += detail::draw_weight(params.w2, rng);
    y1[t] = a;
    y2[t] = b;
    ymin[t] = std::min(a, b);
  });
  std::sort(y1.begin(), y1.end());
  std::sort(y2.begin(), y2.end());
  std::sort(ymin.begin(), ymin.end());
  double lo = ymin.front() - 1e-9;
  double hi = std::max(y1.back(), y2.back()) + 1e-9;
  std::vector<std::string> schema = {"x",          "ecdf_min",   "ecdf_coord1",
                                     "ecdf_coord2", "gauss_cdf1", "gauss_cdf2",
                                     "tail_bound"};
  std::vector<std::vector<std::string>> rows;
  double sd1 = std::sqrt(std::max(l21, 1e-300));
  double sd2 = std::sqrt(std::max(l22, 1e-300));
  double l2max = std::max(l21, l22);
  double meanmin = std::min(mean1, mean2);
  for (int i = 0; i < grid_points; ++i) {
    double x = lo + (hi - lo) * i / (grid_points - 1);
    double bound = std::min(1.0, 2.0 * detail::scalar_tail_curve(x, meanmin, l2max));
    rows.push_back({csv_num(x), csv_num(ecdf(ymin, x)), csv_num(ecdf(y1, x)),
                    csv_num(ecdf(y2, x)), csv_num(detail::normal_cdf((x - mean1) / sd1)),
                    csv_num(detail::normal_cdf((x - mean2) / sd2)), csv_num(bound)});
  }
  write_csv(out, schema, rows);
  return schema;
}

// Positive scalar sum as a 1x1 scenario: Y = sum of n iid weights, compared
// against the matching Gaussian with variance L2 = n E W^2.
inline Scenario scenario_scalar_sum(const WeightDist& dist, int n) {
  auto [m1, m2] = detail::weight_moments(dist);
  double l2 = n * m2;
  GeneralSeriesComp g;
  g.h.push_back(SymMatrix(Field::real, std::sqrt(l2) * CMat::Identity(1, 1)));
  GaussianModel z(SymMatrix::zero(Field::real, 1), {std::move(g)});
  auto sampler = [dist, n](std::uint64_t seed) {
    CounterRng rng(seed);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += detail::draw_weight(dist, rng);
    CMat m(1, 1);
    m(0, 0) = acc;
    return SymMatrix(Field::real, std::move(m));
  };
  return {"scalar-sum", 1,   sampler, std::move(z),
          SymMatrix(Field::real, n * m1 * CMat::Identity(1, 1)), l2, 1.0, 1};
}

}  // namespace psdc
