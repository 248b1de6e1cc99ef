#pragma once

// Bound engines: the weighted and iid comparison theorems, the scalar
// positive-sum tail, and the exponential Paley-Zygmund baseline.

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "psdc/gaussian.hpp"
#include "psdc/matrix.hpp"

namespace psdc {

struct MomentSpec {
  struct Entry {
    double m1;  // E W_i
    double m2;  // E W_i^2
  };
  std::vector<Entry> entries;
  std::vector<SymMatrix> matrices;  // A_i, aligned with entries (may be empty)

  void validate() const {
    for (const auto& e : entries) {
      if (e.m1 < 0 || e.m2 < e.m1 * e.m1)
        throw std::invalid_argument("MomentSpec: need m2 >= m1^2 >= 0");
    }
    if (!matrices.empty() && matrices.size() != entries.size())
      throw std::invalid_argument("MomentSpec: matrix/entry count mismatch");
    for (const auto& a : matrices) {
      if (lambda_min(a) < -1e-10 * std::max(1.0, a.frobenius_norm()))
        throw std::invalid_argument("MomentSpec: matrix coefficient not psd");
    }
  }
};

enum class Certification { caller_asserted, sample_certified };

struct IidSummandSpec {
  SymMatrix mean;                    // E W
  GaussianModel comparison_component;  // shift 0; var_eval dominates Mom[W]
  long long n = 1;
  Certification certification = Certification::caller_asserted;

  void validate() const {
    if (n < 1) throw std::invalid_argument("IidSummandSpec: n >= 1 required");
    if (mean.dim() != comparison_component.dim())
      throw std::invalid_argument("IidSummandSpec: dimension mismatch");
    if (lambda_min(mean) < -1e-10 * std::max(1.0, mean.frobenius_norm()))
      throw std::invalid_argument("IidSummandSpec: mean not psd");
    if (comparison_component.shift().frobenius_norm() > 1e-12)
      throw std::invalid_argument("IidSummandSpec: comparison component must have zero shift");
  }
};

struct McSource {
  std::size_t trials;
  std::uint64_t seed;
};
struct AnalyticSource {
  double value;
};
using ElminSource = std::variant<McSource, AnalyticSource>;

struct BoundReport {
  double elmin_z = 0.0;
  double elmin_stderr = 0.0;
  std::string provenance;  // "mc" or "analytic"
  double sigma_star2 = 0.0;
  bool sigma_star2_exact = false;
  double dim_factor = 1.0;
  double expectation_lb = 0.0;
  double tail_coeff = 1.0;
  double tail_rate = 0.0;  // t -> coeff * exp(-t^2 * rate)

  double tail(double t) const {
    if (t < 0) throw std::invalid_argument("tail: t >= 0 required");
    return tail_coeff * std::exp(-t * t * tail_rate);
  }

  static const std::vector<std::string>& csv_schema() {
    static const std::vector<std::string> s = {
        "elmin_z",       "elmin_stderr", "provenance", "sigma_star2", "sigma_star2_exact",
        "dim_factor",    "expectation_lb", "tail_coeff", "tail_rate"};
    return s;
  }
  std::vector<std::string> csv_row() const;
  std::string kv_text() const;
};

namespace detail {

inline std::string format_sig12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline BoundReport assemble_report(double elmin, double se, std::string provenance,
                                   double sigma_star2, bool exact, double dim_factor) {
  BoundReport r;
  r.elmin_z = elmin;
  r.elmin_stderr = se;
  r.provenance = std::move(provenance);
  r.sigma_star2 = sigma_star2;
  r.sigma_star2_exact = exact;
  r.dim_factor = dim_factor;
  r.expectation_lb = elmin - std::sqrt(2.0 * sigma_star2 * std::log(dim_factor));
  r.tail_coeff = dim_factor;
  r.tail_rate = sigma_star2 > 0 ? 1.0 / (2.0 * sigma_star2)
                                : std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace detail

inline std::vector<std::string> BoundReport::csv_row() const {
  using detail::format_sig12;
  return {format_sig12(elmin_z),       format_sig12(elmin_stderr),
          provenance,                  format_sig12(sigma_star2),
          sigma_star2_exact ? "1" : "0", format_sig12(dim_factor),
          format_sig12(expectation_lb), format_sig12(tail_coeff),
          format_sig12(tail_rate)};
}

inline std::string BoundReport::kv_text() const {
  std::string out;
  const auto& schema = csv_schema();
  auto row = csv_row();
  for (size_t i = 0; i < schema.size(); ++i) out += schema[i] + "=" + row[i] + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Weighted theorem
// ---------------------------------------------------------------------------

// Z with shift sum_i m1_i A_i and series coefficients sqrt(m2_i) A_i; becomes
// a rank-one series when every A_i is rank one.
inline GaussianModel weighted_model(const MomentSpec& spec) {
  spec.validate();
  if (spec.matrices.empty())
    throw std::invalid_argument("weighted_model: matrix coefficients required");
  int d = spec.matrices.front().dim();
  Field f = spec.matrices.front().field();
  CMat shift = CMat::Zero(d, d);
  for (size_t i = 0; i < spec.entries.size(); ++i)
    shift += spec.entries[i].m1 * spec.matrices[i].entries();

  bool all_rank_one = true;
  std::vector<CVec> vecs;
  for (const auto& a : spec.matrices) {
    Eigen::SelfAdjointEigenSolver<CMat> es(a.entries());
    auto ev = es.eigenvalues();
    int top = d - 1;
    double rest = 0.0;
    for (int i = 0; i < d - 1; ++i) rest += std::abs(ev(i));
    if (rest > 1e-10 * std::max(1.0, std::abs(ev(top)))) {
      all_rank_one = false;
      break;
    }
    vecs.push_back(std::sqrt(std::max(0.0, ev(top))) * es.eigenvectors().col(top));
  }

  std::vector<Component> comps;
  if (all_rank_one) {
    RankOneSeriesComp r;
    for (size_t i = 0; i < spec.entries.size(); ++i) {
      r.w.push_back(spec.entries[i].m2);
      r.u.push_back(vecs[i]);
    }
    comps.push_back(std::move(r));
  } else {
    GeneralSeriesComp g;
    for (size_t i = 0; i < spec.entries.size(); ++i)
      g.h.push_back(spec.matrices[i].scaled(std::sqrt(spec.entries[i].m2)));
    comps.push_back(std::move(g));
  }
  return GaussianModel(SymMatrix(f, std::move(shift)), std::move(comps));
}

struct SigmaStar2Result {
  double value;
  bool exact;
};

// max over unit u of sum_i m2_i (u* A_i u)^2; exact closed form when the A_i
// are simultaneously diagonalizable (covers mutually orthogonal rank-one).
inline SigmaStar2Result weighted_sigma_star2_full(const MomentSpec& spec) {
  spec.validate();
  if (spec.matrices.empty())
    throw std::invalid_argument("weighted_sigma_star2: matrix coefficients required");
  int d = spec.matrices.front().dim();

  // Common-eigenbasis route: diagonalize a generic combination and check that
  // it diagonalizes every A_i.
  CounterRng rng(subkey(0x77736967ull, 0));
  CMat combo = CMat::Zero(d, d);
  for (const auto& a : spec.matrices) combo += rng.next_normal() * a.entries();
  combo = ((combo + combo.adjoint()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<CMat> es(combo);
  CMat v = es.eigenvectors();
  bool simultaneous = true;
  std::vector<Eigen::VectorXd> diags;
  for (const auto& a : spec.matrices) {
    CMat rot = v.adjoint() * a.entries() * v;
    double off = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (i != j) off += std::norm(rot(i, j));
    if (std::sqrt(off) > 1e-8 * std::max(1.0, a.frobenius_norm())) {
      simultaneous = false;
      break;
    }
    diags.push_back(rot.diagonal().real());
  }
  if (simultaneous) {
    // In the common basis each term is linear in the occupation profile
    // |u_j|^2, so the (convex) maximum sits at a coordinate vector.
    double best = 0.0;
    for (int j = 0; j < d; ++j) {
      double acc = 0.0;
      for (size_t i = 0; i < spec.entries.size(); ++i)
        acc += spec.entries[i].m2 * diags[i](j) * diags[i](j);
      best = std::max(best, acc);
    }
    return {best, true};
  }
  return {detail::estimate_sigma_star2(weighted_model(spec)), false};
}

inline double weighted_sigma_star2(const MomentSpec& spec) {
  return weighted_sigma_star2_full(spec).value;
}

namespace detail {

inline void resolve_elmin(const ElminSource& src, const GaussianModel& z, double& elmin,
                          double& se, std::string& provenance) {
  if (auto* mc = std::get_if<McSource>(&src)) {
    auto est = mc_expected_lmin(z, mc->trials, mc->seed);
    elmin = est.mean;
    se = est.stderr_;
    provenance = "mc";
  } else {
    elmin = std::get<AnalyticSource>(src).value;
    se = 0.0;
    provenance = "analytic";
  }
}

}  // namespace detail

inline BoundReport weighted_bounds(const MomentSpec& spec, const ElminSource& src) {
  GaussianModel z = weighted_model(spec);
  auto s2 = weighted_sigma_star2_full(spec);
  double elmin, se;
  std::string prov;
  detail::resolve_elmin(src, z, elmin, se, prov);
  return detail::assemble_report(elmin, se, prov, s2.value, s2.exact,
                                 static_cast<double>(z.dim()));
}

// ---------------------------------------------------------------------------
// iid theorem
// ---------------------------------------------------------------------------

namespace detail {

inline Component scale_component(const Component& comp, double s) {
  if (auto* sc = std::get_if<ScalarComp>(&comp)) return ScalarComp{sc->c * s};
  if (auto* dg = std::get_if<DiagonalComp>(&comp)) return DiagonalComp{dg->c * s};
  if (auto* g = std::get_if<GoeComp>(&comp)) return GoeComp{g->c * s};
  if (auto* g = std::get_if<GueComp>(&comp)) return GueComp{g->c * s};
  if (auto* r = std::get_if<RankOneSeriesComp>(&comp)) {
    RankOneSeriesComp t = *r;
    for (double& w : t.w) w *= s * s;
    return t;
  }
  if (auto* gs = std::get_if<GeneralSeriesComp>(&comp)) {
    GeneralSeriesComp t;
    for (const auto& h : gs->h) t.h.push_back(h.scaled(s));
    return t;
  }
  auto* cd = std::get_if<CompressedDiagonalComp>(&comp);
  // The compressed-diagonal law is quadratic in the stored rows, so a scalar
  // factor s on the law corresponds to sqrt(|s|) on the matrix.
  return CompressedDiagonalComp{
      RectMatrix(cd->q.field(), std::sqrt(std::abs(s)) * cd->q.entries())};
}

}  // namespace detail

// Scales every component so that var_eval multiplies by s^2.
inline GaussianModel scale_model(const GaussianModel& model, double s) {
  std::vector<Component> comps;
  for (const auto& c : model.components()) comps.push_back(detail::scale_component(c, s));
  return GaussianModel(model.shift(), std::move(comps));
}

// Z = n * mean + sqrt(n) * component.
inline GaussianModel iid_model(const IidSummandSpec& spec) {
  spec.validate();
  GaussianModel scaled =
      scale_model(spec.comparison_component, std::sqrt(static_cast<double>(spec.n)));
  return GaussianModel(spec.mean.scaled(static_cast<double>(spec.n)), scaled.components());
}

inline BoundReport iid_bounds(const IidSummandSpec& spec, const ElminSource& src) {
  GaussianModel z = iid_model(spec);
  ModelStats comp_stats = stats(spec.comparison_component);
  double s2 = static_cast<double>(spec.n) * comp_stats.sigma_star2;
  double elmin, se;
  std::string prov;
  detail::resolve_elmin(src, z, elmin, se, prov);
  return detail::assemble_report(elmin, se, prov, s2, comp_stats.sigma_star2_is_exact,
                                 2.0 * z.dim());
}

// Empirical stand-in for the second moment function: the component's var_eval
// equals the empirical average of <M, W_j>^2 at every M.
inline IidSummandSpec iid_model_from_samples(const std::vector<SymMatrix>& samples,
                                             long long n) {
  if (samples.size() < 2)
    throw std::invalid_argument("iid_model_from_samples: >= 2 samples required");
  int d = samples.front().dim();
  Field f = samples.front().field();
  CMat mean = CMat::Zero(d, d);
  for (const auto& w : samples) {
    if (lambda_min(w) < -1e-10 * std::max(1.0, w.frobenius_norm()))
      throw std::invalid_argument("iid_model_from_samples: non-psd sample");
    mean += w.entries();
  }
  mean /= static_cast<double>(samples.size());
  GeneralSeriesComp g;
  double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(samples.size()));
  for (const auto& w : samples) g.h.push_back(w.scaled(inv_sqrt_m));
  GaussianModel comp(SymMatrix::zero(f, d), {std::move(g)});
  IidSummandSpec spec{SymMatrix(f, std::move(mean)), std::move(comp), n,
                      Certification::sample_certified};
  return spec;
}

// ---------------------------------------------------------------------------
// Scalar positive sums and coarse baselines
// ---------------------------------------------------------------------------

inline double scalar_l2(const std::vector<MomentSpec::Entry>& moments) {
  double l2 = 0.0;
  for (const auto& e : moments) l2 += e.m2;
  return l2;
}

// P{X <= EX - t} <= exp(-t^2 / (2 L2)); a deterministic sum (L2 = 0) has a
// zero lower tail at any t > 0.
inline double scalar_tail(const std::vector<MomentSpec::Entry>& moments, double t) {
  if (t < 0) throw std::invalid_argument("scalar_tail: t >= 0 required");
  double l2 = scalar_l2(moments);
  if (l2 == 0.0) return t > 0 ? 0.0 : 1.0;
  return std::exp(-t * t / (2.0 * l2));
}

// Companion evaluator: E e^{-theta X} <= exp(-theta EX + theta^2 L2 / 2).
inline double scalar_mgf_bound(const std::vector<MomentSpec::Entry>& moments, double theta) {
  double m1 = 0.0;
  for (const auto& e : moments) m1 += e.m1;
  double l2 = scalar_l2(moments);
  return std::exp(-theta * m1 + 0.5 * theta * theta * l2);
}

// Exponential Paley-Zygmund baseline driven by L2 = ||sum E W_i^2||.
inline BoundReport epz_bounds(const SymMatrix& second_moment_sum,
                              const SymMatrix& expected_sum) {
  if (lambda_min(second_moment_sum) <
      -1e-10 * std::max(1.0, second_moment_sum.frobenius_norm()))
    throw std::invalid_argument("epz_bounds: second moment sum must be psd");
  double l2 = lambda_max(second_moment_sum);
  double d = expected_sum.dim();
  return detail::assemble_report(lambda_min(expected_sum), 0.0, "analytic", l2, true, d);
}

// Coarse matrix-Bernstein-style lower bound from the matrix variance.
inline double bern_lb(const GaussianModel& model) {
  ModelStats st = stats(model);
  return lambda_min(model.shift()) -
         2.0 * std::sqrt(2.0 * st.sigma2 * std::log(2.0 * model.dim()));
}

}  // namespace psdc
