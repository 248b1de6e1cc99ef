#pragma once

// Structured self-adjoint Gaussian matrix laws: shift plus independent
// components, with sampling, variance functions, matrix/weak variance
// statistics, congruence equivariance, and additivity.

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "psdc/matrix.hpp"
#include "psdc/rng.hpp"
#include "psdc/util.hpp"

namespace psdc {

// c * gamma * I
struct ScalarComp {
  double c;
};
// c * sum_i gamma_i E_ii
struct DiagonalComp {
  double c;
};
// c * G_goe: diagonal N(0,2c^2), off-diagonal N(0,c^2), real symmetric
struct GoeComp {
  double c;
};
// c * G_gue: diagonal N(0,c^2) real, off-diagonal complex N_C(0,c^2)
struct GueComp {
  double c;
};
// sum_i gamma_i sqrt(w_i) u_i u_i*
struct RankOneSeriesComp {
  std::vector<double> w;
  std::vector<CVec> u;
};
// sum_i gamma_i H_i
struct GeneralSeriesComp {
  std::vector<SymMatrix> h;
};
// q^T D_n q with D_n an n-dim standard Gaussian diagonal; rows of q act as the
// compression vectors.
struct CompressedDiagonalComp {
  RectMatrix q;
};

using Component = std::variant<ScalarComp, DiagonalComp, GoeComp, GueComp, RankOneSeriesComp,
                               GeneralSeriesComp, CompressedDiagonalComp>;

class GaussianModel {
 public:
  explicit GaussianModel(SymMatrix shift, std::vector<Component> comps = {})
      : shift_(std::move(shift)), comps_(std::move(comps)) {
    validate();
  }

  int dim() const { return shift_.dim(); }
  Field field() const { return shift_.field(); }
  const SymMatrix& shift() const { return shift_; }
  const std::vector<Component>& components() const { return comps_; }

 private:
  void validate() const;

  SymMatrix shift_;
  std::vector<Component> comps_;
};

namespace detail {

inline int component_dim(const Component& c, int model_dim) {
  if (auto* r = std::get_if<RankOneSeriesComp>(&c)) {
    if (r->w.size() != r->u.size())
      throw std::invalid_argument("RankOneSeries: weight/vector count mismatch");
    for (double w : r->w)
      if (w < 0) throw std::invalid_argument("RankOneSeries: negative weight");
    for (const auto& u : r->u)
      if (u.size() != model_dim) return static_cast<int>(u.size());
    return model_dim;
  }
  if (auto* g = std::get_if<GeneralSeriesComp>(&c)) {
    for (const auto& h : g->h)
      if (h.dim() != model_dim) return h.dim();
    return model_dim;
  }
  if (auto* q = std::get_if<CompressedDiagonalComp>(&c)) return q->q.cols();
  return model_dim;
}

}  // namespace detail

inline void GaussianModel::validate() const {
  for (const auto& c : comps_) {
    if (detail::component_dim(c, dim()) != dim())
      throw std::invalid_argument("GaussianModel: component dimension mismatch");
    if (std::holds_alternative<GoeComp>(c) && field() != Field::real)
      throw std::invalid_argument("GaussianModel: GOE requires the real field");
    if (std::holds_alternative<GueComp>(c) && field() != Field::complex_)
      throw std::invalid_argument("GaussianModel: GUE requires the complex field");
  }
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace detail {

inline void add_component_draw(CMat& acc, const Component& comp, CounterRng& rng) {
  int d = static_cast<int>(acc.rows());
  if (auto* s = std::get_if<ScalarComp>(&comp)) {
    acc += s->c * rng.next_normal() * CMat::Identity(d, d);
  } else if (auto* dg = std::get_if<DiagonalComp>(&comp)) {
    for (int i = 0; i < d; ++i) acc(i, i) += dg->c * rng.next_normal();
  } else if (auto* g = std::get_if<GoeComp>(&comp)) {
    const double s2 = std::sqrt(2.0);
    for (int i = 0; i < d; ++i) acc(i, i) += g->c * s2 * rng.next_normal();
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        double x = g->c * rng.next_normal();
        acc(i, j) += x;
        acc(j, i) += x;
      }
  } else if (auto* g = std::get_if<GueComp>(&comp)) {
    for (int i = 0; i < d; ++i) acc(i, i) += g->c * rng.next_normal();
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        std::complex<double> z = g->c * rng.next_complex_normal();
        acc(i, j) += z;
        acc(j, i) += std::conj(z);
      }
  } else if (auto* r = std::get_if<RankOneSeriesComp>(&comp)) {
    for (size_t i = 0; i < r->w.size(); ++i) {
      double g = rng.next_normal() * std::sqrt(r->w[i]);
      acc += g * (r->u[i] * r->u[i].adjoint());
    }
  } else if (auto* gs = std::get_if<GeneralSeriesComp>(&comp)) {
    for (const auto& h : gs->h) acc += rng.next_normal() * h.entries();
  } else if (auto* cd = std::get_if<CompressedDiagonalComp>(&comp)) {
    const CMat& q = cd->q.entries();
    for (int i = 0; i < q.rows(); ++i) {
      CVec a = q.row(i).adjoint();
      acc += rng.next_normal() * (a * a.adjoint());
    }
  }
}

}  // namespace detail

inline SymMatrix sample(const GaussianModel& model, std::uint64_t seed) {
  CMat acc = model.shift().entries();
  const auto& comps = model.components();
  for (size_t j = 0; j < comps.size(); ++j) {
    CounterRng rng(subkey(seed, j));
    detail::add_component_draw(acc, comps[j], rng);
  }
  return SymMatrix(model.field(), std::move(acc));
}

// ---------------------------------------------------------------------------
// Variance function
// ---------------------------------------------------------------------------

inline double var_eval(const GaussianModel& model, const SymMatrix& m) {
  if (m.dim() != model.dim()) throw std::invalid_argument("var_eval: dimension mismatch");
  double total = 0.0;
  for (const auto& comp : model.components()) {
    if (auto* s = std::get_if<ScalarComp>(&comp)) {
      double tr = m.trace();
      total += s->c * s->c * tr * tr;
    } else if (auto* dg = std::get_if<DiagonalComp>(&comp)) {
      double acc = 0.0;
      for (int i = 0; i < m.dim(); ++i) acc += std::norm(m.entries()(i, i));
      total += dg->c * dg->c * acc;
    } else if (auto* g = std::get_if<GoeComp>(&comp)) {
      total += 2.0 * g->c * g->c * m.frobenius_norm() * m.frobenius_norm();
    } else if (auto* g = std::get_if<GueComp>(&comp)) {
      total += g->c * g->c * m.frobenius_norm() * m.frobenius_norm();
    } else if (auto* r = std::get_if<RankOneSeriesComp>(&comp)) {
      for (size_t i = 0; i < r->w.size(); ++i) {
        double inner = (r->u[i].adjoint() * m.entries() * r->u[i]).value().real();
        total += r->w[i] * inner * inner;
      }
    } else if (auto* gs = std::get_if<GeneralSeriesComp>(&comp)) {
      for (const auto& h : gs->h) {
        double inner = trace_inner(m, h);
        total += inner * inner;
      }
    } else if (auto* cd = std::get_if<CompressedDiagonalComp>(&comp)) {
      const CMat& q = cd->q.entries();
      for (int i = 0; i < q.rows(); ++i) {
        double diag = (q.row(i) * m.entries() * q.row(i).adjoint()).value().real();
        total += diag * diag;
      }
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Model statistics
// ---------------------------------------------------------------------------

struct ModelStats {
  double sigma2 = 0.0;
  double sigma_star2 = 0.0;
  bool sigma_star2_is_exact = false;
  double khinchin = 0.0;
  int dim = 0;
};

namespace detail {

// E(component)^2 contribution, a psd matrix.
inline CMat second_moment_matrix(const Component& comp, int d) {
  if (auto* s = std::get_if<ScalarComp>(&comp)) return s->c * s->c * CMat::Identity(d, d);
  if (auto* dg = std::get_if<DiagonalComp>(&comp)) return dg->c * dg->c * CMat::Identity(d, d);
  if (auto* g = std::get_if<GoeComp>(&comp)) return g->c * g->c * (d + 1) * CMat::Identity(d, d);
  if (auto* g = std::get_if<GueComp>(&comp)) return g->c * g->c * d * CMat::Identity(d, d);
  if (auto* r = std::get_if<RankOneSeriesComp>(&comp)) {
    CMat acc = CMat::Zero(d, d);
    for (size_t i = 0; i < r->w.size(); ++i)
      acc += r->w[i] * r->u[i].squaredNorm() * (r->u[i] * r->u[i].adjoint());
    return acc;
  }
  if (auto* gs = std::get_if<GeneralSeriesComp>(&comp)) {
    CMat acc = CMat::Zero(d, d);
    for (const auto& h : gs->h) acc += h.entries() * h.entries();
    return acc;
  }
  auto* cd = std::get_if<CompressedDiagonalComp>(&comp);
  CMat acc = CMat::Zero(d, d);
  const CMat& q = cd->q.entries();
  for (int i = 0; i < q.rows(); ++i) {
    CVec a = q.row(i).adjoint();
    acc += a.squaredNorm() * (a * a.adjoint());
  }
  return acc;
}

inline bool vectors_orthogonal(const std::vector<CVec>& u) {
  for (size_t i = 0; i < u.size(); ++i)
    for (size_t j = i + 1; j < u.size(); ++j) {
      double inner = std::abs((u[i].adjoint() * u[j]).value());
      if (inner > 1e-10 * std::max(1.0, u[i].norm() * u[j].norm())) return false;
    }
  return true;
}

inline std::optional<double> sigma_star2_closed_form(const Component& comp) {
  if (auto* s = std::get_if<ScalarComp>(&comp)) return s->c * s->c;
  if (auto* dg = std::get_if<DiagonalComp>(&comp)) return dg->c * dg->c;
  if (auto* g = std::get_if<GoeComp>(&comp)) return 2.0 * g->c * g->c;
  if (auto* g = std::get_if<GueComp>(&comp)) return g->c * g->c;
  if (auto* r = std::get_if<RankOneSeriesComp>(&comp)) {
    if (!vectors_orthogonal(r->u)) return std::nullopt;
    double best = 0.0;
    for (size_t i = 0; i < r->w.size(); ++i) {
      double n2 = r->u[i].squaredNorm();
      best = std::max(best, r->w[i] * n2 * n2);
    }
    return best;
  }
  return std::nullopt;
}

// Var[u* Z u] for a unit vector u, plus its (real-structure) gradient in
// complex representation: grad = sum_i 4 g_i(u) B_i u over quadratic terms.
inline double weak_variance_at(const GaussianModel& model, const CVec& u, CVec* grad) {
  int d = model.dim();
  if (grad) grad->setZero(d);
  double total = 0.0;
  auto add_rank_one = [&](const CVec& a, double w) {
    if (w == 0.0) return;
    double g = std::norm((a.adjoint() * u).value());
    total += w * g * g;
    if (grad) *grad += 4.0 * w * g * (a * (a.adjoint() * u));
  };
  for (const auto& comp : model.components()) {
    if (auto* s = std::get_if<ScalarComp>(&comp)) {
      total += s->c * s->c;
    } else if (auto* dg = std::get_if<DiagonalComp>(&comp)) {
      double c2 = dg->c * dg->c;
      for (int i = 0; i < d; ++i) {
        double p = std::norm(u(i));
        total += c2 * p * p;
        if (grad) (*grad)(i) += 4.0 * c2 * p * u(i);
      }
    } else if (auto* g = std::get_if<GoeComp>(&comp)) {
      total += 2.0 * g->c * g->c;
    } else if (auto* g = std::get_if<GueComp>(&comp)) {
      total += g->c * g->c;
    } else if (auto* r = std::get_if<RankOneSeriesComp>(&comp)) {
      for (size_t i = 0; i < r->w.size(); ++i) add_rank_one(r->u[i], r->w[i]);
    } else if (auto* gs = std::get_if<GeneralSeriesComp>(&comp)) {
      for (const auto& h : gs->h) {
        double g = (u.adjoint() * h.entries() * u).value().real();
        total += g * g;
        if (grad) *grad += 4.0 * g * (h.entries() * u);
      }
    } else if (auto* cd = std::get_if<CompressedDiagonalComp>(&comp)) {
      const CMat& q = cd->q.entries();
      for (int i = 0; i < q.rows(); ++i) add_rank_one(q.row(i).adjoint(), 1.0);
    }
  }
  return total;
}

// Multi-start projected gradient ascent over the unit sphere.
inline double estimate_sigma_star2(const GaussianModel& model) {
  const int restarts = 32;
  const int max_iters = 400;
  int d = model.dim();
  bool complex_field = model.field() == Field::complex_;
  double best = 0.0;
  CounterRng rng(subkey(0x736967737461ull, 0));
  for (int r = 0; r < restarts; ++r) {
    CVec u(d);
    for (int i = 0; i < d; ++i)
      u(i) = complex_field ? std::complex<double>(rng.next_normal(), rng.next_normal())
                           : std::complex<double>(rng.next_normal(), 0.0);
    if (u.norm() < 1e-12) u(0) = 1.0;
    u.normalize();
    CVec grad(d);
    double f = weak_variance_at(model, u, &grad);
    double step = 1.0;
    for (int it = 0; it < max_iters; ++it) {
      CVec tangent = grad - u * (u.adjoint() * grad).value();
      if (tangent.norm() < 1e-14) break;
      bool improved = false;
      for (int bt = 0; bt < 40; ++bt) {
        CVec cand = (u + step * tangent).normalized();
        double fc = weak_variance_at(model, cand, nullptr);
        if (fc > f) {
          double rel = (fc - f) / std::max(fc, 1e-300);
          u = cand;
          f = weak_variance_at(model, u, &grad);
          step *= 2.0;
          improved = true;
          if (rel < 1e-10) it = max_iters;  // converged
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;
    }
    best = std::max(best, f);
  }
  return best;
}

}  // namespace detail

inline ModelStats stats(const GaussianModel& model) {
  ModelStats st;
  st.dim = model.dim();
  int d = model.dim();
  CMat acc = CMat::Zero(d, d);
  for (const auto& comp : model.components())
    acc += detail::second_moment_matrix(comp, d);
  st.sigma2 = model.components().empty()
                  ? 0.0
                  : sym_eigvals(SymMatrix(model.field(), acc)).back();

  bool all_closed = true;
  double sum_closed = 0.0;
  for (const auto& comp : model.components()) {
    auto cf = detail::sigma_star2_closed_form(comp);
    if (!cf) {
      all_closed = false;
      break;
    }
    sum_closed += *cf;
  }
  if (all_closed) {
    st.sigma_star2 = sum_closed;
    st.sigma_star2_is_exact = model.components().size() <= 1;
  } else {
    st.sigma_star2 = detail::estimate_sigma_star2(model);
    st.sigma_star2_is_exact = false;
  }
  st.khinchin = std::sqrt(2.0 * st.sigma2 * std::log(static_cast<double>(d)));
  return st;
}

// ---------------------------------------------------------------------------
// Congruence equivariance and additivity
// ---------------------------------------------------------------------------

namespace detail {

inline bool columns_orthonormal(const RectMatrix& k, double tol = 1e-8) {
  CMat g = k.entries().adjoint() * k.entries();
  return (g - CMat::Identity(k.cols(), k.cols())).norm() <= tol * std::sqrt(double(k.cols()));
}

inline std::vector<SymMatrix> expand_to_series(const Component& comp, int d, Field f) {
  std::vector<SymMatrix> out;
  if (auto* s = std::get_if<ScalarComp>(&comp)) {
    out.push_back(SymMatrix(f, s->c * CMat::Identity(d, d)));
  } else if (auto* dg = std::get_if<DiagonalComp>(&comp)) {
    for (int i = 0; i < d; ++i) {
      CMat h = CMat::Zero(d, d);
      h(i, i) = dg->c;
      out.push_back(SymMatrix(f, std::move(h)));
    }
  } else if (auto* g = std::get_if<GoeComp>(&comp)) {
    const double s2 = std::sqrt(2.0);
    for (int i = 0; i < d; ++i) {
      CMat h = CMat::Zero(d, d);
      h(i, i) = s2 * g->c;
      out.push_back(SymMatrix(f, std::move(h)));
    }
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        CMat h = CMat::Zero(d, d);
        h(i, j) = g->c;
        h(j, i) = g->c;
        out.push_back(SymMatrix(f, std::move(h)));
      }
  } else if (auto* g = std::get_if<GueComp>(&comp)) {
    const double is2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < d; ++i) {
      CMat h = CMat::Zero(d, d);
      h(i, i) = g->c;
      out.push_back(SymMatrix(f, std::move(h)));
    }
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        CMat h1 = CMat::Zero(d, d);
        h1(i, j) = g->c * is2;
        h1(j, i) = g->c * is2;
        out.push_back(SymMatrix(f, std::move(h1)));
        CMat h2 = CMat::Zero(d, d);
        h2(i, j) = std::complex<double>(0.0, g->c * is2);
        h2(j, i) = std::complex<double>(0.0, -g->c * is2);
        out.push_back(SymMatrix(f, std::move(h2)));
      }
  } else {
    throw std::logic_error("expand_to_series: component has a direct transform");
  }
  return out;
}

}  // namespace detail

inline GaussianModel model_congruence(const GaussianModel& model, const RectMatrix& k,
                                      bool expand = false) {
  if (k.rows() != model.dim())
    throw std::invalid_argument("model_congruence: shape mismatch");
  Field f = (model.field() == Field::complex_ || k.field() == Field::complex_)
                ? Field::complex_
                : Field::real;
  int dc = k.cols();
  bool ortho = detail::columns_orthonormal(k);
  SymMatrix shift = congruence(k, model.shift());
  if (f != shift.field()) shift = SymMatrix(f, shift.entries());
  std::vector<Component> out;
  for (const auto& comp : model.components()) {
    if (auto* s = std::get_if<ScalarComp>(&comp)) {
      if (ortho && !expand) {
        out.push_back(ScalarComp{s->c});
        continue;
      }
    } else if (std::get_if<GoeComp>(&comp)) {
      if (ortho && !expand && f == Field::real) {
        out.push_back(GoeComp{std::get<GoeComp>(comp).c});
        continue;
      }
    } else if (std::get_if<GueComp>(&comp)) {
      if (ortho && !expand) {
        out.push_back(GueComp{std::get<GueComp>(comp).c});
        continue;
      }
    } else if (auto* dg = std::get_if<DiagonalComp>(&comp)) {
      // Diagonal(c) is the law of c * sum_i gamma_i E_ii, i.e. the compressed
      // diagonal with rows sqrt(|c|) e_i (rows enter the law quadratically).
      out.push_back(
          CompressedDiagonalComp{RectMatrix(f, std::sqrt(std::abs(dg->c)) * k.entries())});
      continue;
    } else if (auto* r = std::get_if<RankOneSeriesComp>(&comp)) {
      RankOneSeriesComp t;
      t.w = r->w;
      for (const auto& u : r->u) t.u.push_back(k.entries().adjoint() * u);
      out.push_back(std::move(t));
      continue;
    } else if (auto* gs = std::get_if<GeneralSeriesComp>(&comp)) {
      GeneralSeriesComp t;
      for (const auto& h : gs->h) t.h.push_back(congruence(k, h));
      out.push_back(std::move(t));
      continue;
    } else if (auto* cd = std::get_if<CompressedDiagonalComp>(&comp)) {
      out.push_back(CompressedDiagonalComp{RectMatrix(f, cd->q.entries() * k.entries())});
      continue;
    }
    // Scalar/GOE/GUE under a general transform: only representable after
    // expansion to a general series; refuse unless the caller opted in.
    if (!expand)
      throw std::invalid_argument(
          "model_congruence: non-orthonormal transform of a Scalar/GOE/GUE component "
          "requires expand=true");
    GeneralSeriesComp t;
    for (const auto& h : detail::expand_to_series(comp, model.dim(), model.field()))
      t.h.push_back(congruence(k, h));
    out.push_back(std::move(t));
  }
  (void)dc;
  return GaussianModel(std::move(shift), std::move(out));
}

inline GaussianModel add_independent(const GaussianModel& a, const GaussianModel& b) {
  if (a.dim() != b.dim() || a.field() != b.field())
    throw std::invalid_argument("add_independent: dim/field mismatch");
  std::vector<Component> comps = a.components();
  comps.insert(comps.end(), b.components().begin(), b.components().end());
  return GaussianModel(a.shift() + b.shift(), std::move(comps));
}

// ---------------------------------------------------------------------------
// Monte Carlo expectation of the minimum eigenvalue
// ---------------------------------------------------------------------------

inline MeanStderr mc_expected_lmin(const GaussianModel& model, std::size_t trials,
                                   std::uint64_t seed) {
  if (trials < 2) throw std::invalid_argument("mc_expected_lmin: trials >= 2 required");
  auto vals = parallel_map(trials, [&](std::size_t t) {
    return lambda_min(sample(model, subkey(seed, t)));
  });
  return mean_stderr(vals);
}

}  // namespace psdc
