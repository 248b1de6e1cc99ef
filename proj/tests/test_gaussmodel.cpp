#include <catch_amalgamated.hpp>
#include <cmath>

#include "psdc/gaussian.hpp"
#include "test_helpers.hpp"

using namespace psdc;
using Catch::Approx;

namespace {

GaussianModel single(Field f, int d, Component c) {
  return GaussianModel(SymMatrix::zero(f, d), {std::move(c)});
}

}  // namespace

TEST_CASE("shift-only model samples exactly") {
  SymMatrix delta = SymMatrix::diagonal(Field::real, {1.0, 2.0});
  GaussianModel model(delta);
  for (std::uint64_t s : {0ull, 1ull, 99ull})
    REQUIRE((sample(model, s).entries() - delta.entries()).norm() == 0.0);
}

TEST_CASE("diagonal component has zero off-diagonals") {
  GaussianModel model = single(Field::real, 3, DiagonalComp{1.0});
  for (std::uint64_t s = 0; s < 50; ++s) {
    SymMatrix z = sample(model, s);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) REQUIRE(z.entries()(i, j) == std::complex<double>(0.0, 0.0));
  }
}

TEST_CASE("GOE entry variances") {
  const int d = 50;
  const int trials = 2000;
  GaussianModel model = single(Field::real, d, GoeComp{1.0});
  double diag2 = 0.0, off2 = 0.0;
  double diag4 = 0.0, off4 = 0.0;
  for (int t = 0; t < trials; ++t) {
    SymMatrix z = sample(model, t);
    double a = z.entries()(3, 3).real();
    double b = z.entries()(1, 4).real();
    diag2 += a * a;
    off2 += b * b;
    diag4 += a * a * a * a;
    off4 += b * b * b * b;
  }
  diag2 /= trials;
  off2 /= trials;
  double se_diag = std::sqrt((diag4 / trials - diag2 * diag2) / trials);
  double se_off = std::sqrt((off4 / trials - off2 * off2) / trials);
  REQUIRE(std::abs(diag2 - 2.0) <= 3.0 * se_diag);
  REQUIRE(std::abs(off2 - 1.0) <= 3.0 * se_off);
}

TEST_CASE("GUE under real tag and GOE under complex tag are rejected") {
  REQUIRE_THROWS_AS(single(Field::real, 2, GueComp{1.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(single(Field::complex_, 2, GoeComp{1.0}), std::invalid_argument);
}

TEST_CASE("var_eval closed forms") {
  SymMatrix m = helpers::random_sym(4, subkey(100, 0));
  double tr = m.trace();
  double fro2 = m.frobenius_norm() * m.frobenius_norm();

  REQUIRE(var_eval(single(Field::real, 4, ScalarComp{1.0}), m) == Approx(tr * tr));
  REQUIRE(var_eval(single(Field::real, 4, GoeComp{1.0}), m) == Approx(2.0 * fro2));
  GaussianModel gue = single(Field::complex_, 4, GueComp{1.0});
  SymMatrix mc(Field::complex_, m.entries());
  REQUIRE(var_eval(gue, mc) == Approx(fro2));

  SymMatrix e11 = SymMatrix::diagonal(Field::real, {1.0, 0.0});
  REQUIRE(var_eval(single(Field::real, 2, GoeComp{1.0}), e11) == Approx(2.0));

  double diag2 = 0.0;
  for (int i = 0; i < 4; ++i) diag2 += std::norm(m.entries()(i, i));
  REQUIRE(var_eval(single(Field::real, 4, DiagonalComp{1.0}), m) == Approx(diag2));
}

TEST_CASE("var_eval matches empirical variance for every component type") {
  const int d = 3;
  const int draws = 100000;
  std::vector<std::pair<std::string, GaussianModel>> models;
  models.emplace_back("scalar", single(Field::real, d, ScalarComp{0.7}));
  models.emplace_back("diagonal", single(Field::real, d, DiagonalComp{1.3}));
  models.emplace_back("goe", single(Field::real, d, GoeComp{0.9}));
  models.emplace_back("gue", single(Field::complex_, d, GueComp{1.1}));
  {
    RankOneSeriesComp r;
    r.w = {0.5, 2.0};
    r.u = {helpers::random_unit(d, subkey(101, 0)), helpers::random_unit(d, subkey(101, 1))};
    models.emplace_back("rankone", single(Field::real, d, std::move(r)));
  }
  {
    GeneralSeriesComp g;
    g.h = {helpers::random_sym(d, subkey(102, 0)).scaled(0.4),
           helpers::random_sym(d, subkey(102, 1)).scaled(0.6)};
    models.emplace_back("series", single(Field::real, d, std::move(g)));
  }
  {
    CounterRng rng(subkey(103, 0));
    CMat q(5, d);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < d; ++j) q(i, j) = 0.5 * rng.next_normal();
    models.emplace_back("compdiag",
                        single(Field::real, d, CompressedDiagonalComp{RectMatrix(Field::real, q)}));
  }
  for (auto& [name, model] : models) {
    INFO(name);
    SymMatrix m = helpers::random_sym(d, subkey(104, 7));
    SymMatrix probe = model.field() == Field::complex_ ? SymMatrix(Field::complex_, m.entries()) : m;
    double predicted = var_eval(model, probe);
    double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
    for (int t = 0; t < draws; ++t) {
      double x = trace_inner(probe, sample(model, t));
      sum += x;
      sum2 += x * x;
      sum4 += x * x * x * x;
    }
    double mean = sum / draws;
    double var = sum2 / draws - mean * mean;
    // stderr of a variance estimate ~ sqrt((m4 - var^2)/n)
    double m4 = sum4 / draws;
    double se = std::sqrt(std::max(m4 - var * var, 0.0) / draws);
    REQUIRE(std::abs(var - predicted) <= 4.0 * se + 1e-12);
  }
}

TEST_CASE("stats closed forms") {
  ModelStats goe = stats(single(Field::real, 4, GoeComp{1.0}));
  REQUIRE(goe.sigma2 == Approx(5.0));
  REQUIRE(goe.sigma_star2 == Approx(2.0));
  REQUIRE(goe.sigma_star2_is_exact);

  ModelStats gue = stats(single(Field::complex_, 7, GueComp{1.0}));
  REQUIRE(gue.sigma2 == Approx(7.0));
  REQUIRE(gue.sigma_star2 == Approx(1.0));

  ModelStats dg = stats(single(Field::real, 8, DiagonalComp{1.0}));
  REQUIRE(dg.sigma2 == Approx(1.0));
  REQUIRE(dg.khinchin == Approx(std::sqrt(2.0 * std::log(8.0))).epsilon(1e-12));
}

TEST_CASE("stats sandwich inequality when exact") {
  for (int i = 0; i < 6; ++i) {
    GaussianModel model =
        i % 2 ? single(Field::real, 3 + i, GoeComp{0.5 + 0.2 * i})
              : single(Field::real, 3 + i, DiagonalComp{0.5 + 0.2 * i});
    ModelStats st = stats(model);
    REQUIRE(st.sigma_star2_is_exact);
    REQUIRE(st.sigma_star2 <= st.sigma2 + 1e-12);
    REQUIRE(st.sigma2 <= st.dim * st.sigma_star2 + 1e-12);
  }
}

TEST_CASE("sigma_star2 estimator agrees with brute force on a small model") {
  // Two non-orthogonal rank-one directions in R^2: maximize over the circle.
  RankOneSeriesComp r;
  CVec u1(2), u2(2);
  u1 << 1.0, 0.0;
  u2 << std::sqrt(0.5), std::sqrt(0.5);
  r.w = {1.0, 2.0};
  r.u = {u1, u2};
  GaussianModel model = single(Field::real, 2, std::move(r));
  ModelStats st = stats(model);
  REQUIRE_FALSE(st.sigma_star2_is_exact);
  double best = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double ang = i * 2.0 * M_PI / 20000;
    CVec u(2);
    u << std::cos(ang), std::sin(ang);
    best = std::max(best, var_eval(model, SymMatrix(Field::real, (u * u.adjoint()).eval())));
  }
  REQUIRE(st.sigma_star2 == Approx(best).epsilon(1e-6));
}

TEST_CASE("model_congruence with identity preserves the variance function") {
  GaussianModel model(helpers::random_sym(4, subkey(110, 0)),
                      {GoeComp{0.8}, ScalarComp{0.3}, DiagonalComp{0.5}});
  GaussianModel same = model_congruence(model, RectMatrix(Field::real, CMat::Identity(4, 4)));
  for (int t = 0; t < 20; ++t) {
    SymMatrix m = helpers::random_sym(4, subkey(111, t));
    REQUIRE(var_eval(same, m) == Approx(var_eval(model, m)).margin(1e-10));
  }
  REQUIRE((same.shift().entries() - model.shift().entries()).norm() < 1e-12);
}

TEST_CASE("GOE stays GOE under orthonormal compression") {
  GaussianModel model = single(Field::real, 5, GoeComp{1.0});
  RectMatrix k = helpers::random_orthonormal(5, 2, subkey(112, 0));
  GaussianModel small = model_congruence(model, k);
  REQUIRE(small.dim() == 2);
  for (int t = 0; t < 10; ++t) {
    SymMatrix m = helpers::random_sym(2, subkey(113, t));
    REQUIRE(var_eval(small, m) ==
            Approx(2.0 * m.frobenius_norm() * m.frobenius_norm()).margin(1e-10));
  }
}

TEST_CASE("diagonal compresses to a compressed diagonal") {
  GaussianModel model = single(Field::real, 3, DiagonalComp{1.0});
  CMat k = CMat::Zero(3, 2);
  k(0, 0) = 1.0;
  k(1, 1) = 1.0;
  GaussianModel small = model_congruence(model, RectMatrix(Field::real, k));
  REQUIRE(std::holds_alternative<CompressedDiagonalComp>(small.components().front()));
  for (int t = 0; t < 10; ++t) {
    SymMatrix m = helpers::random_sym(2, subkey(114, t));
    double expect = std::norm(m.entries()(0, 0)) + std::norm(m.entries()(1, 1));
    REQUIRE(var_eval(small, m) == Approx(expect).margin(1e-10));
  }
  // Empirical cross-check of the transformed law.
  SymMatrix probe = helpers::random_sym(2, subkey(114, 99));
  double predicted = var_eval(small, probe);
  double sum = 0.0, sum2 = 0.0;
  const int draws = 100000;
  for (int t = 0; t < draws; ++t) {
    double x = trace_inner(probe, sample(small, t));
    sum += x;
    sum2 += x * x;
  }
  double var = sum2 / draws - (sum / draws) * (sum / draws);
  REQUIRE(var == Approx(predicted).epsilon(0.05));
}

TEST_CASE("non-orthonormal congruence of a GOE refuses unless expanded") {
  GaussianModel model = single(Field::real, 3, GoeComp{1.0});
  CMat k = CMat::Identity(3, 3) * 2.0;
  REQUIRE_THROWS_AS(model_congruence(model, RectMatrix(Field::real, k)),
                    std::invalid_argument);
  GaussianModel expanded = model_congruence(model, RectMatrix(Field::real, k), true);
  for (int t = 0; t < 10; ++t) {
    SymMatrix m = helpers::random_sym(3, subkey(115, t));
    // Var[k* Z k](M) = Var[Z](k M k*) = 16 * Var[Z](M) for k = 2I.
    REQUIRE(var_eval(expanded, m) == Approx(16.0 * var_eval(model, m)).margin(1e-9));
  }
}

TEST_CASE("mc_expected_lmin basics") {
  GaussianModel fixed(SymMatrix::diagonal(Field::real, {1.0, 2.0}));
  auto est = mc_expected_lmin(fixed, 100, 0);
  REQUIRE(est.mean == 1.0);
  REQUIRE(est.stderr_ == 0.0);

  auto scalar = mc_expected_lmin(single(Field::real, 3, ScalarComp{1.0}), 4000, 1);
  REQUIRE(std::abs(scalar.mean) <= 3.0 * scalar.stderr_);
}

TEST_CASE("GOE expected extreme eigenvalues at d=100") {
  GaussianModel model = single(Field::real, 100, GoeComp{1.0});
  auto est = mc_expected_lmin(model, 2000, 3);
  REQUIRE(est.mean >= -20.0);
  REQUIRE(est.mean <= -17.0);
}

TEST_CASE("add_independent sums variance functions") {
  GaussianModel a = single(Field::real, 3, GoeComp{1.0});
  GaussianModel b = single(Field::real, 3, ScalarComp{1.0});
  GaussianModel ab = add_independent(a, b);
  for (int t = 0; t < 10; ++t) {
    SymMatrix m = helpers::random_sym(3, subkey(120, t));
    REQUIRE(var_eval(ab, m) == Approx(var_eval(a, m) + var_eval(b, m)).margin(1e-10));
  }
  GaussianModel zero(SymMatrix::zero(Field::real, 3));
  GaussianModel same = add_independent(a, zero);
  REQUIRE(same.components().size() == 1);
  REQUIRE_THROWS_AS(add_independent(a, single(Field::real, 4, ScalarComp{1.0})),
                    std::invalid_argument);
}

TEST_CASE("sigma2 is subadditive") {
  for (int t = 0; t < 10; ++t) {
    GeneralSeriesComp g1, g2;
    g1.h = {helpers::random_sym(3, subkey(130, 2 * t))};
    g2.h = {helpers::random_sym(3, subkey(130, 2 * t + 1))};
    GaussianModel a = single(Field::real, 3, std::move(g1));
    GaussianModel b = single(Field::real, 3, std::move(g2));
    REQUIRE(stats(add_independent(a, b)).sigma2 <=
            stats(a).sigma2 + stats(b).sigma2 + 1e-10);
  }
}

TEST_CASE("Khinchin sandwich for centered models") {
  const int d = 20;
  const int trials = 2000;
  std::vector<GaussianModel> models = {single(Field::real, d, GoeComp{1.0}),
                                       single(Field::complex_, d, GueComp{1.0}),
                                       single(Field::real, d, DiagonalComp{1.0})};
  for (const auto& model : models) {
    ModelStats st = stats(model);
    auto lmax = parallel_map(trials, [&](std::size_t t) {
      return lambda_max(sample(model, subkey(77, t)));
    });
    auto ms = mean_stderr(lmax);
    double lo = std::sqrt(2.0 / M_PI * st.sigma2);
    double hi = std::sqrt(2.0 * st.sigma2 * std::log(2.0 * d));
    REQUIRE(ms.mean >= lo - 3.0 * ms.stderr_);
    REQUIRE(ms.mean <= hi + 3.0 * ms.stderr_);
  }
}

TEST_CASE("monotonicity in the variance order") {
  const int d = 6;
  const int trials = 4000;
  GaussianModel a = single(Field::real, d, GoeComp{1.0});
  GaussianModel b = add_independent(a, single(Field::real, d, DiagonalComp{0.8}));
  auto fa = parallel_map(trials, [&](std::size_t t) {
    return lambda_max(sample(a, subkey(88, t)));
  });
  auto fb = parallel_map(trials, [&](std::size_t t) {
    return lambda_max(sample(b, subkey(89, t)));
  });
  auto ma = mean_stderr(fa), mb = mean_stderr(fb);
  REQUIRE(ma.mean <= mb.mean + 3.0 * std::sqrt(ma.stderr_ * ma.stderr_ + mb.stderr_ * mb.stderr_));

  auto ga = parallel_map(trials, [&](std::size_t t) {
    SymMatrix z = sample(a, subkey(90, t));
    double acc = 0.0;
    for (double l : sym_eigvals(z)) acc += std::exp(-l);
    return acc;
  });
  auto gb = parallel_map(trials, [&](std::size_t t) {
    SymMatrix z = sample(b, subkey(91, t));
    double acc = 0.0;
    for (double l : sym_eigvals(z)) acc += std::exp(-l);
    return acc;
  });
  auto mga = mean_stderr(ga), mgb = mean_stderr(gb);
  REQUIRE(mga.mean <=
          mgb.mean + 3.0 * std::sqrt(mga.stderr_ * mga.stderr_ + mgb.stderr_ * mgb.stderr_));
}

TEST_CASE("Gaussian concentration of the minimum eigenvalue") {
  const int d = 5;
  const int trials = 20000;
  GaussianModel model = single(Field::complex_, d, GueComp{1.0});
  ModelStats st = stats(model);
  auto lmin = parallel_map(trials, [&](std::size_t t) {
    return lambda_min(sample(model, subkey(93, t)));
  });
  auto ms = mean_stderr(lmin);
  for (double th : {-1.0, -0.5, 0.5, 1.0}) {
    std::vector<double> vals(trials);
    for (int t = 0; t < trials; ++t) vals[t] = std::exp(th * (lmin[t] - ms.mean));
    auto mv = mean_stderr(vals);
    REQUIRE(mv.mean <= std::exp(th * th * st.sigma_star2 / 2.0) * (1.0 + 4.0 * mv.stderr_));
  }
}

TEST_CASE("GOE orthogonal invariance of entry second moments") {
  const int d = 6;
  const int trials = 4000;
  GaussianModel model = single(Field::real, d, GoeComp{1.0});
  RectMatrix q = helpers::random_orthonormal(d, d, subkey(94, 0));
  double diag2 = 0.0, off2 = 0.0, diag4 = 0.0, off4 = 0.0;
  for (int t = 0; t < trials; ++t) {
    SymMatrix g = sample(model, subkey(95, t));
    SymMatrix rot = congruence(q, g);
    double a = rot.entries()(2, 2).real();
    double b = rot.entries()(0, 3).real();
    diag2 += a * a;
    off2 += b * b;
    diag4 += a * a * a * a;
    off4 += b * b * b * b;
  }
  diag2 /= trials;
  off2 /= trials;
  double se_diag = std::sqrt((diag4 / trials - diag2 * diag2) / trials);
  double se_off = std::sqrt((off4 / trials - off2 * off2) / trials);
  REQUIRE(std::abs(diag2 - 2.0) <= 4.0 * se_diag);
  REQUIRE(std::abs(off2 - 1.0) <= 4.0 * se_off);
}

TEST_CASE("equal variance functions give matching sample moments") {
  // Diagonal(1) vs the equivalent general series over E_ii.
  const int d = 3;
  GaussianModel a = single(Field::real, d, DiagonalComp{1.0});
  GeneralSeriesComp g;
  for (int i = 0; i < d; ++i) {
    CMat h = CMat::Zero(d, d);
    h(i, i) = 1.0;
    g.h.push_back(SymMatrix(Field::real, std::move(h)));
  }
  GaussianModel b = single(Field::real, d, std::move(g));
  SymMatrix probe = helpers::random_sym(d, subkey(96, 0));
  REQUIRE(var_eval(a, probe) == Approx(var_eval(b, probe)).margin(1e-12));
  const int draws = 50000;
  double va = 0.0, vb = 0.0;
  for (int t = 0; t < draws; ++t) {
    double xa = trace_inner(probe, sample(a, subkey(97, t)));
    double xb = trace_inner(probe, sample(b, subkey(98, t)));
    va += xa * xa;
    vb += xb * xb;
  }
  REQUIRE(va / draws == Approx(vb / draws).epsilon(0.05));
}
