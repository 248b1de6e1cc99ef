#pragma once

// Command-line front end. Thin adapter: parses flags, dispatches to the
// library, serializes reports. No numeric logic lives here.

#include <CLI11.hpp>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "psdc/apps.hpp"
#include "psdc/compare.hpp"
#include "psdc/csv.hpp"
#include "psdc/mcsim.hpp"

namespace psdc::cli {

namespace detail {

inline void emit_rows(const std::string& out_path, const std::vector<std::string>& schema,
                      const std::vector<std::vector<std::string>>& rows) {
  if (out_path.empty()) {
    write_csv(std::cout, schema, rows);
  } else {
    write_csv_file(out_path, schema, rows);
  }
}

// Every CSV emitted by the CLI carries the seed as its first column so runs
// are reproducible from the artifact alone.
inline void emit_report_csv(const std::string& out_path, std::uint64_t seed,
                            const std::vector<std::string>& base_schema,
                            std::vector<std::vector<std::string>> rows) {
  std::vector<std::string> schema = {"seed"};
  schema.insert(schema.end(), base_schema.begin(), base_schema.end());
  for (auto& r : rows) r.insert(r.begin(), std::to_string(seed));
  emit_rows(out_path, schema, rows);
}

inline DesignSystem load_design_system(const std::string& path) {
  RectMatrix m = read_rect_csv_file(path);
  DesignSystem sys{m.field(), m.cols(), {}};
  for (int i = 0; i < m.rows(); ++i) sys.vectors.push_back(m.entries().row(i).adjoint());
  sys.validate();
  return sys;
}

inline int run_bound(const std::string& scenario, int d, long long n, double beta,
                     double epsilon, double delta, double zeta, double C, double mu,
                     long long k, const std::string& q_file, const std::string& out,
                     std::uint64_t seed) {
  if (scenario == "wishart" || scenario == "wishart-nonexample") {
    WishartReport r = scenario == "wishart" ? wishart_report(d, n)
                                            : wishart_nonexample_report(d, n);
    emit_report_csv(out, seed, BoundReport::csv_schema(), {r.report.csv_row()});
    std::cout << "scenario=" << scenario << " d=" << d << " n=" << n << " seed=" << seed
              << "\n"
              << r.report.kv_text() << "rescaled_lb=" << csv_num(r.rescaled_lb) << "\n";
    return 0;
  }
  if (scenario == "design2") {
    DesignPlan plan = design_sampling_plan(d, delta, 2);
    double b = plan.s / d;  // oversampling ratio implied by the plan
    BoundReport rep = psdc::detail::assemble_report(
        plan.elmin_lb(b), 0.0, "analytic", plan.sigma_star2_ub(b), false, double(d));
    emit_report_csv(out, seed, BoundReport::csv_schema(), {rep.csv_row()});
    std::cout << "scenario=design2 d=" << d << " delta=" << delta << " seed=" << seed
              << " s=" << csv_num(plan.s) << "\n"
              << rep.kv_text();
    return 0;
  }
  if (scenario == "scov") {
    CovarianceProblem p{d, epsilon, delta, beta, std::nullopt, C};
    ScovPlan plan = scov_sample_size(p);
    emit_report_csv(out, seed, {"n", "norm_bound", "sigma_star2_ub"},
                    {{std::to_string(plan.n), csv_num(plan.norm_bound),
                      csv_num(plan.sigma_star2_ub)}});
    std::cout << "scenario=scov d=" << d << " seed=" << seed << " n=" << plan.n << "\n";
    return 0;
  }
  if (scenario == "sparse-cov") {
    CovarianceProblem p{d, epsilon, delta, std::nullopt, zeta, C};
    SparseCovReport r = sparse_cov_report(p, n > 0 ? n : 0);
    std::vector<std::string> schema = {"required_n"};
    auto base = BoundReport::csv_schema();
    schema.insert(schema.end(), base.begin(), base.end());
    auto row = r.report.csv_row();
    row.insert(row.begin(), std::to_string(r.required_n));
    emit_report_csv(out, seed, schema, {row});
    std::cout << "scenario=sparse-cov d=" << d << " seed=" << seed
              << " required_n=" << r.required_n << "\n"
              << r.report.kv_text();
    return 0;
  }
  if (scenario == "injection") {
    if (q_file.empty()) throw CLI::ValidationError("--q-file required for injection");
    RectMatrix q = read_rect_csv_file(q_file);
    long long kk = k;
    double zz = zeta;
    if (kk <= 0 || zz <= 0) {
      double m = mu > 0 ? mu : coherence(q);
      SketchParams sp = sketch_params(q.cols(), m, epsilon, delta);
      kk = sp.k;
      zz = sp.zeta;
    }
    InjectionModelReport r = injection_model(q, kk, zz);
    BoundReport rep = psdc::detail::assemble_report(r.elmin_lb, 0.0, "analytic",
                                                    r.sigma_star2_ub, false,
                                                    2.0 * q.cols());
    emit_report_csv(out, seed, BoundReport::csv_schema(), {rep.csv_row()});
    std::cout << "scenario=injection d=" << q.cols() << " k=" << kk
              << " zeta=" << csv_num(zz) << " mu=" << csv_num(r.mu) << " seed=" << seed
              << "\n"
              << rep.kv_text();
    return 0;
  }
  throw CLI::ValidationError("unknown scenario " + scenario);
}

inline WeightDist parse_dist(const std::string& name, double p) {
  if (name == "bernoulli") return BernoulliW{p};
  if (name == "uniform") return Uniform01W{};
  if (name == "exponential") return ExponentialW{1.0};
  if (name == "deterministic") return DeterministicW{p};
  throw CLI::ValidationError("unknown distribution " + name);
}

inline int run_verify(const std::string& suite, std::size_t trials, std::uint64_t seed,
                      const std::string& out) {
  std::vector<VerificationReport> reports;
  auto want = [&](const std::string& s) { return suite == "all" || suite == s; };
  if (want("trace-mgf")) {
    Scenario bern = scenario_bernoulli_weighted(5, 20, 0.4, 11);
    reports.push_back(verify_trace_mgf(bern, {0.25, 0.5, 1.0, 2.0}, trials, seed, 1));
    Scenario wis = scenario_wishart(3, 10);
    reports.push_back(verify_trace_mgf(wis, {0.1, 0.5, 1.0}, trials, seed, 2));
  }
  if (want("poly")) {
    Scenario bern = scenario_bernoulli_weighted(4, 20, 0.4, 11);
    reports.push_back(verify_poly_moment(bern, {4}, trials, seed, 1));
    Scenario wis = scenario_wishart(3, 8);
    reports.push_back(verify_poly_moment(wis, {4}, trials, seed, 2));
  }
  if (want("tail")) {
    Scenario wis = scenario_wishart(5, 500);
    double s = std::sqrt(3.0 * 500);
    reports.push_back(verify_tail(wis, {0.0, s, 2.0 * s, 3.0 * s, 4.0 * s}, trials, seed));
  }
  if (want("covcm")) {
    reports.push_back(covcm_check(BernoulliW{0.5}, {0.5, 1.0, 2.0}, {0.0, 1.0}, 2, seed));
    reports.push_back(
        covcm_check(TwoPointW{0.5, 0.3, 2.0}, {0.5, 1.0, 2.0}, {0.0, 1.0}, 2, seed));
    reports.push_back(
        covcm_check(ExponentialW{1.0}, {0.5, 1.0, 2.0}, {0.0}, trials, seed));
  }
  if (want("poissonization")) {
    std::vector<SymMatrix> a2 = {SymMatrix::diagonal(Field::real, {1.0, 0.0}),
                                 SymMatrix::diagonal(Field::real, {0.0, 1.0})};
    reports.push_back(poissonization_check(a2, 2, {0.5, 1.0, 2.0}));
    std::vector<SymMatrix> a3 = {psdc::detail::random_psd(2, subkey(5, 0)),
                                 psdc::detail::random_psd(2, subkey(5, 1)),
                                 psdc::detail::random_psd(2, subkey(5, 2))};
    reports.push_back(poissonization_check(a3, 2, {0.5, 1.0, 2.0}));
  }
  if (reports.empty()) throw CLI::ValidationError("unknown suite " + suite);

  std::vector<std::vector<std::string>> rows;
  bool all_pass = true;
  for (const auto& rep : reports) {
    for (auto row : rep.csv_rows()) {
      row.insert(row.begin(), rep.name);
      rows.push_back(std::move(row));
    }
    all_pass = all_pass && rep.pass();
    std::cout << rep.name << ": " << (rep.pass() ? "pass" : "FAIL") << " (seed=" << seed
              << ", trials=" << trials << ")\n";
  }
  std::vector<std::string> schema = {"suite"};
  auto base = VerificationReport::csv_schema();
  schema.insert(schema.end(), base.begin(), base.end());
  emit_report_csv(out, seed, schema, rows);
  return all_pass ? 0 : 1;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args) {
  CLI::App app{"minimum-eigenvalue bound calculators and verification harness"};
  app.require_subcommand(1);

  // bound
  std::string scenario, q_file, out;
  int d = 0;
  long long n = 0, k = 0;
  double beta = 1.0, epsilon = 0.5, delta = 0.1, zeta = 0.0, C = 1.0, mu = 0.0, tol = 1e-8;
  std::uint64_t seed = 0;
  auto* bound = app.add_subcommand("bound", "evaluate a bound report");
  bound->add_option("--scenario", scenario)->required();
  bound->add_option("--d", d)->check(CLI::PositiveNumber);
  bound->add_option("--n", n)->check(CLI::PositiveNumber);
  bound->add_option("--beta", beta);
  bound->add_option("--epsilon", epsilon);
  bound->add_option("--delta", delta);
  bound->add_option("--zeta", zeta);
  bound->add_option("--C", C);
  bound->add_option("--mu", mu);
  bound->add_option("--k", k);
  bound->add_option("--q-file", q_file);
  bound->add_option("--out", out);
  bound->add_option("--seed", seed);

  // simulate
  std::string kind = "sum1d", dist1 = "bernoulli", dist2 = "bernoulli";
  double p1 = 0.5, p2 = 0.5;
  int sim_n = 20;
  std::size_t trials = 10000;
  auto* simulate = app.add_subcommand("simulate", "emit figure data");
  simulate->add_option("--kind", kind)->check(CLI::IsMember({"sum1d", "sum2x2"}));
  simulate->add_option("--dist", dist1);
  simulate->add_option("--p", p1);
  simulate->add_option("--dist2", dist2);
  simulate->add_option("--p2", p2);
  simulate->add_option("--n", sim_n)->check(CLI::PositiveNumber);
  simulate->add_option("--trials", trials)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed);
  simulate->add_option("--out", out);

  // verify
  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "run verification suites");
  verify->add_option("--suite", suite)
      ->check(CLI::IsMember({"all", "trace-mgf", "poly", "tail", "covcm", "poissonization"}));
  verify->add_option("--trials", trials)->check(CLI::PositiveNumber);
  verify->add_option("--seed", seed);
  verify->add_option("--out", out);

  // sketch
  long long rows_flag = 0;
  auto* sketch = app.add_subcommand("sketch", "draw a sparse sketch");
  sketch->add_option("--rows", rows_flag);
  sketch->add_option("--dim", d);
  sketch->add_option("--k", k)->required();
  sketch->add_option("--zeta", zeta)->required();
  sketch->add_option("--seed", seed);
  sketch->add_option("--q-file", q_file);
  sketch->add_option("--out", out);

  // design
  std::string vectors_file;
  int order = 2;
  auto* design = app.add_subcommand("design", "check a projective design");
  design->add_option("--vectors-file", vectors_file)->required();
  design->add_option("--order", order)->check(CLI::IsMember({1, 2}));
  design->add_option("--tol", tol);

  try {
    // CLI11's vector overload consumes arguments in reverse order.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (bound->parsed())
      return detail::run_bound(scenario, d, n, beta, epsilon, delta, zeta, C, mu, k, q_file,
                               out, seed);
    if (simulate->parsed()) {
      FigureParams params{detail::parse_dist(dist1, p1), detail::parse_dist(dist2, p2),
                          sim_n};
      if (out.empty()) {
        emit_figure_data(kind, params, trials, seed, std::cout);
      } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + out);
        emit_figure_data(kind, params, trials, seed, f);
      }
      std::cout << "kind=" << kind << " seed=" << seed << " trials=" << trials << "\n";
      return 0;
    }
    if (verify->parsed()) return detail::run_verify(suite, trials, seed, out);
    if (sketch->parsed()) {
      long long rows_n = rows_flag;
      std::optional<RectMatrix> q;
      if (!q_file.empty()) {
        q = read_rect_csv_file(q_file);
        rows_n = q->rows();
      }
      if (rows_n <= 0) throw CLI::ValidationError("--rows or --q-file required");
      SparseSketch s = make_sketch(k, rows_n, zeta, seed);
      std::vector<std::vector<std::string>> triplets;
      for (long long j = 0; j < s.n; ++j)
        for (const auto& [row, value] : s.cols[j])
          triplets.push_back({std::to_string(row), std::to_string(j), csv_num(value)});
      detail::emit_rows(out, {"row", "col", "value"}, triplets);
      std::cout << "k=" << s.k << " n=" << s.n << " zeta=" << csv_num(s.zeta)
                << " seed=" << seed << " nnz=" << triplets.size() << "\n";
      if (q) std::cout << "injection_lmin=" << csv_num(injection_lmin(*q, s)) << "\n";
      return 0;
    }
    if (design->parsed()) {
      DesignSystem sys = detail::load_design_system(vectors_file);
      DesignCheck chk = check_design(sys, order, tol);
      std::cout << "order=" << order << " ok=" << (chk.ok ? 1 : 0)
                << " residual=" << csv_num(chk.residual) << "\n";
      return chk.ok ? 0 : 1;
    }
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace psdc::cli
