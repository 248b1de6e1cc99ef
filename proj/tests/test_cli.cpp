#include <catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "psdc/cli.hpp"
#include "test_helpers.hpp"

using namespace psdc;
using Catch::Approx;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  int code = -1;
  try {
    code = psdc::cli::run(args);
  } catch (...) {
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    throw;
  }
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("bound wishart CSV matches the library report") {
  std::string out = temp_path("psdc_cli_wishart.csv");
  auto r = run_cli({"bound", "--scenario", "wishart", "--d", "100", "--n", "10000",
                    "--out", out});
  REQUIRE(r.code == 0);
  auto rows = read_csv_file(out);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0][0] == "seed");
  // seed column + BoundReport columns, values identical to the direct API call
  auto expect = wishart_report(100, 10000).report.csv_row();
  REQUIRE(rows[1].size() == expect.size() + 1);
  for (std::size_t i = 0; i < expect.size(); ++i) REQUIRE(rows[1][i + 1] == expect[i]);
  REQUIRE(std::stod(rows[1][7]) == Approx(7436.17).margin(0.01));  // expectation_lb
  REQUIRE(r.out.find("expectation_lb=") != std::string::npos);
}

TEST_CASE("bound scov emits the plan numbers") {
  std::string out = temp_path("psdc_cli_scov.csv");
  auto r = run_cli({"bound", "--scenario", "scov", "--d", "100", "--beta", "2",
                    "--epsilon", "0.5", "--delta", "0.01", "--out", out});
  REQUIRE(r.code == 0);
  auto rows = read_csv_file(out);
  REQUIRE(rows[0] == std::vector<std::string>{"seed", "n", "norm_bound", "sigma_star2_ub"});
  REQUIRE(rows[1][1] == "38400");
  REQUIRE(std::stod(rows[1][3]) == Approx(4.0));
}

TEST_CASE("bound output is byte deterministic") {
  std::string a = temp_path("psdc_cli_det_a.csv");
  std::string b = temp_path("psdc_cli_det_b.csv");
  REQUIRE(run_cli({"bound", "--scenario", "sparse-cov", "--d", "100", "--zeta", "8",
                   "--C", "3", "--epsilon", "0.5", "--delta", "0.1", "--out", a})
              .code == 0);
  REQUIRE(run_cli({"bound", "--scenario", "sparse-cov", "--d", "100", "--zeta", "8",
                   "--C", "3", "--epsilon", "0.5", "--delta", "0.1", "--out", b})
              .code == 0);
  REQUIRE(slurp(a) == slurp(b));
  REQUIRE(read_csv_file(a)[1][1] == "57007");  // required_n
}

TEST_CASE("verify poissonization suite passes") {
  std::string out = temp_path("psdc_cli_verify.csv");
  auto r = run_cli({"verify", "--suite", "poissonization", "--trials", "100", "--out", out});
  REQUIRE(r.code == 0);
  REQUIRE(r.out.find("FAIL") == std::string::npos);
  auto rows = read_csv_file(out);
  REQUIRE(rows.size() > 1);
  for (std::size_t i = 1; i < rows.size(); ++i) REQUIRE(rows[i].back() == "1");
}

TEST_CASE("usage errors exit with code 2") {
  REQUIRE(run_cli({"bound", "--scenario", "wishart", "--d", "-1", "--n", "10"}).code == 2);
  REQUIRE(run_cli({"bound", "--scenario", "nonsense", "--d", "3", "--n", "10"}).code == 2);
  REQUIRE(run_cli({"frobnicate"}).code == 2);
  REQUIRE(run_cli({}).code == 2);
  REQUIRE(run_cli({"verify", "--suite", "bogus"}).code == 2);
}

TEST_CASE("sketch subcommand emits triplets matching the library") {
  std::string out = temp_path("psdc_cli_sketch.csv");
  auto r = run_cli({"sketch", "--rows", "30", "--k", "20", "--zeta", "5", "--seed", "3",
                    "--out", out});
  REQUIRE(r.code == 0);
  auto rows = read_csv_file(out);
  REQUIRE(rows[0] == std::vector<std::string>{"row", "col", "value"});
  auto s = make_sketch(20, 30, 5.0, 3);
  std::size_t nnz = 0;
  for (const auto& col : s.cols) nnz += col.size();
  REQUIRE(rows.size() == nnz + 1);
  const double v = 1.0 / std::sqrt(5.0);
  for (std::size_t i = 1; i < rows.size(); ++i)
    REQUIRE(std::abs(std::stod(rows[i][2])) == Approx(v).epsilon(1e-10));
}

TEST_CASE("sketch with a q file reports the injection certificate") {
  RectMatrix q = helpers::random_orthonormal(30, 3, subkey(600, 0));
  std::string qfile = temp_path("psdc_cli_q.csv");
  {
    std::ofstream f(qfile, std::ios::binary);
    write_rect_csv(q, f);
  }
  std::string out = temp_path("psdc_cli_sketch_q.csv");
  auto r = run_cli({"sketch", "--q-file", qfile, "--k", "25", "--zeta", "6", "--seed", "9",
                    "--out", out});
  REQUIRE(r.code == 0);
  auto pos = r.out.find("injection_lmin=");
  REQUIRE(pos != std::string::npos);
  double got = std::stod(r.out.substr(pos + 15));
  double expect = injection_lmin(q, make_sketch(25, 30, 6.0, 9));
  REQUIRE(got == Approx(expect).epsilon(1e-9));
}

TEST_CASE("design subcommand accepts the MUB system and rejects a rescaling") {
  auto sys = helpers::mub_c2();
  CMat m(6, 2);
  for (int i = 0; i < 6; ++i) m.row(i) = sys.vectors[i].transpose();
  std::string good = temp_path("psdc_cli_mub.csv");
  {
    std::ofstream f(good, std::ios::binary);
    write_rect_csv(RectMatrix(Field::complex_, m), f);
  }
  auto r = run_cli({"design", "--vectors-file", good, "--order", "2", "--tol", "1e-8"});
  REQUIRE(r.code == 0);
  REQUIRE(r.out.find("ok=1") != std::string::npos);

  // rescaled vectors are rejected during loading (unit-norm invariant)
  std::string bad = temp_path("psdc_cli_mub_scaled.csv");
  {
    std::ofstream f(bad, std::ios::binary);
    write_rect_csv(RectMatrix(Field::complex_, (0.9 * m).eval()), f);
  }
  auto rb = run_cli({"design", "--vectors-file", bad, "--order", "1"});
  REQUIRE(rb.code != 0);
}

TEST_CASE("simulate writes figure data") {
  std::string out = temp_path("psdc_cli_fig.csv");
  auto r = run_cli({"simulate", "--kind", "sum1d", "--dist", "deterministic", "--p", "1",
                    "--n", "5", "--trials", "200", "--seed", "4", "--out", out});
  REQUIRE(r.code == 0);
  auto rows = read_csv_file(out);
  REQUIRE(rows.size() == 202);  // header + 201 grid points
  REQUIRE(rows[0][0] == "x");
}

TEST_CASE("write_csv basics") {
  std::string path = temp_path("psdc_cli_plain.csv");
  write_csv_file(path, {"a", "b"}, {});
  REQUIRE(slurp(path) == "a,b\r\n");

  std::vector<std::vector<std::string>> big;
  for (int i = 0; i < 1000; ++i) big.push_back({std::to_string(i), csv_num(i * 0.125)});
  write_csv_file(path, {"a", "b"}, big);
  auto back = read_csv_file(path);
  REQUIRE(back.size() == 1001);
  REQUIRE(back[1000][1] == csv_num(999 * 0.125));

  std::ostringstream os;
  REQUIRE_THROWS_AS(write_csv(os, {"a", "b"}, {{"only-one"}}), std::invalid_argument);
}

TEST_CASE("bound report round trips through CSV at full precision") {
  std::string out = temp_path("psdc_cli_roundtrip.csv");
  REQUIRE(run_cli({"bound", "--scenario", "wishart-nonexample", "--d", "2", "--n", "2",
                   "--out", out})
              .code == 0);
  auto rows = read_csv_file(out);
  auto rep = wishart_nonexample_report(2, 2).report;
  REQUIRE(std::stod(rows[1][7]) == Approx(rep.expectation_lb).epsilon(1e-11));
  REQUIRE(std::stod(rows[1][4]) == Approx(rep.sigma_star2).epsilon(1e-11));
}
