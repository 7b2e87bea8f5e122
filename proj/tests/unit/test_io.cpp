#include "helpers.hpp"

#include "sppa/error.hpp"
#include "sppa/experiment.hpp"
#include "sppa/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

using namespace sppa;
using testing::vec;
namespace fs = std::filesystem;

namespace {

std::string error_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sppa_unit_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("points and matrices") {
  CHECK((point_from_json(json::parse("[1, 2.5, -3]"), "x") - vec({1, 2.5, -3})).norm() == 0.0);
  CHECK(error_of([] { point_from_json(json::parse("[1, \"a\"]"), "x0"); }) == "x0[1]: expected a number");
  CHECK(error_of([] { point_from_json(json::parse("{}"), "x0"); }).find("x0") == 0);
  const Matrix m = matrix_from_json(json::parse("[[1,2],[3,4]]"), "Q");
  CHECK(m(1, 0) == 3.0);
  CHECK(error_of([] { matrix_from_json(json::parse("[[1,2],[3]]"), "problem.Q"); }).rfind("problem.Q[1]", 0) == 0);
  CHECK(error_of([] { matrix_from_json(json::parse("[]"), "Q"); }) != "");
}

TEST_CASE("metrics from json") {
  CHECK(metric_from_json(json(), "metric").kind() == Metric::Kind::identity);
  CHECK(metric_from_json(json::parse(R"({"kind":"diagonal","values":[1,2]})"), "metric").kind() ==
        Metric::Kind::diagonal);
  CHECK(error_of([] { metric_from_json(json::parse(R"({"kind":"diagonal","values":[1,0]})"), "metric"); }) ==
        "metric.values[1]: must be positive");
  const std::string e = error_of([] { metric_from_json(json::parse(R"({"kind":"dense","rows":[[1,2],[2,1]]})"), "metric"); });
  CHECK(e.rfind("metric.rows: ", 0) == 0);
  CHECK(error_of([] { metric_from_json(json::parse(R"({"kind":"sparse"})"), "m"); }).find("unknown metric kind") !=
        std::string::npos);
}

TEST_CASE("objectives from json") {
  const Objective q = objective_from_json(json::parse(R"({"kind":"quadratic","Q":[[2,0],[0,1]],"b":[1,1]})"), "p");
  CHECK(q.value(vec({1, 1})).value() == doctest::Approx(1.5 + 2.0));
  CHECK(objective_from_json(json::parse(R"({"kind":"l1","weight":0.5})"), "p").value(vec({1, -2})).value() ==
        doctest::Approx(1.5));
  const Objective s = objective_from_json(
      json::parse(R"({"kind":"sum","quadratic":{"kind":"quadratic","Q":[[1]]},"l1":{"kind":"l1","weight":1}})"), "p");
  CHECK(s.kind() == Objective::Kind::sum);
  const Objective a =
      objective_from_json(json::parse(R"({"kind":"affine_indicator","A":[[1,1]],"rhs":[1]})"), "p");
  CHECK(a.value(vec({0.5, 0.5})).is_finite());
  CHECK(a.value(vec({1.0, 0.5})).is_infinite());
  CHECK(error_of([] { objective_from_json(json::parse(R"({"kind":"l1"})"), "problem"); }) ==
        "problem.weight: missing");
  CHECK(error_of([] { objective_from_json(json::parse(R"({"Q":[[1]]})"), "problem"); }) == "problem.kind: missing");
  CHECK(error_of([] { objective_from_json(json::parse(R"({"kind":"quadratic","Q":[[1,0],[0,-1]]})"), "problem"); })
            .rfind("problem: ", 0) == 0);
}

TEST_CASE("random_qp matches an independent draw") {
  const Objective f = objective_from_json(json::parse(R"({"kind":"random_qp","n":3,"seed":42,"delta":0.1})"), "p");
  std::mt19937_64 gen(42);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(6, 3);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 3; ++c) M(r, c) = normal(gen);
  Matrix Q = M.transpose() * M;
  Q.diagonal().array() += 0.1;
  CHECK((f.quadratic_part()->Q - Q).norm() < 1e-12);
  CHECK(f.quadratic_part()->b.norm() == 0.0);
  CHECK((random_spd(3, 6, 0.1, 42) - Q).norm() < 1e-12);
  CHECK((random_spd(3, 6, 0.1, 43) - Q).norm() > 1e-3);

  const Objective lin =
      objective_from_json(json::parse(R"({"kind":"random_qp","n":3,"seed":42,"delta":0.1,"linear":true})"), "p");
  std::mt19937_64 g2(43);
  std::normal_distribution<double> n2(0.0, 1.0);
  Point xs(3);
  for (int i = 0; i < 3; ++i) xs[i] = n2(g2);
  CHECK((lin.quadratic_part()->b + Q * xs).norm() < 1e-10);
}

TEST_CASE("schedules and step sizes from json") {
  const Schedule p = schedule_from_json(json::parse(R"({"family":"polynomial","p":2,"d":0.5})"), "schedule");
  CHECK(p.at(3).A == doctest::Approx(12.0));
  const Schedule c = schedule_from_json(json::parse(R"({"family":"constant_ratio","c":2,"r":4})"), "schedule");
  CHECK(c.at(0).c == doctest::Approx(2.0));
  const Schedule c0 = schedule_from_json(json::parse(R"({"family":"constant_ratio","c0":3,"r":4})"), "schedule");
  CHECK(c0.at(0).c == doctest::Approx(3.0));
  const Schedule g = schedule_from_json(json::parse(R"({"family":"guler","rhos":{"const":2}})"), "schedule");
  CHECK(g.at(0).c == doctest::Approx(2.0));
  const Schedule scaled =
      schedule_from_json(json::parse(R"({"family":"polynomial","p":2,"d":1,"c_scale":0.25})"), "schedule");
  CHECK(scaled.at(2).c == doctest::Approx(1.5));
  CHECK(scaled.at(2).a == doctest::Approx(6.0));
  CHECK(error_of([] { schedule_from_json(json::parse(R"({"family":"polynomial","p":1.5})"), "schedule"); }) ==
        "schedule.p: must be an integer >= 1");
  CHECK(error_of([] { schedule_from_json(json::parse(R"({"family":"constant_ratio","r":1})"), "schedule"); }) ==
        "schedule: r must be >= 2");
  CHECK(error_of([] { schedule_from_json(json::parse(R"({"family":"harmonic"})"), "schedule"); })
            .find("unknown schedule family") != std::string::npos);

  CHECK(rhos_from_json(json(1.5), "rhos").at(7) == 1.5);
  CHECK(rhos_from_json(json::parse(R"({"constant":0.5})"), "rhos").at(0) == 0.5);
  CHECK(rhos_from_json(json::parse("[1, 2]"), "rhos").length() == 2u);
  CHECK(error_of([] { rhos_from_json(json::parse("[1, 1, 1, -1]"), "rhos"); }) == "rhos[3] must be positive");
  CHECK(error_of([] { rhos_from_json(json::parse("\"x\""), "rhos"); }) != "");

  const ContinuousSchedule cs =
      continuous_schedule_from_json(json::parse(R"({"family":"exponential","lambda":2})"), "schedule");
  CHECK(cs.at(0.0).a == doctest::Approx(2.0));
  CHECK(error_of([] { continuous_schedule_from_json(json::parse(R"({"family":"polynomial","p":0.5})"), "s"); })
            .rfind("s: ", 0) == 0);
}

TEST_CASE("fields and files") {
  const json j = json::parse(R"({"K": 10, "neg": -1, "half": 0.5, "s": "x"})");
  CHECK(count_field(j, "K", "cfg") == 10u);
  CHECK(error_of([&] { count_field(j, "neg", "cfg"); }) == "cfg.neg: expected a non-negative integer");
  CHECK(error_of([&] { count_field(j, "half", "cfg"); }) == "cfg.half: expected a non-negative integer");
  CHECK(error_of([&] { count_field(j, "M", "cfg"); }) == "cfg.M: missing");
  CHECK(error_of([&] { number_field(j, "s", "cfg"); }) == "cfg.s: expected a number");
  CHECK_FALSE(optional_number(j, "x", "cfg").has_value());

  try {
    parse_json_file("/nonexistent/sppa.json");
    FAIL("missing file accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
  const fs::path dir = fresh_dir("json");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{\"a\": ";
  try {
    parse_json_file((dir / "bad.json").string());
    FAIL("truncated JSON accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
  }
  fs::remove_all(dir);
}

TEST_CASE("CSV output") {
  std::ostringstream os;
  CsvWriter w(os, {"k", "x", "y", "label"});
  w.cell(std::size_t{3}).cell(0.1).cell(std::optional<double>()).cell(std::string("a"));
  w.end_row();
  CHECK(os.str() == "k,x,y,label\n3,0.10000000000000001,,a\n");
  CHECK(std::stod(format_number(0.1)) == 0.1);
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  w.cell(1.0);
  CHECK_THROWS_AS(w.end_row(), Error);
  w.cell(1.0).cell(1.0).cell(1.0);
  CHECK_THROWS_AS(w.cell(1.0), Error);
}

TEST_CASE("output directory precedence") {
  const json with = json::parse(R"({"output_dir": "from_config"})");
  const json without = json::object();
  ::setenv("SPPA_OUT_DIR", "from_env", 1);
  CHECK(resolve_output_dir(with, std::string("flag")) == fs::path("flag"));
  CHECK(resolve_output_dir(with, std::nullopt) == fs::path("from_config"));
  CHECK(resolve_output_dir(without, std::nullopt) == fs::path("from_env"));
  ::unsetenv("SPPA_OUT_DIR");
  CHECK(resolve_output_dir(without, std::nullopt) == fs::path("out"));
  CHECK_THROWS_AS(resolve_output_dir(json::parse(R"({"output_dir": 3})"), std::nullopt), Error);
}

TEST_CASE("derived truth") {
  testing::Rng rng(5);
  const Matrix Q = rng.spd(3);
  const Point b = rng.point(3);
  const auto t = derive_truth(Objective::quadratic(Q, b), Metric::identity(), Point::Zero(3));
  REQUIRE(t.has_value());
  CHECK((Q * t->minimizers[0] + b).norm() < 1e-10);
  CHECK_FALSE(derive_truth(Objective::quadratic(Matrix::Zero(2, 2), vec({0, 0})), Metric::identity(), vec({1, 1}))
                  .has_value());
  const auto l1 = derive_truth(Objective::l1(1.0), Metric::identity(), vec({1, 2}));
  REQUIRE(l1.has_value());
  CHECK(l1->minimizers[0].norm() == 0.0);
  CHECK(*l1->fstar == 0.0);
  // affine set {x1 + x2 = 1}: projection of (1, 1) is (1/2, 1/2)
  const auto aff = derive_truth(Objective::affine_indicator(testing::mat({{1.0, 1.0}}), vec({1.0})),
                                Metric::identity(), vec({1.0, 1.0}));
  REQUIRE(aff.has_value());
  CHECK((aff->minimizers[0] - vec({0.5, 0.5})).norm() < 1e-12);
}

TEST_CASE("experiments are reproducible byte for byte") {
  const json cfg = json::parse(R"({
    "algorithm": "sppa",
    "problem": {"kind": "random_qp", "n": 4, "seed": 9, "linear": true},
    "metric": null,
    "schedule": {"family": "constant_ratio", "c": 1, "r": 4},
    "x0": [1, 1, 1, 1],
    "K": 80
  })");
  const fs::path a = fresh_dir("rep_a"), b = fresh_dir("rep_b");
  const ExperimentResult ra = run_experiment(cfg, a);
  const ExperimentResult rb = run_experiment(cfg, b);
  CHECK(ra.certificates_passed);
  REQUIRE(ra.files.size() == rb.files.size());
  for (const auto& f : ra.files) {
    const fs::path rel = fs::path(f).filename();
    CHECK_MESSAGE(slurp(a / rel) == slurp(b / rel), rel.string());
  }
  CHECK(fs::exists(a / "trace.csv"));
  CHECK(fs::exists(a / "summary.json"));
  const std::string header = slurp(a / "trace.csv").substr(0, slurp(a / "trace.csv").find('\n'));
  CHECK(header.rfind("k,f_gap,E,E_alpha,sum22_prefix,sum23_prefix,tilde_grad_norm_sq,bound21_rhs", 0) == 0);
  fs::remove_all(a);
  fs::remove_all(b);

  json bad = cfg;
  bad.erase("K");
  CHECK(error_of([&] { run_experiment(bad, fresh_dir("bad")); }).find("K: missing") != std::string::npos);
}
