#include <cmath>
#include <random>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "testutil.hpp"
#include "visivar/visivar.hpp"

using visivar::AxisSpec;
using visivar::BrightnessImage;
using visivar::compute_histogram;
using visivar::default_grid;
using visivar::evaluate_candidate;
using visivar::optimize;
using visivar::OptimizeOptions;
using visivar::SearchGrid;
using visivar::SearchResult;
using visivar::TransformParams;
using visivar::VisibilityReport;

namespace {

void check_same_result(const SearchResult& a, const SearchResult& b) {
  CHECK(a.best_params.a1 == b.best_params.a1);
  CHECK(a.best_params.a2 == b.best_params.a2);
  CHECK(a.best_params.alpha == b.best_params.alpha);
  CHECK(a.best_params.beta == b.best_params.beta);
  CHECK(a.best_params.pivot == b.best_params.pivot);
  CHECK(a.best_report.mean == b.best_report.mean);
  CHECK(a.best_report.variance == b.best_report.variance);
  CHECK(a.best_report.sub_mean_low == b.best_report.sub_mean_low);
  CHECK(a.best_report.sub_mean_high == b.best_report.sub_mean_high);
  CHECK(a.best_report.count_low == b.best_report.count_low);
  CHECK(a.best_report.count_high == b.best_report.count_high);
  CHECK(a.best_report.visibility == b.best_report.visibility);
  CHECK(a.candidates_total == b.candidates_total);
  CHECK(a.candidates_rejected == b.candidates_rejected);
}

}  // namespace

TEST_CASE("axis enumeration is inclusive of both endpoints", "[optimizer]") {
  CHECK(AxisSpec{0.0, 5.0, 0.1}.count() == 51);
  CHECK(AxisSpec{0.0, 3.0, 0.1}.count() == 31);
  CHECK(AxisSpec{0.1, 1.0, 0.1}.count() == 10);
  CHECK(AxisSpec{0.0, 0.0, 0.1}.count() == 1);
  CHECK(AxisSpec{1.0, 2.0, 0.4}.count() == 3);  // 1.0, 1.4, 1.8

  const AxisSpec a{0.0, 5.0, 0.1};
  CHECK(a.value(0) == 0.0);
  CHECK(a.value(45) == Catch::Approx(4.5).margin(1e-12));
  CHECK(a.value(50) == Catch::Approx(5.0).margin(1e-12));

  CHECK_THROWS_AS((AxisSpec{0.0, 1.0, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((AxisSpec{0.0, 1.0, -0.1}.validate()),
                  std::invalid_argument);
  CHECK_THROWS_AS((AxisSpec{2.0, 1.0, 0.1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((AxisSpec{0.0, std::nan(""), 0.1}.validate()),
                  std::invalid_argument);
}

TEST_CASE("axis text form parses", "[optimizer]") {
  const AxisSpec a = visivar::parse_axis("0:5:0.1");
  CHECK(a.start == 0.0);
  CHECK(a.stop == 5.0);
  CHECK(a.step == 0.1);
  CHECK(visivar::parse_axis(" 0.1 : 1 : 0.1 ").count() == 10);

  CHECK_THROWS_AS(visivar::parse_axis("0:5"), std::invalid_argument);
  CHECK_THROWS_AS(visivar::parse_axis("0:5:0.1:7"), std::invalid_argument);
  CHECK_THROWS_AS(visivar::parse_axis("a:b:c"), std::invalid_argument);
  CHECK_THROWS_AS(visivar::parse_axis("1:0:0.1"), std::invalid_argument);
  CHECK_THROWS_AS(visivar::parse_axis(""), std::invalid_argument);
}

TEST_CASE("default lattice matches the published search ranges",
          "[optimizer]") {
  const SearchGrid g = default_grid();
  CHECK(g.a1.count() == 51);
  CHECK(g.a2.count() == 31);
  CHECK(g.alpha.count() == 10);
  CHECK(g.beta.count() == 10);
  CHECK(g.total_candidates() == 158100);
}

TEST_CASE("default lattice never loses to the identity candidate",
          "[optimizer]") {
  // Two occupied tones keep the full 158,100-point sweep cheap. The zero
  // amplitudes put the identity in the lattice, so the winner is bounded
  // below by the untransformed visibility of 1/3.
  const BrightnessImage img(2, 2, {100.0, 200.0, 100.0, 200.0});
  const SearchResult res = optimize(img, default_grid(), {1, false});
  CHECK(res.candidates_total == 158100);
  CHECK(res.best_report.visibility >= 100.0 / 300.0);
}

TEST_CASE("single candidates evaluate through the shared curve path",
          "[optimizer]") {
  const BrightnessImage img(2, 2, {100.0, 100.0, 200.0, 200.0});
  const auto hist = compute_histogram(img);

  const auto identity = evaluate_candidate(hist, {0.0, 0.0, 1.0, 1.0, 150.0});
  REQUIRE(std::holds_alternative<VisibilityReport>(identity));
  const auto& rep = std::get<VisibilityReport>(identity);
  const auto direct =
      visivar::report_from_lut(hist, visivar::identity_curve().lut);
  CHECK(rep.mean == direct.mean);
  CHECK(rep.variance == direct.variance);
  CHECK(rep.visibility == direct.visibility);
  CHECK(rep.visibility == Catch::Approx(100.0 / 300.0).margin(1e-15));

  // A tiny upper-branch amplitude lifts tone 200 to 200 + 0.001*|−55*50|
  // = 202.75 and the spread widens accordingly.
  const auto lifted = evaluate_candidate(hist, {0.0, 0.001, 1.0, 1.0, 150.0});
  REQUIRE(std::holds_alternative<VisibilityReport>(lifted));
  const auto& lifted_rep = std::get<VisibilityReport>(lifted);
  CHECK(lifted_rep.sub_mean_high == Catch::Approx(202.75).margin(1e-15));
  CHECK(lifted_rep.sub_mean_low == 100.0);
  CHECK(lifted_rep.visibility ==
        Catch::Approx(102.75 / 302.75).margin(1e-15));
  CHECK(lifted_rep.visibility > rep.visibility);

  const auto rejected = evaluate_candidate(hist, {1.0, 0.0, 1.0, 1.0, 128.0});
  REQUIRE(std::holds_alternative<visivar::RangeViolation>(rejected));
  CHECK(std::get<visivar::RangeViolation>(rejected).tone == 100);

  CHECK_THROWS_AS(evaluate_candidate(visivar::Histogram{}, TransformParams{}),
                  std::invalid_argument);
}

TEST_CASE("search equals the sequential reference bit for bit",
          "[optimizer]") {
  // 5*4*5*5 = 500 lattice points, identity included via the zero amplitudes.
  const SearchGrid grid{{0.0, 1.0, 0.25},
                        {0.0, 0.75, 0.25},
                        {0.2, 1.0, 0.2},
                        {0.2, 1.0, 0.2}};
  CHECK(grid.total_candidates() == 500);

  std::mt19937 rng(47);
  for (int i = 0; i < 6; ++i) {
    const auto img = testutil::random_tone_image(rng, 8, 8);
    const SearchResult ref = testutil::reference_optimize(img, grid);
    const SearchResult seq = optimize(img, grid, {1, false});
    check_same_result(seq, ref);

    for (int workers : {2, 3, 8}) {
      const SearchResult par = optimize(img, grid, {workers, false});
      check_same_result(par, ref);
    }

    // Identity sits in the grid, so the optimum can only improve on it.
    const auto identity_outcome = evaluate_candidate(
        compute_histogram(img),
        {0.0, 0.0, 0.2, 0.2, visivar::brightness_mean(img)});
    const auto& identity_rep =
        std::get<VisibilityReport>(identity_outcome);
    CHECK(seq.best_report.visibility >= identity_rep.visibility);
    CHECK(seq.best_report.visibility >=
          visivar::report(img).visibility - 1e-9);
  }
}

TEST_CASE("constant images tie every candidate at zero visibility",
          "[optimizer]") {
  const BrightnessImage img(4, 4, std::vector<double>(16, 80.0));
  const SearchGrid grid{{0.0, 0.2, 0.1},
                        {0.0, 0.2, 0.1},
                        {0.1, 0.3, 0.1},
                        {0.1, 0.3, 0.1}};
  const SearchResult r = optimize(img, grid, {1, false});
  // A constant image maps to itself under every candidate (the pivot weight
  // vanishes at the only occupied tone), so the lexicographic-first lattice
  // point wins the tie.
  CHECK(r.best_params.a1 == 0.0);
  CHECK(r.best_params.a2 == 0.0);
  CHECK(r.best_params.alpha == 0.1);
  CHECK(r.best_params.beta == 0.1);
  CHECK(r.best_report.visibility == 0.0);
  CHECK(r.candidates_rejected == 0);
  CHECK(r.best_params.pivot == 80.0);
}

TEST_CASE("searches with no surviving candidate raise", "[optimizer]") {
  // a1 = 5, alpha = 1 throws tone 64 far below zero for every (a2, beta).
  const BrightnessImage img(2, 1, {64.0, 192.0});
  const SearchGrid grid{{5.0, 5.0, 1.0},
                        {0.0, 1.0, 0.5},
                        {1.0, 1.0, 1.0},
                        {0.5, 1.0, 0.5}};
  CHECK_THROWS_AS(optimize(img, grid, {1, false}),
                  visivar::InfeasibleSearchError);
  CHECK_THROWS_AS(optimize(img, grid, {3, false}),
                  visivar::InfeasibleSearchError);
}

TEST_CASE("trace records every candidate in lattice order", "[optimizer]") {
  const BrightnessImage img(2, 1, {64.0, 192.0});
  const SearchGrid grid{{0.0, 1.0, 1.0},    // 0, 1
                        {0.0, 0.0, 1.0},    // 0
                        {0.75, 1.0, 0.25},  // 0.75, 1
                        {1.0, 1.0, 1.0}};   // 1
  OptimizeOptions options;
  options.collect_trace = true;
  const SearchResult r = optimize(img, grid, options);
  REQUIRE(r.trace.size() == 4);

  // Lattice order: beta fastest, then alpha, then a2, then a1.
  CHECK(r.trace[0].a1 == 0.0);
  CHECK(r.trace[0].alpha == 0.75);
  CHECK(r.trace[1].alpha == 1.0);
  CHECK(r.trace[2].a1 == 1.0);

  // a1 = 0 candidates keep the identity; a1 = 1 rejects tone 64.
  CHECK(r.trace[0].accepted);
  CHECK(r.trace[1].accepted);
  CHECK(!r.trace[2].accepted);
  CHECK(!r.trace[3].accepted);
  CHECK(std::isnan(r.trace[2].visibility));
  CHECK(r.candidates_rejected == 2);
  CHECK(r.trace[0].visibility == r.best_report.visibility);

  std::ostringstream ss;
  visivar::write_trace_csv(ss, r);
  const std::string csv = ss.str();
  CHECK(testutil::count_lines(csv) == 5);
  CHECK(csv.substr(0, csv.find('\n')) ==
        "a1,a2,alpha,beta,visibility,variance,accepted");
  CHECK(csv.find(",,0\n") != std::string::npos);
  CHECK(csv.find(",1\n") != std::string::npos);

  // Without the flag no trace is kept.
  CHECK(optimize(img, grid, {1, false}).trace.empty());
}

TEST_CASE("default lattice smoke run on a small image", "[optimizer]") {
  std::mt19937 rng(53);
  const auto img = testutil::random_tone_image(rng, 16, 16, 90, 160);
  const SearchResult r = optimize(img, default_grid(), {0, false});
  CHECK(r.candidates_total == 158100);
  CHECK(r.best_report.visibility >=
        visivar::report(img).visibility - 1e-9);
  CHECK(r.best_report.visibility <= 1.0);
  CHECK(r.candidates_rejected < r.candidates_total);
}
