#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qbench/analytic.hpp"
#include "qbench/error.hpp"
#include "qbench/rng.hpp"
#include "qbench/solvers.hpp"

using namespace qbench;

namespace {

Instance sample(const std::string& name, int d, std::uint64_t index = 0) {
  return sampleInstance(ProblemClass::parse(name, d), index);
}

SolverConfig deskConfig(std::size_t budget = 20000) {
  SolverConfig c;
  c.budget = budget;
  return c;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

std::vector<double> finals(const std::string& solver, const std::string& cls, int instances) {
  std::vector<double> out;
  for (int i = 0; i < instances; ++i) {
    out.push_back(runSolver(solver, sample(cls, 10, static_cast<std::uint64_t>(i)), deskConfig())
                      .finalHypervolume(TrajectoryMode::Population));
  }
  return out;
}

// Two-sided Mann-Whitney U test, normal approximation with tie correction.
double rankSumPValue(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<std::pair<double, int>> all;
  for (double v : a) all.push_back({v, 0});
  for (double v : b) all.push_back({v, 1});
  std::sort(all.begin(), all.end());
  const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
  const double n = n1 + n2;
  double rank_a = 0.0, ties = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double r = 0.5 * static_cast<double>(i + j + 1);
    const double t = static_cast<double>(j - i);
    ties += t * t * t - t;
    for (std::size_t k = i; k < j; ++k)
      if (all[k].second == 0) rank_a += r;
    i = j;
  }
  const double u = rank_a - n1 * (n1 + 1) / 2;
  const double mean = n1 * n2 / 2;
  const double var = n1 * n2 / 12 * ((n + 1) - ties / (n * (n - 1)));
  const double z = (std::abs(u - mean) - 0.5) / std::sqrt(var);
  return std::erfc(std::max(0.0, z) / std::sqrt(2.0));
}

std::vector<std::size_t> bruteRanks(const std::vector<Point2>& pts) {
  std::vector<std::size_t> rank(pts.size(), 0);
  std::vector<bool> done(pts.size(), false);
  for (std::size_t level = 0, left = pts.size(); left > 0; ++level) {
    std::vector<std::size_t> layer;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (done[i]) continue;
      bool dominated = false;
      for (std::size_t j = 0; j < pts.size(); ++j)
        dominated = dominated || (!done[j] && dominates(pts[j], pts[i]));
      if (!dominated) layer.push_back(i);
    }
    for (std::size_t i : layer) {
      rank[i] = level;
      done[i] = true;
      --left;
    }
  }
  return rank;
}

}  // namespace

TEST_CASE("configuration validation and checkpoints") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.population_size = 1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = SolverConfig{};
  c.budget = 10;
  CHECK_THROWS_AS(c.validate(), ValidationError);

  const auto cp = defaultCheckpoints(20000);
  CHECK(cp.front() == 100);
  CHECK(cp.back() == 20000);
  for (std::size_t k = 1; k < cp.size(); ++k) CHECK(cp[k - 1] < cp[k]);
  const bool round_trip = trajectoryModeFromString(toString(TrajectoryMode::Archive)) == TrajectoryMode::Archive;
  CHECK(round_trip);
  CHECK_THROWS_AS(trajectoryModeFromString("best"), ValidationError);
  CHECK_THROWS_AS(runSolver("nsga3", sample("1|C", 3), c), ValidationError);
}

TEST_CASE("fast nondominated sort") {
  std::vector<Point2> flat{{0, 3}, {1, 2}, {2, 1}, {3, 0}};
  CHECK(fastNondominatedSort(flat).size() == 1);
  std::vector<Point2> chain{{2, 2}, {0, 0}, {1, 1}};
  const auto fronts = fastNondominatedSort(chain);
  REQUIRE(fronts.size() == 3);
  CHECK(fronts[0] == std::vector<std::size_t>{1});
  CHECK(fronts[1] == std::vector<std::size_t>{2});
  CHECK(fronts[2] == std::vector<std::size_t>{0});

  RandomStream s(1u);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<Point2> pts(60);
    for (auto& p : pts) p = {std::floor(10 * s.nextUniform()), std::floor(10 * s.nextUniform())};
    const auto want = bruteRanks(pts);
    const auto got = fastNondominatedSort(pts);
    std::size_t covered = 0;
    for (std::size_t r = 0; r < got.size(); ++r) {
      for (std::size_t i : got[r]) CHECK(want[i] == r);
      covered += got[r].size();
    }
    CHECK(covered == pts.size());
  }
}

TEST_CASE("crowding distance") {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<Point2> two{{0, 1}, {1, 0}};
  const std::vector<std::size_t> both{0, 1};
  for (double v : crowdingDistance(two, both)) CHECK(v == inf);

  std::vector<Point2> line{{0, 2}, {1, 1}, {2, 0}};
  const std::vector<std::size_t> all{0, 1, 2};
  const auto cd = crowdingDistance(line, all);
  CHECK(cd[0] == inf);
  CHECK(cd[2] == inf);
  CHECK(cd[1] == doctest::Approx(2.0));

  std::vector<Point2> pts{{0, 5}, {1, 3}, {2, 2.5}, {4, 1}, {7, 0}};
  std::vector<std::size_t> idx{0, 1, 2, 3, 4};
  const auto base = crowdingDistance(pts, idx);
  std::vector<std::size_t> shuffled{3, 0, 4, 2, 1};
  const auto perm = crowdingDistance(pts, shuffled);
  for (std::size_t k = 0; k < 5; ++k) CHECK(perm[k] == base[shuffled[k]]);
}

TEST_CASE("variation operators") {
  CHECK(sbxSpreadFactor(0.5, 20.0) == 1.0);
  const auto [c1, c2] = sbxBlend(-1.5, 2.0, 1.0);
  CHECK(c1 == -1.5);
  CHECK(c2 == 2.0);

  RandomStream s(2u);
  const Vector x{0.0, 1.0, -2.0, 4.9};
  CHECK(polynomialMutation(x, 20.0, 0.0, -5.0, 5.0, s) == x);
  const Vector centre(4, 0.0);
  for (int k = 0; k < 100000; ++k) {
    const Vector y = polynomialMutation(centre, 20.0, 1.0, -5.0, 5.0, s);
    for (double v : y) REQUIRE((v >= -5.0 && v <= 5.0));
  }
  const Vector p1{-5.0, 5.0, 0.0}, p2{5.0, -5.0, 0.1};
  for (int k = 0; k < 10000; ++k) {
    const auto [a, b] = sbxCrossover(p1, p2, 20.0, -5.0, 5.0, s);
    for (std::size_t i = 0; i < 3; ++i) {
      REQUIRE((a[i] >= -5.0 && a[i] <= 5.0));
      REQUIRE((b[i] >= -5.0 && b[i] <= 5.0));
    }
  }
}

TEST_CASE("SMS-EMOA removal") {
  // a dominated point goes first
  std::vector<Point2> withDominated{{0, 1}, {1, 0}, {0.5, 0.5}, {2, 2}};
  CHECK(smsSelectWorst(withDominated) == 3);
  // front boundary points are kept; the interior point with the smaller
  // contribution goes
  std::vector<Point2> front{{0, 10}, {1, 2}, {4, 1.5}, {10, 0}};
  CHECK(smsSelectWorst(front) == 2);
  std::vector<Point2> triple{{0, 1}, {0.9, 0.95}, {1, 0}};
  CHECK(smsSelectWorst(triple) == 1);
}

TEST_CASE("budget, determinism and archive monotonicity") {
  const Instance inst = sample("9/C", 5, 1);
  SolverConfig c = deskConfig(3013);
  for (const auto& solver : solverNames()) {
    const RunRecord a = runSolver(solver, inst, c);
    const RunRecord b = runSolver(solver, inst, c);
    CHECK(a.evaluations_used == c.budget);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t k = 0; k < a.trajectory.size(); ++k) {
      CHECK(a.trajectory[k].population_hv == b.trajectory[k].population_hv);
      CHECK(a.trajectory[k].evaluations == b.trajectory[k].evaluations);
      if (k > 0) {
        CHECK(a.trajectory[k].archive_hv >= a.trajectory[k - 1].archive_hv);
        CHECK(a.trajectory[k].evaluations > a.trajectory[k - 1].evaluations);
      }
      CHECK(a.trajectory[k].archive_hv >= a.trajectory[k].population_hv - 1e-12);
    }
    CHECK(a.trajectory.back().evaluations == c.budget);
    CHECK(a.solver == solver);
    SolverConfig other = c;
    other.seed = 2;
    CHECK(runSolver(solver, inst, other).finalHypervolume(TrajectoryMode::Archive) !=
          a.finalHypervolume(TrajectoryMode::Archive));
  }
}

TEST_CASE("NSGA-II approaches the optimal distribution on a sphere pair") {
  const auto values = finals("nsga2", "1|C", 11);
  std::vector<double> optimal;
  for (int i = 0; i < 11; ++i)
    optimal.push_back(optimalMuDistribution(sample("1|C", 10, static_cast<std::uint64_t>(i)), 20)
                          .normalized_hypervolume);
  CHECK(median(values) >= 0.95 * median(optimal));
}

TEST_CASE("SMS-EMOA tracks NSGA-II on separable aligned classes") {
  std::vector<double> nsga, sms;
  for (const char* cls : {"1|C", "2|C", "3|I", "4|J"}) {
    for (double v : finals("nsga2", cls, 5)) nsga.push_back(v);
    for (double v : finals("smsemoa", cls, 5)) sms.push_back(v);
  }
  CHECK(std::abs(median(nsga) - median(sms)) <= 0.05);
}

TEST_CASE("MO-CMA-ES wins on a rotated ellipsoid pair") {
  const double cma = median(finals("mocmaes", "9/C", 11));
  CHECK(cma > median(finals("nsga2", "9/C", 11)));
  CHECK(cma > median(finals("smsemoa", "9/C", 11)));
}

TEST_CASE("MO-CMA-ES does not notice rotations") {
  CHECK(rankSumPValue(finals("mocmaes", "3|C", 11), finals("mocmaes", "7|C", 11)) > 0.01);
  CHECK(rankSumPValue(finals("mocmaes", "4/C", 11), finals("mocmaes", "8/C", 11)) > 0.01);
}

TEST_CASE("rank-sum helper") {
  CHECK(rankSumPValue({1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}) > 0.9);
  CHECK(rankSumPValue({1, 2, 3, 4, 5, 6, 7, 8}, {11, 12, 13, 14, 15, 16, 17, 18}) < 0.01);
}
