// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qbench/analytic.hpp"
#include "qbench/error.hpp"
#include "qbench/harness.hpp"
#include "qbench/indicators.hpp"
#include "qbench/rng.hpp"
#include "qbench/solvers.hpp"

using namespace qbench;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Classes that duplicate an eigenvalue cannot be built below d = 3; those
// are instantiated at d = 3 where d = 2 is asked for.
int buildableDimension(const std::string& name, int d) {
  return ProblemClass::parse(name, 3).needsDuplicateEigenvalue() ? std::max(d, 3) : d;
}

Instance instanceAt(const std::string& name, int d, std::uint64_t index) {
  return sampleInstance(ProblemClass::parse(name, buildableDimension(name, d)), index);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantileLower(v, 0.5);
}

// 1. evaluate(paretoSetPoint(t)) = frontPoint(t)
Outcome oracleIdentity() {
  RandomStream s(101u);
  double worst = 0.0;
  std::size_t checked = 0;
  for (const auto& name : allClassNames())
    for (int d : {2, 10})
      for (std::uint64_t i = 0; i < 20; ++i) {
        const Instance inst = instanceAt(name, d, i);
        const FrontParam fp = frontParam(inst);
        for (int k = 0; k < 100; ++k) {
          const double t = s.nextUniform();
          const Objectives direct = evaluate(inst, paretoSetPoint(inst, t));
          const Objectives oracle = frontPoint(inst, t);
          worst = std::max(worst, std::abs(direct.f1 - oracle.f1) /
                                      std::max(std::abs(oracle.f1), fp.n1 - fp.u1));
          worst = std::max(worst, std::abs(direct.f2 - oracle.f2) /
                                      std::max(std::abs(oracle.f2), fp.n2 - fp.u2));
          ++checked;
        }
      }
  return {worst <= 1e-10, std::to_string(checked) + " points, max relative error " +
                              fmt("%.3g", worst) + " (limit 1e-10)"};
}

// 2. weighted-sum minimizers lie on the segment
Outcome weightedSumConsistency() {
  RandomStream s(202u);
  double worst = 0.0;
  for (const auto& name : allClassNames())
    for (int d : {2, 10})
      for (std::uint64_t i = 0; i < 20; ++i) {
        const Instance inst = instanceAt(name, d, i);
        for (int k = 0; k < 100; ++k)
          worst = std::max(worst, distanceToParetoSet(inst, weightToPoint(inst, s.nextUniform())));
      }
  return {worst <= 1e-9, "max distance to the Pareto set " + fmt("%.3g", worst) + " (limit 1e-9)"};
}

// 3. gradients cancel on the segment and match finite differences
Outcome gradientCancellation() {
  RandomStream s(303u);
  double worst_residual = 0.0, worst_fd = 0.0;
  bool c_inside = true;
  for (const auto& name : allClassNames())
    for (int d : {2, 10})
      for (std::uint64_t i = 0; i < 20; ++i) {
        const Instance inst = instanceAt(name, d, i);
        const std::size_t n = inst.dimension();
        for (int k = 0; k < 50; ++k) {
          const double t = 0.05 + 0.9 * s.nextUniform();
          const Vector x = paretoSetPoint(inst, t);
          const Gradients g = gradient(inst, x);
          // least-squares c minimizing |c g1 + (1 - c) g2|
          const Vector diff = axpy(-1.0, g.g2, g.g1);
          const double c = -dot(g.g2, diff) / dot(diff, diff);
          c_inside = c_inside && c > 0.0 && c < 1.0;
          const Vector comb = axpy(c, diff, g.g2);
          worst_residual = std::max(worst_residual, norm(comb) / (norm(g.g1) + norm(g.g2)));

          const double h = 1e-6 * (1.0 + norm(x));
          Vector fd1(n), fd2(n);
          for (std::size_t j = 0; j < n; ++j) {
            Vector plus = x, minus = x;
            plus[j] += h;
            minus[j] -= h;
            const Objectives fp = evaluate(inst, plus), fm = evaluate(inst, minus);
            fd1[j] = (fp.f1 - fm.f1) / (2.0 * h);
            fd2[j] = (fp.f2 - fm.f2) / (2.0 * h);
          }
          worst_fd = std::max(worst_fd, norm(axpy(-1.0, fd1, g.g1)) / norm(g.g1));
          worst_fd = std::max(worst_fd, norm(axpy(-1.0, fd2, g.g2)) / norm(g.g2));
        }
      }
  return {c_inside && worst_residual <= 1e-7 && worst_fd <= 1e-5,
          std::string("t in [0.05, 0.95], c in (0,1): ") + (c_inside ? "yes" : "no") + ", max residual " +
              fmt("%.3g", worst_residual) + " (limit 1e-7), max finite-difference error " +
              fmt("%.3g", worst_fd) + " (limit 1e-5)"};
}

// 4. brute-force grid front at d = 2
Outcome bruteForceFront() {
  bool ok = true;
  double worst_ratio = 0.0, worst_coverage = 1.0;
  std::size_t checked = 0, rejected = 0;
  for (const auto& name : allClassNames()) {
    if (ProblemClass::parse(name, 3).needsDuplicateEigenvalue()) {
      try {
        ProblemClass::parse(name, 2);
        ok = false;
      } catch (const ValidationError&) {
        ++rejected;
      }
      continue;
    }
    const FrontGridCheck g = bruteForceFrontCheck(sampleInstance(ProblemClass::parse(name, 2), 0));
    ok = ok && g.passed;
    worst_ratio = std::max(worst_ratio, g.worst_ratio);
    worst_coverage = std::min(worst_coverage, g.coverage);
    ++checked;
  }
  return {ok, std::to_string(checked) + " classes on a 600x600 grid: worst distance " +
                  fmt("%.3f", worst_ratio) + " of the 2-diagonal tolerance, min coverage " +
                  fmt("%.4f", worst_coverage) + " (limit 0.99); " + std::to_string(rejected) +
                  " classes (2/, 3/, 4/) need d >= 3 and are rejected at d = 2"};
}

// 5. structural taxonomy at d = 10
Outcome structuralTaxonomy() {
  std::size_t failures = 0, instances = 0;
  std::string first_failure;
  for (const auto& name : allClassNames())
    for (std::uint64_t i = 0; i < 101; ++i) {
      const Instance inst = sampleInstance(ProblemClass::parse(name, 10), i);
      const InvariantReport r = classInvariantReport(inst);
      const bool aligned_ok = inst.problem_class.aligned
                                  ? r.find("delta_axis_aligned") && r.find("delta_axis_aligned")->passed
                                  : true;
      bool kappa_ok = true;
      for (const Matrix* h : {&inst.h1, &inst.h2})
        if (!(*h == Matrix::identity(10)))
          kappa_ok = kappa_ok && std::abs(conditionNumber(*h) / 1e3 - 1.0) <= 1e-9;
      ++instances;
      if (!r.passed() || !aligned_ok || !kappa_ok) {
        ++failures;
        if (first_failure.empty()) {
          first_failure = name + " #" + std::to_string(i);
          for (const auto& f : r.failedChecks()) first_failure += " " + f;
        }
      }
    }
  return {failures == 0, std::to_string(instances) + " instances, " + std::to_string(failures) +
                             " failing" + (first_failure.empty() ? "" : " (first: " + first_failure + ")")};
}

// 6. hypervolume against Monte Carlo, contributions against leave-one-out
Outcome hypervolumeCorrectness() {
  std::mt19937_64 gen(606);
  auto uniform = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  double worst_z = 0.0;
  for (int set = 0; set < 100; ++set) {
    const std::size_t n = 1 + static_cast<std::size_t>(uniform() * 40);
    std::vector<Point2> pts(n);
    for (auto& p : pts) p = {uniform(), uniform()};
    const Point2 ref{0.8 + 0.4 * uniform(), 0.8 + 0.4 * uniform()};
    const double exact = hypervolume2D(pts, ref);

    // dominated region test via the staircase: sorted by f1, running min f2
    auto stairs = nondominatedFilter(pts);
    std::vector<double> xs, ys;
    for (const auto& p : stairs) {
      xs.push_back(p.f1);
      ys.push_back(p.f2);
    }
    const int samples = 10000000;
    long hits = 0;
    for (int k = 0; k < samples; ++k) {
      const double z1 = ref.f1 * uniform(), z2 = ref.f2 * uniform();
      const auto it = std::upper_bound(xs.begin(), xs.end(), z1);
      if (it != xs.begin() && ys[static_cast<std::size_t>(it - xs.begin()) - 1] <= z2) ++hits;
    }
    const double area = ref.f1 * ref.f2;
    const double p = static_cast<double>(hits) / samples;
    const double se = area * std::sqrt(std::max(p * (1 - p), 1e-300) / samples);
    worst_z = std::max(worst_z, std::abs(area * p - exact) / se);
  }

  bool exact_ok = true;
  double worst_rel = 0.0;
  for (int set = 0; set < 100; ++set) {
    std::vector<Point2> grid(40), cont(40);
    for (auto& p : grid) p = {std::floor(1000 * uniform()), std::floor(1000 * uniform())};
    for (auto& p : cont) p = {uniform(), uniform()};
    for (auto* raw : {&grid, &cont}) {
      const auto pts = nondominatedFilter(*raw);
      const Point2 ref = raw == &grid ? Point2{1000, 1000} : Point2{1.1, 1.1};
      const auto c = hypervolumeContributions(pts, ref);
      const double all = hypervolume2D(pts, ref);
      for (std::size_t k = 0; k < pts.size(); ++k) {
        auto rest = pts;
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
        const double loo = all - hypervolume2D(rest, ref);
        if (raw == &grid) {
          exact_ok = exact_ok && c[k] == loo;
        } else {
          worst_rel = std::max(worst_rel, std::abs(c[k] - loo) / all);
        }
      }
    }
  }
  return {worst_z <= 4.0 && exact_ok && worst_rel <= 1e-12,
          "100 sets x 1e7 samples: max deviation " + fmt("%.2f", worst_z) +
              " standard errors (limit 4); leave-one-out on integer sets " +
              (exact_ok ? "bit-identical" : "MISMATCH") + ", on real-valued sets max " +
              fmt("%.2g", worst_rel) + " of the total"};
}

// Exact best chain hypervolume of mu points on a uniform t-grid.
double gridOracle(double s, int mu, int grid, const Objectives& ref) {
  std::vector<double> f1(grid), f2(grid);
  for (int i = 0; i < grid; ++i) {
    const double t = static_cast<double>(i) / (grid - 1);
    f1[i] = std::pow(t, s);
    f2[i] = std::pow(1.0 - t, s);
  }
  std::vector<double> best(grid);
  for (int i = 0; i < grid; ++i) best[i] = (ref.f1 - f1[i]) * (ref.f2 - f2[i]);
  for (int k = 2; k <= mu; ++k) {
    std::vector<double> next(grid, -1.0);
    for (int i = 0; i < grid; ++i)
      for (int j = i + 1; j < grid; ++j)
        next[i] = std::max(next[i], best[j] + (f1[j] - f1[i]) * (ref.f2 - f2[i]));
    best = next;
  }
  return *std::max_element(best.begin(), best.end());
}

// 7. optimal mu-distributions
Outcome optimalMu() {
  bool ok = true;
  double worst = -1.0;
  for (const char* shape : {"C", "I", "J"}) {
    const std::string name = std::string("9/") + shape;
    const double s = ProblemClass::parse(name, 10).power();
    std::map<int, double> oracle;
    for (int mu : {1, 2, 3}) oracle[mu] = gridOracle(s, mu, 2000, {1.1, 1.1});
    for (std::uint64_t i = 0; i < 5; ++i) {
      const Instance inst = sampleInstance(ProblemClass::parse(name, 10), i);
      for (int mu : {1, 2, 3}) {
        const MuDistribution md = optimalMuDistribution(inst, mu);
        const double gap = (oracle[mu] - md.normalized_hypervolume) / oracle[mu];
        worst = std::max(worst, gap);
        ok = ok && gap <= 1e-6;
      }
    }
  }
  Instance sphere;
  sphere.problem_class = ProblemClass::parse("1|C", 2);
  sphere.u1 = sphere.u2 = Matrix::identity(2);
  sphere.d1 = sphere.d2 = {1.0, 1.0};
  sphere.x1_star = {-0.5, 0.0};
  sphere.x2_star = {0.5, 0.0};
  sphere.finalize();
  const double t = optimalMuDistribution(sphere, 1).t_values[0];
  ok = ok && std::abs(t - 0.5) <= 1e-6;
  return {ok, "worst shortfall vs 2000-point grid optimum " + fmt("%.3g", worst) +
                  " relative (limit 1e-6; negative = better than grid); sphere pair mu=1 t=" +
                  fmt("%.9f", t)};
}

// 8. front shapes from instance images
Outcome frontShapes() {
  bool ok = true;
  double worst = 0.0;
  for (const auto& name : allClassNames()) {
    const Instance inst = sampleInstance(ProblemClass::parse(name, 10), 0);
    const FrontParam fp = frontParam(inst);
    const int m = 1001;
    std::vector<Objectives> pts(m);
    for (int k = 0; k < m; ++k) pts[k] = fp.normalize(frontPoint(inst, static_cast<double>(k) / (m - 1)));
    for (int k = 1; k + 1 < m; ++k) {
      const Objectives &a = pts[k - 1], &b = pts[k], &c = pts[k + 1];
      const double chord = a.f2 + (c.f2 - a.f2) * (b.f1 - a.f1) / (c.f1 - a.f1);
      const double gap = chord - b.f2;
      switch (inst.problem_class.shape) {
        case FrontShape::Convex:
          ok = ok && gap >= -1e-9;
          worst = std::max(worst, -gap);
          break;
        case FrontShape::Linear:
          ok = ok && std::abs(gap) <= 1e-9;
          worst = std::max(worst, std::abs(gap));
          break;
        case FrontShape::Concave:
          ok = ok && gap <= 1e-9;
          worst = std::max(worst, gap);
          break;
      }
    }
  }
  return {ok, "54 classes, 1001-point fronts: worst violation " + fmt("%.3g", worst) + " (limit 1e-9)"};
}

// 9. affine invariance of the normalized hypervolume
Outcome affineInvariance() {
  double worst = 0.0;
  const auto names = allClassNames();
  for (int g = 0; g < 20; ++g) {
    const std::string& name = names[static_cast<std::size_t>(g * 53 / 19)];
    const Instance geo = sampleInstance(ProblemClass::parse(name, 10), static_cast<std::uint64_t>(g));
    RandomStream aff1(seedFromKey({name, 10, 1000u + static_cast<std::uint64_t>(g), "aff"}));
    RandomStream aff2(seedFromKey({name, 10, 2000u + static_cast<std::uint64_t>(g), "aff"}));
    const Instance a = geo.withAffine(sampleAffine(aff1));
    const Instance b = geo.withAffine(sampleAffine(aff2));
    std::vector<Point2> pa, pb;
    for (int k = 0; k <= 20; ++k) {
      pa.push_back(frontPoint(a, k / 20.0));
      pb.push_back(frontPoint(b, k / 20.0));
    }
    const double ha = normalizedHypervolume(a, pa), hb = normalizedHypervolume(b, pb);
    worst = std::max(worst, std::abs(ha - hb) / ha);
  }
  return {worst <= 1e-9, "20 geometries: max relative difference " + fmt("%.3g", worst) + " (limit 1e-9)"};
}

struct DeskResults {
  std::map<std::string, std::map<std::string, double>> median;  // group -> solver -> value
  double seconds = 0.0;
};

DeskResults deskRun() {
  const auto start = std::chrono::steady_clock::now();
  ExperimentSpec spec;
  spec.classes = {"all"};
  spec.dimension = 10;
  spec.index_count = 11;
  spec.solvers = solverNames();
  spec.config.population_size = 20;
  spec.config.budget = 20000;
  const auto rows = toRows(runRecords(spec), {TrajectoryMode::Population});
  DeskResults out;
  auto collect = [&](const std::string& group, const std::vector<std::string>& classes) {
    for (const auto& solver : solverNames()) {
      std::vector<double> v;
      for (const auto& r : rows)
        if (r.solver == solver && r.evaluations == spec.config.budget &&
            std::find(classes.begin(), classes.end(), r.class_name) != classes.end())
          v.push_back(r.normalized_hv);
      out.median[group][solver] = median(v);
    }
  };
  for (const char* g : {"C", "I", "J", "aligned", "non-aligned", "separable", "non-separable",
                        "rotated", "separable-aligned"})
    collect(g, classesInGroup(g));
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// 11. running a fixed spec twice through the command line
Outcome reproducibility() {
  const fs::path dir = fs::temp_directory_path() / "qbench_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  ExperimentSpec spec;
  spec.classes = {"1|C", "5/I", "9/J"};
  spec.dimension = 6;
  spec.index_count = 2;
  spec.solvers = solverNames();
  spec.config.budget = 2000;
  spec.modes = {TrajectoryMode::Population, TrajectoryMode::Archive};
  spec.output_dir = dir / "unused";
  {
    std::ofstream out(dir / "spec.json");
    out << spec.toJson();
  }
  std::vector<std::string> data;
  for (const char* run : {"first", "second"}) {
    const std::string cmd = std::string(QBENCH_CLI) + " run --spec " + (dir / "spec.json").string() +
                            " --out " + (dir / run).string() + " 2>/dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "qbench run failed"};
    std::ifstream in(dir / run / "runs.csv", std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    data.push_back(ss.str());
  }
  const auto lines = std::count(data[0].begin(), data[0].end(), '\n');
  return {data[0] == data[1] && lines > 1,
          std::to_string(lines - 1) + " data rows, runs " +
              (data[0] == data[1] ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](const std::string& id, const std::string& title, const Outcome& o) {
    std::printf("%s %-4s %s: %s\n", o.passed ? "PASS" : "FAIL", id.c_str(), title.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failures += o.passed ? 0 : 1;
  };
  auto guarded = [](const std::function<Outcome()>& f) -> Outcome {
    try {
      return f();
    } catch (const std::exception& e) {
      return {false, std::string("exception: ") + e.what()};
    }
  };

  report("1", "oracle identity", guarded(oracleIdentity));
  report("2", "weighted-sum consistency", guarded(weightedSumConsistency));
  report("3", "gradient cancellation", guarded(gradientCancellation));
  report("4", "brute-force front at d=2", guarded(bruteForceFront));
  report("5", "structural taxonomy", guarded(structuralTaxonomy));
  report("6", "hypervolume correctness", guarded(hypervolumeCorrectness));
  report("7", "optimal mu-distribution", guarded(optimalMu));
  report("8", "front shapes", guarded(frontShapes));
  report("9", "affine invariance", guarded(affineInvariance));

  DeskResults desk;
  try {
    desk = deskRun();
  } catch (const std::exception& e) {
    report("10", "desk-scale reproduction", {false, std::string("exception: ") + e.what()});
  }
  if (!desk.median.empty()) {
    auto& m = desk.median;
    const auto& ns = m["non-separable"];
    report("10a", "MO-CMA-ES best on non-separable",
           {ns.at("mocmaes") > ns.at("nsga2") && ns.at("mocmaes") > ns.at("smsemoa"),
            "medians mocmaes " + fmt("%.4f", ns.at("mocmaes")) + ", nsga2 " + fmt("%.4f", ns.at("nsga2")) +
                ", smsemoa " + fmt("%.4f", ns.at("smsemoa"))});
    const double gap_nsga = m["separable-aligned"]["nsga2"] - m["rotated"]["nsga2"];
    const double gap_sms = m["separable-aligned"]["smsemoa"] - m["rotated"]["smsemoa"];
    report("10b", "rotation degrades NSGA-II and SMS-EMOA",
           {gap_nsga > 0.0 && gap_sms > 0.0,
            "separable-aligned minus rotated median: nsga2 " + fmt("%.4f", gap_nsga) + ", smsemoa " +
                fmt("%.4f", gap_sms)});
    auto spread = [&](const std::string& solver) {
      double lo = INFINITY, hi = -INFINITY;
      for (const char* g : {"C", "I", "J", "aligned", "non-aligned", "separable", "non-separable", "rotated"}) {
        lo = std::min(lo, m[g][solver]);
        hi = std::max(hi, m[g][solver]);
      }
      return hi - lo;
    };
    report("10c", "MO-CMA-ES spread below NSGA-II",
           {spread("mocmaes") < spread("nsga2"),
            "median spread over the eight groups: mocmaes " + fmt("%.4f", spread("mocmaes")) + ", nsga2 " +
                fmt("%.4f", spread("nsga2")) + "; desk run took " + fmt("%.0f", desk.seconds) + " s"});
  }
  report("11", "reproducibility", guarded(reproducibility));
  std::printf("%s\n", failures == 0 ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return failures == 0 ? 0 : 1;
}
