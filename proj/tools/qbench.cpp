#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "qbench/analytic.hpp"
#include "qbench/error.hpp"
#include "qbench/harness.hpp"
#include "qbench/instance_io.hpp"

namespace {

using namespace qbench;

constexpr int kExitValidation = 1;
constexpr int kExitVerification = 2;

// One decision vector per line, comma separated. Lines that do not start
// with a number (headers, comments) are skipped.
std::vector<Vector> readPoints(const std::string& path, std::size_t d) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  std::vector<Vector> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const char c = line[first];
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.')) continue;
    Vector x;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        std::size_t used = 0;
        x.push_back(std::stod(field, &used));
        if (field.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
      }
    }
    if (x.size() != d) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(d) + " coordinates, got " + std::to_string(x.size()));
    }
    points.push_back(std::move(x));
  }
  return points;
}

int printReport(const InvariantReport& report) {
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "ok   " : "FAIL ") << c.name << ' ' << formatNumber(c.value) << '\n';
  }
  std::cout << (report.passed() ? "verified\n" : "verification failed\n");
  return report.passed() ? 0 : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bi-objective convex quadratic benchmark generator"};
  app.require_subcommand(1);

  std::string class_name, gen_out, run_out, agg_out, instance_path, points_path, spec_path, in_dir, group,
      cache_path;
  int dim = 10;
  std::uint64_t index = 0;
  double kappa = kDefaultKappa;
  std::size_t samples = 1001;
  int mu = 0;
  bool full = false;

  auto* gen = app.add_subcommand("generate", "sample an instance and write it as JSON");
  gen->add_option("--class", class_name, "class name, e.g. 7|C")->required();
  gen->add_option("--dim", dim)->required();
  gen->add_option("--index", index)->required();
  gen->add_option("--kappa", kappa);
  gen->add_option("--out", gen_out, "output file, '-' for stdout")->default_val("-");

  auto* eval = app.add_subcommand("evaluate", "objective values of decision vectors");
  eval->add_option("--instance", instance_path)->required();
  eval->add_option("--points", points_path)->required();

  auto* front = app.add_subcommand("front", "sampled Pareto front or optimal mu-distribution");
  front->add_option("--instance", instance_path)->required();
  auto* samples_opt = front->add_option("--samples", samples);
  auto* mu_opt = front->add_option("--mu", mu);
  samples_opt->excludes(mu_opt);
  front->add_option("--cache", cache_path, "mu-distribution cache file");

  auto* verify = app.add_subcommand("verify", "check class invariants and oracles");
  verify->add_option("--class", class_name);
  verify->add_option("--dim", dim);
  verify->add_option("--index", index);
  verify->add_option("--kappa", kappa);
  verify->add_option("--instance", instance_path, "verify a stored instance instead");
  verify->add_flag("--full", full, "add the brute-force grid check (d = 2)");

  auto* run = app.add_subcommand("run", "run an experiment spec");
  run->add_option("--spec", spec_path)->required();
  run->add_option("--out", run_out, "output directory (overrides the spec)");

  auto* agg = app.add_subcommand("aggregate", "median and quantile curves per group");
  agg->add_option("--in", in_dir, "directory holding runs.csv")->required();
  agg->add_option("--group", group)->default_val("all");
  agg->add_option("--out", agg_out)->default_val("-");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitValidation;
  }

  try {
    if (gen->parsed()) {
      const Instance inst = sampleInstance(ProblemClass::parse(class_name, dim, kappa), index);
      if (gen_out == "-") {
        std::cout << instanceToJson(inst) << '\n';
      } else {
        saveInstance(inst, gen_out);
      }
    } else if (eval->parsed()) {
      const Instance inst = loadInstance(instance_path);
      std::cout << "f1,f2\n";
      for (const auto& x : readPoints(points_path, inst.dimension())) {
        const Objectives f = evaluate(inst, x);
        std::cout << formatNumber(f.f1) << ',' << formatNumber(f.f2) << '\n';
      }
    } else if (front->parsed()) {
      const Instance inst = loadInstance(instance_path);
      std::cout << "t,f1,f2\n";
      if (*mu_opt) {
        if (mu < 1) throw ValidationError("--mu must be positive");
        const std::string name = inst.problem_class.name();
        const int d = static_cast<int>(inst.dimension());
        std::vector<MuCacheEntry> cache;
        if (!cache_path.empty() && std::filesystem::exists(cache_path)) cache = loadMuCache(cache_path);
        std::optional<std::vector<double>> t_values;
        for (const auto& e : cache) {
          if (e.class_name == name && e.dimension == d && e.index == inst.index && e.mu == mu) {
            t_values = e.t_values;
          }
        }
        if (!t_values) {
          const MuDistribution md = optimalMuDistribution(inst, mu);
          t_values = md.t_values;
          if (!cache_path.empty()) {
            cache.push_back({name, d, inst.index, mu, md.t_values, md.hypervolume});
            saveMuCache(cache_path, cache);
          }
        }
        for (double t : *t_values) {
          const Objectives f = frontPoint(inst, t);
          std::cout << formatNumber(t) << ',' << formatNumber(f.f1) << ',' << formatNumber(f.f2) << '\n';
        }
      } else {
        if (samples < 2) throw ValidationError("--samples must be at least 2");
        for (std::size_t k = 0; k < samples; ++k) {
          const double t = static_cast<double>(k) / static_cast<double>(samples - 1);
          const Objectives f = frontPoint(inst, t);
          std::cout << formatNumber(t) << ',' << formatNumber(f.f1) << ',' << formatNumber(f.f2) << '\n';
        }
      }
    } else if (verify->parsed()) {
      const VerifyLevel level = full ? VerifyLevel::Full : VerifyLevel::Quick;
      if (!instance_path.empty()) return printReport(verifyInstance(loadInstance(instance_path), level));
      if (class_name.empty()) throw ValidationError("verify needs --class or --instance");
      return printReport(verifyInstance(class_name, dim, index, level, kappa));
    } else if (run->parsed()) {
      std::ifstream in(spec_path);
      if (!in) throw ValidationError("cannot read " + spec_path);
      std::stringstream text;
      text << in.rdbuf();
      ExperimentSpec spec = ExperimentSpec::fromJson(text.str());
      if (!run_out.empty()) spec.output_dir = run_out;
      const auto rows = runExperiment(spec);
      std::cerr << rows.size() << " rows written to " << (spec.output_dir / "runs.csv").string() << '\n';
    } else if (agg->parsed()) {
      const auto path = std::filesystem::path(in_dir) / "runs.csv";
      std::ifstream in(path);
      if (!in) throw ValidationError("cannot read " + path.string());
      const auto rows = aggregate(readRunsCsv(in), groupingFromString(group));
      if (agg_out == "-") {
        writeAggregateCsv(std::cout, rows);
      } else {
        std::ofstream out(agg_out, std::ios::binary);
        if (!out) throw ValidationError("cannot write " + agg_out);
        writeAggregateCsv(out, rows);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
