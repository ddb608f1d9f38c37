#include "qbench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "qbench/analytic.hpp"
#include "qbench/error.hpp"
#include "qbench/indicators.hpp"
#include "qbench/rng.hpp"

namespace qbench {

using nlohmann::json;

std::string formatNumber(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

// ---- taxonomy ---------------------------------------------------------------

namespace {

const std::vector<std::string>& taxonomyPanels() {
  static const std::vector<std::string> panels{"C",         "I",         "J",
                                               "aligned",   "non-aligned", "separable",
                                               "non-separable", "rotated"};
  return panels;
}

bool inGroup(const std::string& name, const std::string& group) {
  const int c = name[0] - '0';
  const bool aligned = name[1] == '|';
  if (group == "all") return true;
  if (group == "C" || group == "I" || group == "J") return name[2] == group[0];
  if (group == "aligned") return aligned;
  if (group == "non-aligned") return !aligned;
  if (group == "separable") return c <= 4;
  if (group == "non-separable") return c >= 5;
  if (group == "rotated") return c >= 7;
  if (group == "separable-aligned") return c <= 4 && aligned;
  throw ValidationError("unknown class group '" + group + "'");
}

bool isGroupName(const std::string& s) {
  static const std::set<std::string> names{"all",       "C",         "I",
                                           "J",         "aligned",   "non-aligned",
                                           "separable", "non-separable", "rotated",
                                           "separable-aligned"};
  return names.count(s) > 0;
}

}  // namespace

Grouping groupingFromString(const std::string& name) {
  if (name == "all") return Grouping::All;
  if (name == "shape") return Grouping::Shape;
  if (name == "alignment") return Grouping::Alignment;
  if (name == "separability") return Grouping::Separability;
  if (name == "rotation") return Grouping::Rotation;
  if (name == "taxonomy") return Grouping::Taxonomy;
  if (name == "class") return Grouping::Class;
  throw ValidationError("unknown grouping '" + name + "'");
}

std::string toString(Grouping grouping) {
  switch (grouping) {
    case Grouping::All: return "all";
    case Grouping::Shape: return "shape";
    case Grouping::Alignment: return "alignment";
    case Grouping::Separability: return "separability";
    case Grouping::Rotation: return "rotation";
    case Grouping::Taxonomy: return "taxonomy";
    case Grouping::Class: return "class";
  }
  return "all";
}

std::vector<std::string> classesInGroup(const std::string& group) {
  if (!isGroupName(group)) throw ValidationError("unknown class group '" + group + "'");
  std::vector<std::string> out;
  for (const auto& name : allClassNames())
    if (inGroup(name, group)) out.push_back(name);
  return out;
}

std::vector<std::string> groupsOf(const std::string& class_name, Grouping grouping) {
  checkClassName(class_name);
  switch (grouping) {
    case Grouping::All:
      return {"all"};
    case Grouping::Shape:
      return {std::string(1, class_name[2])};
    case Grouping::Alignment:
      return {class_name[1] == '|' ? "aligned" : "non-aligned"};
    case Grouping::Separability:
      return {class_name[0] <= '4' ? "separable" : "non-separable"};
    case Grouping::Rotation:
      return {class_name[0] >= '7' ? "rotated" : "not-rotated"};
    case Grouping::Taxonomy: {
      std::vector<std::string> out;
      for (const auto& g : taxonomyPanels())
        if (inGroup(class_name, g)) out.push_back(g);
      return out;
    }
    case Grouping::Class:
      return {class_name};
  }
  return {};
}

std::vector<std::string> resolveClasses(const std::vector<std::string>& filter) {
  std::set<std::string> wanted;
  for (const auto& entry : filter) {
    if (isGroupName(entry)) {
      for (const auto& name : classesInGroup(entry)) wanted.insert(name);
    } else {
      checkClassName(entry);
      wanted.insert(entry);
    }
  }
  std::vector<std::string> out;
  for (const auto& name : allClassNames())
    if (wanted.count(name)) out.push_back(name);
  return out;
}

// ---- experiment spec ----------------------------------------------------------

void ExperimentSpec::validate() const {
  if (classes.empty()) throw ValidationError("experiment needs at least one class");
  if (index_count == 0) throw ValidationError("experiment needs at least one instance");
  if (solvers.empty()) throw ValidationError("experiment needs at least one solver");
  if (modes.empty()) throw ValidationError("experiment needs at least one trajectory mode");
  for (const auto& name : resolveClasses(classes)) ProblemClass::parse(name, dimension, kappa);
  for (const auto& s : solvers) {
    const auto& known = solverNames();
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      throw ValidationError("unknown solver '" + s + "'");
    }
  }
  config.validate();
}

ExperimentSpec ExperimentSpec::fromJson(const std::string& text) {
  ExperimentSpec spec;
  try {
    const json j = json::parse(text);
    spec.classes = j.at("classes").get<std::vector<std::string>>();
    spec.dimension = j.value("dimension", spec.dimension);
    spec.kappa = j.value("kappa", spec.kappa);
    spec.index_begin = j.value("index_begin", spec.index_begin);
    spec.index_count = j.value("index_count", spec.index_count);
    spec.solvers = j.at("solvers").get<std::vector<std::string>>();
    if (j.contains("config")) {
      const json& c = j.at("config");
      SolverConfig& cfg = spec.config;
      cfg.population_size = c.value("population_size", cfg.population_size);
      cfg.budget = c.value("budget", cfg.budget);
      cfg.lower_bound = c.value("lower_bound", cfg.lower_bound);
      cfg.upper_bound = c.value("upper_bound", cfg.upper_bound);
      cfg.initial_step_size = c.value("initial_step_size", cfg.initial_step_size);
      cfg.sbx_eta = c.value("sbx_eta", cfg.sbx_eta);
      cfg.crossover_probability = c.value("crossover_probability", cfg.crossover_probability);
      cfg.mutation_eta = c.value("mutation_eta", cfg.mutation_eta);
      if (c.contains("mutation_rate")) cfg.mutation_rate = c.at("mutation_rate").get<double>();
      cfg.target_success = c.value("target_success", cfg.target_success);
      cfg.success_threshold = c.value("success_threshold", cfg.success_threshold);
      cfg.seed = c.value("seed", cfg.seed);
    }
    if (j.contains("checkpoints")) {
      const json& cp = j.at("checkpoints");
      if (cp.is_array()) {
        spec.config.checkpoints = cp.get<std::vector<std::size_t>>();
      } else {
        spec.config.checkpoints = defaultCheckpoints(
            spec.config.budget, cp.value("count", std::size_t{20}), cp.value("first", std::size_t{100}));
      }
    }
    if (j.contains("modes")) {
      spec.modes.clear();
      for (const auto& m : j.at("modes")) spec.modes.push_back(trajectoryModeFromString(m));
    }
    spec.output_dir = j.value("output_dir", std::string("."));
    spec.workers = j.value("workers", spec.workers);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("experiment spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string ExperimentSpec::toJson() const {
  json c;
  c["population_size"] = config.population_size;
  c["budget"] = config.budget;
  c["lower_bound"] = config.lower_bound;
  c["upper_bound"] = config.upper_bound;
  c["initial_step_size"] = config.initial_step_size;
  c["sbx_eta"] = config.sbx_eta;
  c["crossover_probability"] = config.crossover_probability;
  c["mutation_eta"] = config.mutation_eta;
  if (config.mutation_rate) c["mutation_rate"] = *config.mutation_rate;
  c["target_success"] = config.target_success;
  c["success_threshold"] = config.success_threshold;
  c["seed"] = config.seed;
  json j;
  j["classes"] = classes;
  j["dimension"] = dimension;
  j["kappa"] = kappa;
  j["index_begin"] = index_begin;
  j["index_count"] = index_count;
  j["solvers"] = solvers;
  j["config"] = c;
  j["checkpoints"] = config.checkpoints.empty() ? defaultCheckpoints(config.budget)
                                                : config.checkpoints;
  std::vector<std::string> mode_names;
  for (auto m : modes) mode_names.push_back(toString(m));
  j["modes"] = mode_names;
  j["output_dir"] = output_dir.string();
  j["workers"] = workers;
  return j.dump(2);
}

// ---- running ------------------------------------------------------------------

std::vector<RunRecord> runRecords(const ExperimentSpec& spec) {
  spec.validate();
  struct Task {
    std::string class_name;
    std::uint64_t index;
    std::string solver;
  };
  std::vector<Task> tasks;
  for (const auto& name : resolveClasses(spec.classes))
    for (std::uint64_t i = 0; i < spec.index_count; ++i)
      for (const auto& solver : spec.solvers) tasks.push_back({name, spec.index_begin + i, solver});

  std::vector<RunRecord> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      const Instance inst = sampleInstance(
          ProblemClass::parse(tasks[t].class_name, spec.dimension, spec.kappa), tasks[t].index);
      results[t] = runSolver(tasks[t].solver, inst, spec.config);
    }
  };
  std::size_t workers = spec.workers ? spec.workers : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, tasks.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return results;
}

std::vector<CsvRow> toRows(const std::vector<RunRecord>& records,
                           const std::vector<TrajectoryMode>& modes) {
  std::vector<CsvRow> rows;
  for (const auto& r : records)
    for (TrajectoryMode mode : modes)
      for (const auto& p : r.trajectory) {
        rows.push_back({r.class_name, r.dimension, r.index, r.solver, r.seed, p.evaluations,
                        mode == TrajectoryMode::Population ? p.population_hv : p.archive_hv,
                        mode});
      }
  return rows;
}

void writeRunsCsv(std::ostream& out, const std::vector<CsvRow>& rows) {
  out << kRunsCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.class_name << ',' << r.dimension << ',' << r.index << ',' << r.solver << ','
        << r.seed << ',' << r.evaluations << ',' << formatNumber(r.normalized_hv) << ','
        << toString(r.mode) << '\n';
  }
}

namespace {

std::vector<std::string> splitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parseField(const std::string& text, const char* what, std::size_t line_no) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ValidationError("runs CSV line " + std::to_string(line_no) + ": bad " + what + " '" +
                          text + "'");
  }
  return value;
}

}  // namespace

std::vector<CsvRow> readRunsCsv(std::istream& in) {
  std::vector<CsvRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == kRunsCsvHeader) continue;
    const auto f = splitCsvLine(line);
    if (f.size() != 8) {
      throw ValidationError("runs CSV line " + std::to_string(line_no) + ": expected 8 fields");
    }
    CsvRow r;
    r.class_name = f[0];
    checkClassName(r.class_name);
    r.dimension = parseField<int>(f[1], "dimension", line_no);
    r.index = parseField<std::uint64_t>(f[2], "index", line_no);
    r.solver = f[3];
    r.seed = parseField<std::uint32_t>(f[4], "seed", line_no);
    r.evaluations = parseField<std::size_t>(f[5], "evaluations", line_no);
    r.normalized_hv = parseField<double>(f[6], "normalized_hv", line_no);
    r.mode = trajectoryModeFromString(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<CsvRow> runExperiment(const ExperimentSpec& spec) {
  const auto rows = toRows(runRecords(spec), spec.modes);
  std::filesystem::create_directories(spec.output_dir);
  const auto path = spec.output_dir / "runs.csv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  writeRunsCsv(out, rows);
  return rows;
}

// ---- aggregation ----------------------------------------------------------------

double quantileLower(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(sorted.size() - 1)));
  return sorted[std::min(k, sorted.size() - 1)];
}

std::vector<AggregateRow> aggregate(const std::vector<CsvRow>& rows, Grouping grouping) {
  using RunKey = std::tuple<std::string, int, std::uint64_t, std::string, std::uint32_t, int>;
  std::map<RunKey, std::vector<std::size_t>> schedules;
  for (const auto& r : rows) {
    schedules[{r.class_name, r.dimension, r.index, r.solver, r.seed, static_cast<int>(r.mode)}]
        .push_back(r.evaluations);
  }
  const std::vector<std::size_t>* reference = nullptr;
  for (auto& [key, evals] : schedules) {
    std::sort(evals.begin(), evals.end());
    if (!reference) {
      reference = &evals;
    } else if (evals != *reference) {
      throw ValidationError("runs use different checkpoint schedules (e.g. " + std::get<0>(key) +
                            " instance " + std::to_string(std::get<2>(key)) + " " +
                            std::get<3>(key) + ")");
    }
  }

  using GroupKey = std::tuple<std::string, std::string, int, std::size_t>;
  std::map<GroupKey, std::vector<double>> samples;
  for (const auto& r : rows)
    for (const auto& g : groupsOf(r.class_name, grouping))
      samples[{g, r.solver, static_cast<int>(r.mode), r.evaluations}].push_back(r.normalized_hv);

  std::vector<AggregateRow> out;
  for (auto& [key, values] : samples) {
    std::sort(values.begin(), values.end());
    AggregateRow a;
    a.group = std::get<0>(key);
    a.solver = std::get<1>(key);
    a.mode = static_cast<TrajectoryMode>(std::get<2>(key));
    a.evaluations = std::get<3>(key);
    a.median = quantileLower(values, 0.5);
    a.q10 = quantileLower(values, 0.1);
    a.q90 = quantileLower(values, 0.9);
    a.count = values.size();
    out.push_back(std::move(a));
  }
  return out;
}

void writeAggregateCsv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "group,solver,mode,evaluations,median,q10,q90,count\n";
  for (const auto& r : rows) {
    out << r.group << ',' << r.solver << ',' << toString(r.mode) << ',' << r.evaluations << ','
        << formatNumber(r.median) << ',' << formatNumber(r.q10) << ',' << formatNumber(r.q90)
        << ',' << r.count << '\n';
  }
}

// ---- verification ---------------------------------------------------------------

FrontGridCheck bruteForceFrontCheck(const Instance& inst, std::size_t grid, double cells,
                                    std::size_t front_samples) {
  if (inst.dimension() != 2) throw ValidationError("brute-force front check needs d = 2");
  const FrontParam fp = frontParam(inst);
  const double h = 10.0 / static_cast<double>(grid - 1);
  auto coord = [&](std::size_t i) { return -5.0 + h * static_cast<double>(i); };
  auto image = [&](double x0, double x1) {
    const Vector x{x0, x1};
    return fp.normalize(evaluate(inst, x));
  };
  auto gap = [](const Objectives& a, const Objectives& b) {
    return std::hypot(a.f1 - b.f1, a.f2 - b.f2);
  };
  // Largest image displacement under one lattice diagonal step.
  auto diagonalImage = [&](double x0, double x1, const Objectives& at) {
    double m = 0.0;
    for (double s0 : {-h, h})
      for (double s1 : {-h, h}) m = std::max(m, gap(image(x0 + s0, x1 + s1), at));
    return m;
  };

  std::vector<Objectives> values(grid * grid);
  for (std::size_t i = 0; i < grid; ++i)
    for (std::size_t j = 0; j < grid; ++j) values[i * grid + j] = image(coord(i), coord(j));

  std::vector<std::size_t> order(values.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a].f1 < values[b].f1 || (values[a].f1 == values[b].f1 && values[a].f2 < values[b].f2);
  });
  std::vector<std::size_t> nondominated;
  double best_f2 = std::numeric_limits<double>::infinity();
  for (std::size_t k : order) {
    if (values[k].f2 < best_f2) {
      nondominated.push_back(k);
      best_f2 = values[k].f2;
    }
  }

  FrontGridCheck out;
  out.nondominated_points = nondominated.size();
  for (std::size_t k : nondominated) {
    const double x0 = coord(k / grid);
    const double x1 = coord(k % grid);
    const double tol = cells * diagonalImage(x0, x1, values[k]);
    const double dist = normalizedFrontDistance(fp.s, values[k]);
    out.worst_ratio = std::max(out.worst_ratio, tol > 0.0 ? dist / tol : (dist > 0.0 ? INFINITY : 0.0));
  }

  std::size_t covered = 0;
  for (std::size_t m = 0; m < front_samples; ++m) {
    const double t = static_cast<double>(m) / static_cast<double>(front_samples - 1);
    const Vector x = paretoSetPoint(inst, t);
    const Objectives target = fp.normalize(fp.point(t));
    const double tol = cells * diagonalImage(x[0], x[1], image(x[0], x[1]));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k : nondominated) best = std::min(best, gap(values[k], target));
    if (best <= tol) ++covered;
  }
  out.coverage = static_cast<double>(covered) / static_cast<double>(front_samples);
  out.passed = out.worst_ratio <= 1.0 && out.coverage >= 0.99;
  return out;
}

InvariantReport verifyInstance(const Instance& inst, VerifyLevel level) {
  InvariantReport report = classInvariantReport(inst);
  auto add = [&](std::string name, bool passed, double value) {
    report.checks.push_back({std::move(name), passed, value});
  };

  const FrontParam fp = frontParam(inst);
  {
    double worst = 0.0;
    for (int k = 0; k <= 100; ++k) {
      const double t = k / 100.0;
      const Objectives direct = evaluate(inst, paretoSetPoint(inst, t));
      const Objectives oracle = fp.point(t);
      const double e1 = std::abs(direct.f1 - oracle.f1) /
                        std::max(std::abs(oracle.f1), fp.n1 - fp.u1);
      const double e2 = std::abs(direct.f2 - oracle.f2) /
                        std::max(std::abs(oracle.f2), fp.n2 - fp.u2);
      worst = std::max({worst, e1, e2});
    }
    add("oracle_identity", worst <= 1e-10, worst);
  }
  {
    double worst = 0.0;
    for (int k = 0; k <= 100; ++k) {
      worst = std::max(worst, distanceToParetoSet(inst, weightToPoint(inst, k / 100.0)));
    }
    add("weight_point_on_segment", worst <= 1e-9, worst);
  }
  {
    const auto gaps = frontSecondDifferences(inst.s);
    const auto [lo, hi] = std::minmax_element(gaps.begin(), gaps.end());
    bool ok = true;
    double value = 0.0;
    switch (inst.problem_class.shape) {
      case FrontShape::Convex:
        ok = *lo >= -1e-9;
        value = *lo;
        break;
      case FrontShape::Linear:
        value = std::max(std::abs(*lo), std::abs(*hi));
        ok = value <= 1e-9;
        break;
      case FrontShape::Concave:
        ok = *hi <= 1e-9;
        value = *hi;
        break;
    }
    add("front_shape", ok, value);
  }
  if (level == VerifyLevel::Full && inst.dimension() == 2) {
    const FrontGridCheck g = bruteForceFrontCheck(inst);
    add("brute_force_front_distance", g.worst_ratio <= 1.0, g.worst_ratio);
    add("brute_force_front_coverage", g.coverage >= 0.99, g.coverage);
  }
  return report;
}

InvariantReport verifyInstance(const std::string& class_name, int dimension, std::uint64_t index,
                               VerifyLevel level, double kappa) {
  return verifyInstance(sampleInstance(ProblemClass::parse(class_name, dimension, kappa), index),
                        level);
}

}  // namespace qbench
