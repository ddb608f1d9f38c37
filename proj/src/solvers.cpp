#include "qbench/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "qbench/analytic.hpp"
#include "qbench/error.hpp"
#include "qbench/rng.hpp"

namespace qbench {

std::string toString(TrajectoryMode mode) {
  return mode == TrajectoryMode::Population ? "population" : "archive";
}

TrajectoryMode trajectoryModeFromString(const std::string& name) {
  if (name == "population") return TrajectoryMode::Population;
  if (name == "archive") return TrajectoryMode::Archive;
  throw ValidationError("unknown trajectory mode '" + name + "'");
}

void SolverConfig::validate() const {
  if (population_size < 2) throw ValidationError("population size must be >= 2");
  if (budget < population_size) throw ValidationError("budget must be >= population size");
  if (!(upper_bound > lower_bound)) throw ValidationError("bounds are empty");
  if (!(initial_step_size > 0.0)) throw ValidationError("initial step size must be positive");
  if (mutation_rate && (*mutation_rate < 0.0 || *mutation_rate > 1.0)) {
    throw ValidationError("mutation rate must lie in [0, 1]");
  }
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) {
    throw ValidationError("checkpoints must be ascending");
  }
}

std::vector<std::size_t> defaultCheckpoints(std::size_t budget, std::size_t count,
                                            std::size_t first) {
  std::vector<std::size_t> out;
  if (budget <= first || count < 2) return {budget};
  const double lo = std::log10(static_cast<double>(first));
  const double hi = std::log10(static_cast<double>(budget));
  for (std::size_t k = 0; k < count; ++k) {
    const double e = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
    auto c = static_cast<std::size_t>(std::llround(std::pow(10.0, e)));
    if (k + 1 == count) c = budget;
    if (out.empty() || c > out.back()) out.push_back(c);
  }
  return out;
}

double RunRecord::finalHypervolume(TrajectoryMode mode) const {
  if (trajectory.empty()) return 0.0;
  return mode == TrajectoryMode::Population ? trajectory.back().population_hv
                                            : trajectory.back().archive_hv;
}

std::vector<std::vector<std::size_t>> fastNondominatedSort(std::span<const Point2> points) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> dominated_by_me(n);
  std::vector<std::size_t> domination_count(n, 0);
  std::vector<std::vector<std::size_t>> fronts(1);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (dominates(points[p], points[q])) {
        dominated_by_me[p].push_back(q);
      } else if (dominates(points[q], points[p])) {
        ++domination_count[p];
      }
    }
    if (domination_count[p] == 0) fronts[0].push_back(p);
  }
  if (n == 0) return {};
  while (true) {
    std::vector<std::size_t> next;
    for (std::size_t p : fronts.back())
      for (std::size_t q : dominated_by_me[p])
        if (--domination_count[q] == 0) next.push_back(q);
    if (next.empty()) break;
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(next));
  }
  return fronts;
}

std::vector<double> crowdingDistance(std::span<const Point2> points,
                                     std::span<const std::size_t> front) {
  const std::size_t m = front.size();
  std::vector<double> distance(m, 0.0);
  if (m <= 2) {
    std::fill(distance.begin(), distance.end(), std::numeric_limits<double>::infinity());
    return distance;
  }
  std::vector<std::size_t> order(m);
  for (int objective = 0; objective < 2; ++objective) {
    auto value = [&](std::size_t k) {
      return objective == 0 ? points[front[k]].f1 : points[front[k]].f2;
    };
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
    distance[order.front()] = std::numeric_limits<double>::infinity();
    distance[order.back()] = std::numeric_limits<double>::infinity();
    const double range = value(order.back()) - value(order.front());
    if (range <= 0.0) continue;
    for (std::size_t k = 1; k + 1 < m; ++k) {
      distance[order[k]] += (value(order[k + 1]) - value(order[k - 1])) / range;
    }
  }
  return distance;
}

double sbxSpreadFactor(double u, double eta) {
  const double e = 1.0 / (eta + 1.0);
  return u <= 0.5 ? std::pow(2.0 * u, e) : std::pow(1.0 / (2.0 * (1.0 - u)), e);
}

std::pair<double, double> sbxBlend(double p1, double p2, double beta) {
  return {0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2),
          0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)};
}

std::pair<Vector, Vector> sbxCrossover(const Vector& parent1, const Vector& parent2, double eta,
                                       double lower, double upper, RandomStream& stream) {
  Vector c1 = parent1;
  Vector c2 = parent2;
  for (std::size_t k = 0; k < parent1.size(); ++k) {
    if (stream.nextUniform() >= 0.5) continue;
    const double beta = sbxSpreadFactor(stream.nextUniform(), eta);
    auto [a, b] = sbxBlend(parent1[k], parent2[k], beta);
    if (stream.nextUniform() < 0.5) std::swap(a, b);
    c1[k] = std::clamp(a, lower, upper);
    c2[k] = std::clamp(b, lower, upper);
  }
  return {std::move(c1), std::move(c2)};
}

Vector polynomialMutation(const Vector& x, double eta, double rate, double lower, double upper,
                          RandomStream& stream) {
  Vector y = x;
  const double e = 1.0 / (eta + 1.0);
  for (double& v : y) {
    if (!(stream.nextUniform() < rate)) continue;
    const double u = stream.nextUniform();
    const double shift = u < 0.5 ? std::pow(2.0 * u, e) - 1.0 : 1.0 - std::pow(2.0 * (1.0 - u), e);
    v = std::clamp(v + shift * (upper - lower), lower, upper);
  }
  return y;
}

namespace {

Point2 selectionReference(std::span<const Point2> points) {
  Point2 ref{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Point2& p : points) {
    ref.f1 = std::max(ref.f1, p.f1);
    ref.f2 = std::max(ref.f2, p.f2);
  }
  return {ref.f1 + 1.0, ref.f2 + 1.0};
}

std::vector<Point2> gather(std::span<const Point2> points, std::span<const std::size_t> idx) {
  std::vector<Point2> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(points[i]);
  return out;
}

// Contributions used by selection. The two boundary points of a front are
// never the least contributor: with a reference only 1 beyond the population
// they would be squeezed out whenever the objectives are badly scaled.
std::vector<double> selectionContributions(std::span<const Point2> front, const Point2& ref) {
  auto contrib = hypervolumeContributions(front, ref);
  if (front.empty()) return contrib;
  std::size_t left = 0, bottom = 0;
  for (std::size_t k = 1; k < front.size(); ++k) {
    if (front[k].f1 < front[left].f1) left = k;
    if (front[k].f2 < front[bottom].f2) bottom = k;
  }
  contrib[left] = std::numeric_limits<double>::infinity();
  contrib[bottom] = std::numeric_limits<double>::infinity();
  return contrib;
}

std::vector<Point2> objectivesOf(const std::vector<Individual>& pop) {
  std::vector<Point2> out;
  out.reserve(pop.size());
  for (const auto& ind : pop) out.push_back(ind.f);
  return out;
}

// Nondominated staircase of every point evaluated so far.
class Archive {
 public:
  void insert(const Point2& p) {
    auto it = points_.upper_bound(p.f1);
    if (it != points_.begin() && std::prev(it)->second <= p.f2) return;
    it = points_.lower_bound(p.f1);
    while (it != points_.end() && it->second >= p.f2) it = points_.erase(it);
    points_.emplace(p.f1, p.f2);
  }

  double hypervolume(const Point2& ref) const {
    double hv = 0.0;
    for (auto it = points_.begin(); it != points_.end(); ++it) {
      if (it->first >= ref.f1) break;
      if (it->second >= ref.f2) continue;
      const auto next = std::next(it);
      const double right = next == points_.end() ? ref.f1 : std::min(next->first, ref.f1);
      hv += (right - it->first) * (ref.f2 - it->second);
    }
    return hv;
  }

 private:
  std::map<double, double> points_;
};

// Counts evaluations, maintains the archive and samples the trajectory.
class Recorder {
 public:
  Recorder(const Instance& inst, const SolverConfig& config, std::string solver)
      : inst_(inst),
        frame_(NormalizationFrame::of(inst)),
        checkpoints_(config.checkpoints.empty() ? defaultCheckpoints(config.budget)
                                                : config.checkpoints) {
    record_.class_name = inst.problem_class.name();
    record_.dimension = inst.problem_class.dimension;
    record_.index = inst.index;
    record_.solver = std::move(solver);
    record_.seed = config.seed;
    area_ = (frame_.nadir.f1 - frame_.utopian.f1) * (frame_.nadir.f2 - frame_.utopian.f2);
  }

  Point2 evaluate(const Vector& x) {
    const Objectives f = qbench::evaluate(inst_, x);
    ++record_.evaluations_used;
    archive_.insert(f);
    return f;
  }

  std::size_t evaluations() const { return record_.evaluations_used; }

  void observe(std::span<const Point2> population) {
    while (next_ < checkpoints_.size() && checkpoints_[next_] <= record_.evaluations_used) {
      record_.trajectory.push_back({checkpoints_[next_], frame_.normalizedHypervolume(population),
                                    archive_.hypervolume(frame_.reference) / area_});
      ++next_;
    }
  }

  RunRecord finish() { return std::move(record_); }
  RunRecord& record() { return record_; }

 private:
  const Instance& inst_;
  NormalizationFrame frame_;
  std::vector<std::size_t> checkpoints_;
  std::size_t next_ = 0;
  double area_ = 1.0;
  Archive archive_;
  RunRecord record_;
};

RandomStream solverStream(const std::string& solver, const Instance& inst, std::uint32_t seed) {
  return RandomStream(fnv1a32(solver + ":" + inst.problem_class.name() + ":" +
                              std::to_string(inst.problem_class.dimension) + ":" +
                              std::to_string(inst.index) + ":" + std::to_string(seed)));
}

Vector uniformInBox(std::size_t d, double lower, double upper, RandomStream& stream) {
  Vector x(d);
  for (double& v : x) v = lower + (upper - lower) * stream.nextUniform();
  return x;
}

double mutationRate(const SolverConfig& config, std::size_t d) {
  return config.mutation_rate.value_or(1.0 / static_cast<double>(d));
}

// Rank (front index) of every point.
std::vector<std::size_t> ranksOf(const std::vector<std::vector<std::size_t>>& fronts,
                                 std::size_t n) {
  std::vector<std::size_t> rank(n, 0);
  for (std::size_t r = 0; r < fronts.size(); ++r)
    for (std::size_t i : fronts[r]) rank[i] = r;
  return rank;
}

// Environmental selection for the indicator-based solvers: whole fronts
// while they fit, then drop the smallest contributor of the split front one
// at a time.
std::vector<std::size_t> selectByRankAndContribution(std::span<const Point2> points,
                                                     std::size_t keep) {
  const auto fronts = fastNondominatedSort(points);
  const Point2 ref = selectionReference(points);
  std::vector<std::size_t> chosen;
  for (const auto& front : fronts) {
    if (chosen.size() + front.size() <= keep) {
      chosen.insert(chosen.end(), front.begin(), front.end());
      continue;
    }
    std::vector<std::size_t> remaining = front;
    while (chosen.size() + remaining.size() > keep) {
      const auto contrib = selectionContributions(gather(points, remaining), ref);
      const auto worst = static_cast<std::size_t>(
          std::min_element(contrib.begin(), contrib.end()) - contrib.begin());
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    chosen.insert(chosen.end(), remaining.begin(), remaining.end());
    break;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace

std::size_t smsSelectWorst(std::span<const Point2> points) {
  const auto fronts = fastNondominatedSort(points);
  const auto& worst = fronts.back();
  if (worst.size() == 1) return worst.front();
  const auto contrib = selectionContributions(gather(points, worst), selectionReference(points));
  const auto k = static_cast<std::size_t>(std::min_element(contrib.begin(), contrib.end()) -
                                          contrib.begin());
  return worst[k];
}

RunRecord runNSGA2(const Instance& inst, const SolverConfig& config) {
  config.validate();
  const std::size_t mu = config.population_size;
  const std::size_t d = inst.dimension();
  const double lo = config.lower_bound;
  const double hi = config.upper_bound;
  RandomStream stream = solverStream("nsga2", inst, config.seed);
  Recorder rec(inst, config, "nsga2");

  std::vector<Individual> pop(mu);
  for (auto& ind : pop) {
    ind.x = uniformInBox(d, lo, hi, stream);
    ind.f = rec.evaluate(ind.x);
  }
  rec.observe(objectivesOf(pop));

  while (rec.evaluations() < config.budget) {
    const auto points = objectivesOf(pop);
    const auto fronts = fastNondominatedSort(points);
    const auto rank = ranksOf(fronts, mu);
    std::vector<double> crowding(mu);
    for (const auto& front : fronts) {
      const auto cd = crowdingDistance(points, front);
      for (std::size_t k = 0; k < front.size(); ++k) crowding[front[k]] = cd[k];
    }
    auto tournament = [&] {
      const std::size_t a = stream.nextIndex(mu);
      const std::size_t b = stream.nextIndex(mu);
      if (rank[b] < rank[a] || (rank[b] == rank[a] && crowding[b] > crowding[a])) return b;
      return a;
    };

    const std::size_t offspring_count = std::min(mu, config.budget - rec.evaluations());
    std::vector<Individual> offspring;
    while (offspring.size() < offspring_count) {
      const Individual& p1 = pop[tournament()];
      const Individual& p2 = pop[tournament()];
      Vector c1 = p1.x;
      Vector c2 = p2.x;
      if (stream.nextUniform() < config.crossover_probability) {
        std::tie(c1, c2) = sbxCrossover(p1.x, p2.x, config.sbx_eta, lo, hi, stream);
      }
      for (Vector* child : {&c1, &c2}) {
        if (offspring.size() == offspring_count) break;
        Individual ind;
        ind.x = polynomialMutation(*child, config.mutation_eta, mutationRate(config, d), lo, hi,
                                   stream);
        ind.f = rec.evaluate(ind.x);
        offspring.push_back(std::move(ind));
      }
    }

    std::vector<Individual> combined = std::move(pop);
    combined.insert(combined.end(), std::make_move_iterator(offspring.begin()),
                    std::make_move_iterator(offspring.end()));
    const auto all_points = objectivesOf(combined);
    const auto all_fronts = fastNondominatedSort(all_points);
    pop.clear();
    for (const auto& front : all_fronts) {
      if (pop.size() + front.size() <= mu) {
        for (std::size_t i : front) pop.push_back(combined[i]);
        continue;
      }
      const auto cd = crowdingDistance(all_points, front);
      std::vector<std::size_t> order(front.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return cd[a] > cd[b]; });
      for (std::size_t k = 0; pop.size() < mu; ++k) pop.push_back(combined[front[order[k]]]);
      break;
    }
    rec.observe(objectivesOf(pop));
  }
  return rec.finish();
}

RunRecord runSMSEMOA(const Instance& inst, const SolverConfig& config) {
  config.validate();
  const std::size_t mu = config.population_size;
  const std::size_t d = inst.dimension();
  const double lo = config.lower_bound;
  const double hi = config.upper_bound;
  RandomStream stream = solverStream("smsemoa", inst, config.seed);
  Recorder rec(inst, config, "smsemoa");

  std::vector<Individual> pop(mu);
  for (auto& ind : pop) {
    ind.x = uniformInBox(d, lo, hi, stream);
    ind.f = rec.evaluate(ind.x);
  }
  rec.observe(objectivesOf(pop));

  while (rec.evaluations() < config.budget) {
    const auto rank = ranksOf(fastNondominatedSort(objectivesOf(pop)), mu);
    auto tournament = [&] {
      const std::size_t a = stream.nextIndex(mu);
      const std::size_t b = stream.nextIndex(mu);
      return rank[b] < rank[a] ? b : a;
    };
    const Individual& p1 = pop[tournament()];
    const Individual& p2 = pop[tournament()];
    Vector child = p1.x;
    if (stream.nextUniform() < config.crossover_probability) {
      child = sbxCrossover(p1.x, p2.x, config.sbx_eta, lo, hi, stream).first;
    }
    Individual ind;
    ind.x = polynomialMutation(child, config.mutation_eta, mutationRate(config, d), lo, hi, stream);
    ind.f = rec.evaluate(ind.x);
    pop.push_back(std::move(ind));
    const std::size_t worst = smsSelectWorst(objectivesOf(pop));
    pop.erase(pop.begin() + static_cast<std::ptrdiff_t>(worst));
    rec.observe(objectivesOf(pop));
  }
  return rec.finish();
}

RunRecord runMOCMAES(const Instance& inst, const SolverConfig& config) {
  config.validate();
  const std::size_t mu = config.population_size;
  const std::size_t d = inst.dimension();
  const double n = static_cast<double>(d);
  const double p_target = config.target_success;
  const double c_p = p_target / (2.0 + p_target);
  const double damping = 1.0 + n / 2.0;
  const double c_c = 2.0 / (n + 2.0);
  const double c_cov = 2.0 / (n * n + 6.0);
  const double p_thresh = config.success_threshold;
  RandomStream stream = solverStream("mocmaes", inst, config.seed);
  Recorder rec(inst, config, "mocmaes");

  auto updateStepSize = [&](Individual& a, bool success) {
    a.success = (1.0 - c_p) * a.success + c_p * (success ? 1.0 : 0.0);
    a.sigma *= std::exp((a.success - p_target) / (damping * (1.0 - p_target)));
  };
  auto updateCovariance = [&](Individual& a, const Vector& step) {
    const double norm_cc = std::sqrt(c_c * (2.0 - c_c));
    if (a.success < p_thresh) {
      for (std::size_t i = 0; i < d; ++i) a.path[i] = (1.0 - c_c) * a.path[i] + norm_cc * step[i];
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
          a.covariance(i, j) = (1.0 - c_cov) * a.covariance(i, j) + c_cov * a.path[i] * a.path[j];
    } else {
      for (double& p : a.path) p *= 1.0 - c_c;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
          a.covariance(i, j) = (1.0 - c_cov) * a.covariance(i, j) +
                               c_cov * (a.path[i] * a.path[j] +
                                        c_c * (2.0 - c_c) * a.covariance(i, j));
    }
    try {
      a.factor = cholesky(a.covariance);
    } catch (const NotPositiveDefiniteError&) {
      a.covariance = Matrix::identity(d);
      a.factor = Matrix::identity(d);
      a.path.assign(d, 0.0);
      ++rec.record().covariance_resets;
    }
  };

  std::vector<Individual> pop(mu);
  for (auto& ind : pop) {
    ind.x.assign(d, 0.0);
    for (double& v : ind.x) v = config.initial_step_size * stream.nextGaussian();
    ind.sigma = config.initial_step_size;
    ind.success = p_target;
    ind.path.assign(d, 0.0);
    ind.covariance = Matrix::identity(d);
    ind.factor = Matrix::identity(d);
    ind.f = rec.evaluate(ind.x);
  }
  rec.observe(objectivesOf(pop));

  while (rec.evaluations() < config.budget) {
    const std::size_t lambda = std::min(mu, config.budget - rec.evaluations());
    std::vector<Individual> offspring(lambda);
    std::vector<Vector> steps(lambda);
    for (std::size_t k = 0; k < lambda; ++k) {
      Vector z(d);
      for (double& v : z) v = stream.nextGaussian();
      steps[k] = pop[k].factor * z;
      offspring[k] = pop[k];
      for (std::size_t i = 0; i < d; ++i) offspring[k].x[i] += pop[k].sigma * steps[k][i];
      offspring[k].f = rec.evaluate(offspring[k].x);
    }

    std::vector<Individual> combined = std::move(pop);
    combined.insert(combined.end(), std::make_move_iterator(offspring.begin()),
                    std::make_move_iterator(offspring.end()));
    const auto points = objectivesOf(combined);
    const auto fronts = fastNondominatedSort(points);
    const auto rank = ranksOf(fronts, combined.size());
    const Point2 ref = selectionReference(points);
    std::vector<double> contribution(combined.size(), 0.0);
    for (const auto& front : fronts) {
      const auto c = selectionContributions(gather(points, front), ref);
      for (std::size_t k = 0; k < front.size(); ++k) contribution[front[k]] = c[k];
    }

    for (std::size_t k = 0; k < lambda; ++k) {
      const std::size_t parent = k;
      const std::size_t child = mu + k;
      const bool success =
          rank[child] < rank[parent] ||
          (rank[child] == rank[parent] && contribution[child] > contribution[parent]);
      updateStepSize(combined[parent], success);
      updateStepSize(combined[child], success);
      if (success) updateCovariance(combined[child], steps[k]);
    }

    const auto keep = selectByRankAndContribution(points, mu);
    pop.clear();
    for (std::size_t i : keep) pop.push_back(std::move(combined[i]));
    rec.observe(objectivesOf(pop));
  }
  return rec.finish();
}

const std::vector<std::string>& solverNames() {
  static const std::vector<std::string> names{"nsga2", "smsemoa", "mocmaes"};
  return names;
}

RunRecord runSolver(const std::string& name, const Instance& inst, const SolverConfig& config) {
  if (name == "nsga2") return runNSGA2(inst, config);
  if (name == "smsemoa") return runSMSEMOA(inst, config);
  if (name == "mocmaes") return runMOCMAES(inst, config);
  throw ValidationError("unknown solver '" + name + "'");
}

}  // namespace qbench
