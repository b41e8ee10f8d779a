#include "imr/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <thread>

#include "imr/projection.hpp"

namespace imr {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t path_index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(path_index + 0x632BE59BD9B4E019ULL)));
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

TreeSampler::TreeSampler(const ScenarioModel& model) : model_(&model) {
  expand(History(model.max_pieces()));
}

std::size_t TreeSampler::expand(const History& history) {
  Node node;
  node.branches = model_->branches(history);
  double c = 0.0;
  for (const auto& b : node.branches) {
    c += b.probability;
    node.cumulative.push_back(c);
  }
  node.child.assign(node.branches.size(), npos);
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

std::size_t TreeSampler::sample(std::mt19937_64& rng) {
  History history(model_->max_pieces());
  std::size_t node = 0;
  double prob = 1.0;
  const int n = model_->steps();
  for (int k = 1; k <= n; ++k) {
    const double u = uniform01(rng) * nodes_[node].cumulative.back();
    const auto& cum = nodes_[node].cumulative;
    auto j = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    if (j >= cum.size()) j = cum.size() - 1;
    history.push(nodes_[node].branches[j].event);
    prob *= nodes_[node].branches[j].probability;
    std::size_t next = nodes_[node].child[j];
    if (next == npos) {
      if (k == n) {
        leaves_.push_back(make_path(history, model_->max_pieces(), prob));
        next = leaves_.size() - 1;
      } else {
        next = expand(history);
      }
      nodes_[node].child[j] = next;
    }
    if (k == n) return next;
    node = next;
  }
  // zero-step grids are rejected by the model; keep a valid leaf anyway
  if (leaves_.empty()) leaves_.push_back(make_path(history, model_->max_pieces(), 1.0));
  return 0;
}

std::vector<PathRecord> simulate_paths(const ScenarioModel& model, const SimulationConfig& config) {
  if (config.n_paths == 0) throw ModelError("simulation: n_paths must be at least 1");
  std::vector<PathRecord> out(config.n_paths);
  const unsigned threads = std::max(1U, config.threads);
  auto work = [&](std::size_t begin, std::size_t end) {
    TreeSampler sampler(model);
    for (std::size_t i = begin; i < end; ++i) {
      auto rng = path_stream(config.seed, i);
      out[i] = sampler.leaf(sampler.sample(rng));
    }
  };
  if (threads == 1) {
    work(0, config.n_paths);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (config.n_paths + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = std::min(config.n_paths, t * chunk);
      const std::size_t e = std::min(config.n_paths, b + chunk);
      pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

PathSpace simulate_space(const ScenarioModel& model, const SimulationConfig& config) {
  if (config.n_paths == 0) throw ModelError("simulation: n_paths must be at least 1");
  TreeSampler sampler(model);
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < config.n_paths; ++i) {
    auto rng = path_stream(config.seed, i);
    const auto leaf = sampler.sample(rng);
    if (leaf >= counts.size()) counts.resize(leaf + 1, 0);
    ++counts[leaf];
  }
  std::vector<std::size_t> order(sampler.leaf_count());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return sampler.leaf(a) < sampler.leaf(b); });
  std::vector<PathRecord> paths;
  std::vector<std::size_t> kept;
  for (auto j : order) {
    if (j >= counts.size() || counts[j] == 0) continue;
    paths.push_back(sampler.leaf(j));
    kept.push_back(counts[j]);
  }
  return PathSpace::from_counts(model, std::move(paths), std::move(kept));
}

std::vector<EstimateCell> estimate_projection(const PathSpace& sample, std::span<const double> xi,
                                              const PathSpace* reference) {
  const auto& model = sample.model();
  std::vector<EstimateCell> out;
  for (int k = 0; k <= sample.steps(); ++k) {
    struct Acc {
      double n = 0.0, sum = 0.0, sum_sq = 0.0;
    };
    std::map<InformationState, Acc> acc;
    if (reference)
      for (int id = 0; id < reference->state_count(k); ++id) acc[reference->state_by_id(k, id)];
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const auto& st = sample.state(i, k);
      if (reference && !acc.contains(st)) acc[st];
      auto& a = acc[st];
      const auto c = static_cast<double>(sample.count(i));
      a.n += c;
      a.sum += c * xi[i];
      a.sum_sq += c * xi[i] * xi[i];
    }
    for (const auto& [state, a] : acc) {
      EstimateCell cell;
      cell.step = k;
      cell.t = model.time(k);
      cell.state = state;
      cell.state_key = state.key(model);
      cell.n_cell = static_cast<std::size_t>(a.n);
      cell.present = a.n > 0;
      if (cell.present) {
        cell.estimate = a.sum / a.n;
        if (a.n > 1) {
          const double var = std::max(0.0, (a.sum_sq - a.n * cell.estimate * cell.estimate) / (a.n - 1.0));
          cell.stderr_ = std::sqrt(var / a.n);
        }
      }
      out.push_back(std::move(cell));
    }
  }
  return out;
}

void write_estimates_csv(std::ostream& out, const std::vector<EstimateCell>& cells) {
  out << "t,state_key,estimate,stderr,n_cell\n";
  const auto old = out.precision(17);
  for (const auto& c : cells) {
    out << c.t << ',' << c.state_key << ',';
    if (c.present) out << c.estimate << ',' << c.stderr_;
    else out << "absent,absent";
    out << ',' << c.n_cell << '\n';
  }
  out.precision(old);
}

RefinementDiagnostic partition_sum_diagnostic(const ExactEngine& engine, const ProcessValues& x,
                                              PartitionSide side, int levels) {
  const auto& space = engine.space();
  const auto& model = space.model();
  const int n = space.steps();
  if (levels < 1) throw ModelError("partition diagnostic: levels must be at least 1");
  if (static_cast<int>(x.size()) != n + 1) throw ModelError("process: expected one value row per grid step");

  RefinementDiagnostic diag;
  diag.side = side;
  int max_levels = 1;
  while ((1 << max_levels) <= n) ++max_levels;
  if (levels > max_levels) {
    diag.capped = true;
    diag.notice = "levels capped at " + std::to_string(max_levels) + " (grid has " + std::to_string(n) + " steps)";
    levels = max_levels;
  }

  std::map<std::pair<int, int>, std::vector<double>> pair_cache;  // (a, b) -> per-path conditional increment
  auto conditional_increment = [&](int a, int b) -> const std::vector<double>& {
    auto it = pair_cache.find({a, b});
    if (it != pair_cache.end()) return it->second;
    std::vector<double> inc(space.size());
    for (std::size_t i = 0; i < space.size(); ++i)
      inc[i] = x[static_cast<std::size_t>(b)][i] - x[static_cast<std::size_t>(a)][i];
    const auto bound = engine.bind(std::move(inc));
    const int at = side == PartitionSide::forward ? a : b;
    std::vector<double> v(space.size());
    std::map<int, double> memo;
    for (std::size_t i = 0; i < space.size(); ++i) {
      const int id = space.state_id(i, at, Side::right);
      auto m = memo.find(id);
      if (m == memo.end()) m = memo.emplace(id, conditional_on_information(engine, bound, i, at, Side::right)).first;
      v[i] = m->second;
    }
    return pair_cache.emplace(std::make_pair(a, b), std::move(v)).first->second;
  };

  for (int l = 1; l <= levels; ++l) {
    PartitionLevel lv;
    lv.level = l;
    const int stride = 1 << (levels - l);
    for (int k = 0; k < n; k += stride) lv.points.push_back(k);
    lv.points.push_back(n);
    lv.sums.assign(space.size(), 0.0);
    for (std::size_t j = 0; j + 1 < lv.points.size(); ++j) {
      const int a = lv.points[j], b = lv.points[j + 1];
      lv.mesh = std::max(lv.mesh, model.time(b) - model.time(a));
      const auto& v = conditional_increment(a, b);
      for (std::size_t i = 0; i < space.size(); ++i) lv.sums[i] += v[i];
    }
    diag.levels.push_back(std::move(lv));
  }
  return diag;
}

void write_diagnostics_csv(std::ostream& out, const RefinementDiagnostic& diag) {
  out << "path_id,level,mesh,sum\n";
  const auto old = out.precision(17);
  for (const auto& lv : diag.levels)
    for (std::size_t i = 0; i < lv.sums.size(); ++i)
      out << i << ',' << lv.level << ',' << lv.mesh << ',' << lv.sums[i] << '\n';
  out.precision(old);
}

ProcessValues measure_process(const PathSpace& space, const std::vector<MeasureAtoms>& per_path) {
  const int n = space.steps();
  ProcessValues x(static_cast<std::size_t>(n + 1), std::vector<double>(space.size(), 0.0));
  for (std::size_t i = 0; i < space.size(); ++i) {
    std::vector<double> inc(static_cast<std::size_t>(n + 1), 0.0);
    for (const auto& a : per_path[i].atoms()) inc[static_cast<std::size_t>(a.key.step)] += a.mass;
    for (int k = 1; k <= n; ++k)
      x[static_cast<std::size_t>(k)][i] = x[static_cast<std::size_t>(k - 1)][i] + inc[static_cast<std::size_t>(k)];
  }
  return x;
}

}  // namespace imr
