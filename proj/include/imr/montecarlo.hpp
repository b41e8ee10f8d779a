#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "imr/atoms.hpp"
#include "imr/engine.hpp"

namespace imr {

struct SimulationConfig {
  std::uint64_t seed = 1;
  std::size_t n_paths = 1000;
  std::vector<std::string> targets;  // names of the estimated quantities
  unsigned threads = 1;
};

/// Generator of path i: a private mt19937_64 stream seeded from (seed, i).
std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t path_index);
/// Uniform draw in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng);

/// Samples leaves of the scenario tree; nodes are expanded lazily and cached.
class TreeSampler {
 public:
  explicit TreeSampler(const ScenarioModel& model);

  /// Leaf id of one path drawn with `rng`.
  std::size_t sample(std::mt19937_64& rng);
  const PathRecord& leaf(std::size_t id) const { return leaves_[id]; }
  std::size_t leaf_count() const { return leaves_.size(); }

 private:
  struct Node {
    std::vector<Branch> branches;
    std::vector<double> cumulative;
    std::vector<std::size_t> child;  // node index, or leaf index at the last step; npos until expanded
  };
  std::size_t expand(const History& history);

  const ScenarioModel* model_;
  std::vector<Node> nodes_;
  std::vector<PathRecord> leaves_;
};

/// n_paths i.i.d. draws; output depends only on (model, seed, n_paths), not on threads.
std::vector<PathRecord> simulate_paths(const ScenarioModel& model, const SimulationConfig& config);
/// Empirical path space of a simulation (identical paths merged, weight = count / n).
PathSpace simulate_space(const ScenarioModel& model, const SimulationConfig& config);

struct EstimateCell {
  int step = 0;
  double t = 0.0;
  InformationState state;
  std::string state_key;
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t n_cell = 0;
  bool present = false;  // false: the cell was never visited
};

/// Empirical E[xi | G_t] per (t, information state). Cells are those of `reference`
/// (typically the enumerated space) when given, otherwise those seen in the sample.
std::vector<EstimateCell> estimate_projection(const PathSpace& sample, std::span<const double> xi,
                                              const PathSpace* reference = nullptr);

void write_estimates_csv(std::ostream& out, const std::vector<EstimateCell>& cells);

enum class PartitionSide { forward, backward };

struct PartitionLevel {
  int level = 0;
  double mesh = 0.0;
  std::vector<int> points;   // grid steps of the partition
  std::vector<double> sums;  // per path: sum of E[X_b - X_a | G_a] (forward) or | G_b (backward)
};

struct RefinementDiagnostic {
  PartitionSide side = PartitionSide::forward;
  std::vector<PartitionLevel> levels;  // coarse to fine; the last one is the model grid
  bool capped = false;
  std::string notice;
};

/// Partition sums on the dyadic family: level l uses every 2^(L-l)-th grid step (plus t_N).
RefinementDiagnostic partition_sum_diagnostic(const ExactEngine& engine, const ProcessValues& x,
                                              PartitionSide side, int levels);

void write_diagnostics_csv(std::ostream& out, const RefinementDiagnostic& diag);

/// Cumulative mass of per-path measures: value [k][i] = total mass of path i on (0, t_k].
ProcessValues measure_process(const PathSpace& space, const std::vector<MeasureAtoms>& per_path);

}  // namespace imr
