#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "imr/model.hpp"

namespace imr {

/// Closed-form evaluator of a random variable xi on a path.
using PathFunctional = std::function<double(const PathRecord&)>;
/// Time-indexed path functional X_t, evaluated at grid steps.
using ProcessFunctional = std::function<double(const PathRecord&, int step)>;
/// Values of a process on a path space, indexed [step][path].
using ProcessValues = std::vector<std::vector<double>>;

/// A finite weighted sample space of paths: the enumerated tree or an empirical sample.
///
/// Per path and step the information state (right side) and the joint event are
/// precomputed and interned, so states and events can be compared by id.
class PathSpace {
 public:
  PathSpace(ScenarioModel model, std::vector<PathRecord> paths, std::vector<double> weights);

  /// All paths of the tree, weighted by their probabilities.
  static PathSpace enumerate(const ScenarioModel& model, std::size_t max_paths = 5'000'000);
  /// Empirical measure of a sample: identical paths are merged, weight = count / n.
  static PathSpace empirical(const ScenarioModel& model, const std::vector<PathRecord>& sample);
  /// Empirical space from distinct paths with their sample counts (weights count / total).
  static PathSpace from_counts(const ScenarioModel& model, std::vector<PathRecord> paths,
                               std::vector<std::size_t> counts);

  const ScenarioModel& model() const { return model_; }
  std::size_t size() const { return paths_.size(); }
  int steps() const { return model_.steps(); }
  const PathRecord& path(std::size_t i) const { return paths_[i]; }
  const std::vector<PathRecord>& paths() const { return paths_; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  /// Sample counts behind the weights (1 for every enumerated path).
  std::size_t count(std::size_t i) const { return counts_[i]; }

  /// Id of the information state of path i at step; ids are interned per (side, step).
  int state_id(std::size_t i, int step, Side side = Side::right) const;
  const InformationState& state(std::size_t i, int step, Side side = Side::right) const;
  const InformationState& state_by_id(int step, int id, Side side = Side::right) const;
  int state_count(int step, Side side = Side::right) const;

  /// Bitmask of active pieces (bit i-1 for piece i) under the interval conventions of `side`.
  std::uint64_t active_mask(std::size_t i, int step, Side side) const;

  int event_id(std::size_t i, int step) const { return event_ids_[idx(step)][i]; }
  const JointEvent& event_by_id(int step, int id) const { return events_[idx(step)][idx(id)]; }
  int event_count(int step) const { return static_cast<int>(events_[idx(step)].size()); }
  /// Id of an event at a step, or -1 if it never occurs there.
  int find_event(int step, const JointEvent& event) const;
  const std::vector<std::size_t>& paths_with_event(int step, int id) const {
    return event_paths_[idx(step)][idx(id)];
  }

  /// Id of the history prefix (events at steps 1..step) of path i.
  int prefix_id(std::size_t i, int step) const { return prefix_ids_[idx(step)][i]; }

  std::vector<double> evaluate(const PathFunctional& xi) const;
  ProcessValues evaluate(const ProcessFunctional& x) const;

 private:
  static std::size_t idx(int v) { return static_cast<std::size_t>(v); }
  void build_indices();

  ScenarioModel model_;
  std::vector<PathRecord> paths_;
  std::vector<double> weights_;
  std::vector<std::size_t> counts_;

  // [side][step][path] and [side][step][id]; side 0 = right, 1 = left (empty at step 0)
  std::vector<std::vector<int>> state_ids_[2];
  std::vector<std::vector<InformationState>> states_[2];
  std::vector<std::vector<std::uint64_t>> right_masks_;  // [step][path]
  std::vector<std::vector<std::uint64_t>> left_masks_;
  std::vector<std::vector<int>> event_ids_;  // [step][path], id 0 is the empty event
  std::vector<std::vector<JointEvent>> events_;
  std::vector<std::vector<std::vector<std::size_t>>> event_paths_;
  std::vector<std::vector<int>> prefix_ids_;
};

/// Atomic conditions of the conditioning vocabulary.
struct MarksEqual {
  std::vector<int> pieces;  // 1-based
  std::vector<int> marks;   // may contain kNullMark
};
struct JointEventIs {
  int step = 0;
  JointEvent event;
};
struct ActiveSetIs {
  int step = 0;
  Side side = Side::right;
  std::uint64_t mask = 0;  // bit i-1 for piece i
};
struct EventCountIs {
  int step = 0;
  int count = 0;  // Delta_t in {0, 1}
};

using Condition = std::variant<MarksEqual, JointEventIs, ActiveSetIs, EventCountIs>;

/// Conjunction of atomic conditions evaluated on paths of a PathSpace.
class ConditioningEvent {
 public:
  ConditioningEvent() = default;

  ConditioningEvent& marks_equal(std::vector<int> pieces, std::vector<int> marks);
  /// Z_M = z for an active set given as odd indices.
  ConditioningEvent& marks_equal_indices(const std::vector<int>& odd_indices,
                                         const std::vector<int>& marks);
  ConditioningEvent& joint_event(int step, JointEvent event);
  ConditioningEvent& active_set(int step, Side side, std::uint64_t mask);
  /// A^M_t (or A^M_{t-}) for an active set given as odd indices.
  ConditioningEvent& active_set_indices(int step, Side side, const std::vector<int>& odd_indices);
  ConditioningEvent& event_count(int step, int count);

  bool holds(const PathSpace& space, std::size_t i) const;
  const std::vector<Condition>& conditions() const { return conditions_; }
  const std::string& key() const { return key_; }

 private:
  void append_key(const std::string& part);

  std::vector<Condition> conditions_;
  std::string key_;
};

std::uint64_t mask_of_indices(const std::vector<int>& odd_indices);

class ExactEngine;

/// Integrals of one fixed random variable against conditioning events, memoized per event.
class BoundFunctional {
 public:
  BoundFunctional(const ExactEngine& engine, std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  /// Sum of weight * xi over paths in the event.
  double integral(const ConditioningEvent& event) const;
  /// E[xi | event] with 0/0 := 0.
  double conditional_expectation(const ConditioningEvent& event) const;

 private:
  const ExactEngine* engine_;
  std::vector<double> values_;
  mutable std::unordered_map<std::string, double> memo_;
};

/// Exact conditional probabilities and expectations on a finite path space.
///
/// Conditional laws are elementary ratios over matching paths; a zero denominator
/// yields 0 and is counted in zero_denominator_count().
class ExactEngine {
 public:
  explicit ExactEngine(const PathSpace& space) : space_(&space) {}
  ExactEngine(const ExactEngine&) = delete;
  ExactEngine& operator=(const ExactEngine&) = delete;

  const PathSpace& space() const { return *space_; }
  const ScenarioModel& model() const { return space_->model(); }

  /// Paths satisfying the event (uses the event index to narrow candidates).
  std::vector<std::size_t> matching(const ConditioningEvent& event) const;
  /// P(event), memoized.
  double probability(const ConditioningEvent& event) const;
  /// P(a | given) with 0/0 := 0; `a` is intersected with `given` before evaluation.
  double conditional_probability(const ConditioningEvent& a, const ConditioningEvent& given) const;
  /// Sum of weight * xi over the event (not memoized).
  double integral(std::span<const double> xi, const ConditioningEvent& event) const;
  /// E[xi | event] = integral / probability with 0/0 := 0.
  double conditional_expectation(std::span<const double> xi, const ConditioningEvent& event) const;

  BoundFunctional bind(std::vector<double> xi) const { return BoundFunctional(*this, std::move(xi)); }

  /// Ratio with the 0/0 := 0 convention; counts zero denominators.
  double ratio(double numerator, double denominator) const;
  std::size_t zero_denominator_count() const { return zero_denominators_.load(); }

 private:
  const PathSpace* space_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, double> probability_memo_;
  mutable std::atomic<std::size_t> zero_denominators_{0};
};

/// Concatenation of two conjunctions.
ConditioningEvent operator&(ConditioningEvent a, const ConditioningEvent& b);

}  // namespace imr
