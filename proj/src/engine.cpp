#include "imr/engine.hpp"

#include <algorithm>
#include <map>

namespace imr {

// ---------------------------------------------------------------------------
// PathSpace

PathSpace::PathSpace(ScenarioModel model, std::vector<PathRecord> paths, std::vector<double> weights)
    : model_(std::move(model)), paths_(std::move(paths)), weights_(std::move(weights)) {
  if (paths_.size() != weights_.size()) throw ModelError("path space: weights/paths size mismatch");
  counts_.assign(paths_.size(), 1);
  for (const auto& p : paths_)
    if (p.steps() != model_.steps() || p.max_pieces() != model_.max_pieces())
      throw ModelError("path space: path does not match the model dimensions");
  build_indices();
}

PathSpace PathSpace::enumerate(const ScenarioModel& model, std::size_t max_paths) {
  auto paths = enumerate_paths(model, max_paths);
  std::vector<double> w;
  w.reserve(paths.size());
  for (const auto& p : paths) w.push_back(p.probability);
  return PathSpace(model, std::move(paths), std::move(w));
}

PathSpace PathSpace::empirical(const ScenarioModel& model, const std::vector<PathRecord>& sample) {
  if (sample.empty()) throw ModelError("empirical path space: empty sample");
  std::map<std::vector<CompositeEvent>, std::pair<std::size_t, std::size_t>> groups;  // -> (first, count)
  for (std::size_t i = 0; i < sample.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(sample[i].events, i, 0);
    ++it->second.second;
  }
  std::vector<PathRecord> paths;
  std::vector<std::size_t> counts;
  for (const auto& [events, entry] : groups) {
    paths.push_back(sample[entry.first]);
    counts.push_back(entry.second);
  }
  return from_counts(model, std::move(paths), std::move(counts));
}

PathSpace PathSpace::from_counts(const ScenarioModel& model, std::vector<PathRecord> paths,
                                 std::vector<std::size_t> counts) {
  if (paths.size() != counts.size()) throw ModelError("empirical path space: counts/paths size mismatch");
  std::size_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw ModelError("empirical path space: empty sample");
  std::vector<double> weights;
  for (auto c : counts) weights.push_back(static_cast<double>(c) / static_cast<double>(total));
  PathSpace space(model, std::move(paths), std::move(weights));
  space.counts_ = std::move(counts);
  return space;
}

void PathSpace::build_indices() {
  const int n = steps();
  const std::size_t np = paths_.size();
  const auto steps_sz = static_cast<std::size_t>(n + 1);
  for (auto side : {0, 1}) {
    state_ids_[side].assign(steps_sz, std::vector<int>(np, -1));
    states_[side].assign(steps_sz, {});
  }
  right_masks_.assign(steps_sz, std::vector<std::uint64_t>(np, 0));
  left_masks_.assign(steps_sz, std::vector<std::uint64_t>(np, 0));
  event_ids_.assign(steps_sz, std::vector<int>(np, 0));
  events_.assign(steps_sz, {JointEvent{}});
  event_paths_.assign(steps_sz, {{}});
  prefix_ids_.assign(steps_sz, std::vector<int>(np, 0));

  for (int k = 0; k <= n; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    std::map<InformationState, int> interned[2];
    std::map<JointEvent, int> event_index{{JointEvent{}, 0}};
    std::map<std::pair<int, int>, int> prefix_index;
    for (std::size_t i = 0; i < np; ++i) {
      const auto& p = paths_[i];
      for (int piece = 1; piece <= p.max_pieces(); ++piece) {
        const auto bit = std::uint64_t{1} << (piece - 1);
        if (p.active(piece, k, Side::right)) right_masks_[ks][i] |= bit;
        if (k > 0 && p.active(piece, k, Side::left)) left_masks_[ks][i] |= bit;
      }
      for (int side = 0; side < 2; ++side) {
        if (side == 1 && k == 0) continue;
        auto s = information_state(p, k, side == 0 ? Side::right : Side::left);
        auto [it, inserted] = interned[side].try_emplace(std::move(s),
                                                         static_cast<int>(interned[side].size()));
        if (inserted) states_[side][ks].push_back(it->first);
        state_ids_[side][ks][i] = it->second;
      }
      if (k > 0) {
        auto ev = p.joint_event(k);
        auto [it, inserted] = event_index.try_emplace(ev, static_cast<int>(event_index.size()));
        if (inserted) {
          events_[ks].push_back(ev);
          event_paths_[ks].emplace_back();
        }
        event_ids_[ks][i] = it->second;
        event_paths_[ks][static_cast<std::size_t>(it->second)].push_back(i);

        const int parent = prefix_ids_[ks - 1][i];
        auto [pit, pins] = prefix_index.try_emplace({parent, it->second},
                                                    static_cast<int>(prefix_index.size()));
        prefix_ids_[ks][i] = pit->second;
      } else {
        event_paths_[0][0].push_back(i);
      }
    }
  }
}

int PathSpace::state_id(std::size_t i, int step, Side side) const {
  if (side == Side::left && step == 0) throw ModelError("left information undefined at t = 0");
  return state_ids_[side == Side::right ? 0 : 1][idx(step)][i];
}

const InformationState& PathSpace::state(std::size_t i, int step, Side side) const {
  return state_by_id(step, state_id(i, step, side), side);
}

const InformationState& PathSpace::state_by_id(int step, int id, Side side) const {
  return states_[side == Side::right ? 0 : 1][idx(step)][idx(id)];
}

int PathSpace::state_count(int step, Side side) const {
  return static_cast<int>(states_[side == Side::right ? 0 : 1][idx(step)].size());
}

std::uint64_t PathSpace::active_mask(std::size_t i, int step, Side side) const {
  return side == Side::right ? right_masks_[idx(step)][i] : left_masks_[idx(step)][i];
}

int PathSpace::find_event(int step, const JointEvent& event) const {
  const auto& evs = events_[idx(step)];
  for (std::size_t j = 0; j < evs.size(); ++j)
    if (evs[j] == event) return static_cast<int>(j);
  return -1;
}

std::vector<double> PathSpace::evaluate(const PathFunctional& xi) const {
  std::vector<double> out;
  out.reserve(paths_.size());
  for (const auto& p : paths_) out.push_back(xi(p));
  return out;
}

ProcessValues PathSpace::evaluate(const ProcessFunctional& x) const {
  ProcessValues out(idx(steps() + 1), std::vector<double>(paths_.size()));
  for (int k = 0; k <= steps(); ++k)
    for (std::size_t i = 0; i < paths_.size(); ++i) out[idx(k)][i] = x(paths_[i], k);
  return out;
}

// ---------------------------------------------------------------------------
// ConditioningEvent

std::uint64_t mask_of_indices(const std::vector<int>& odd_indices) {
  std::uint64_t m = 0;
  for (int idx : odd_indices) m |= std::uint64_t{1} << ((idx + 1) / 2 - 1);
  return m;
}

void ConditioningEvent::append_key(const std::string& part) {
  if (!key_.empty()) key_ += '&';
  key_ += part;
}

ConditioningEvent& ConditioningEvent::marks_equal(std::vector<int> pieces, std::vector<int> marks) {
  std::string k = "Z[";
  for (std::size_t j = 0; j < pieces.size(); ++j)
    k += std::to_string(pieces[j]) + ":" + std::to_string(marks[j]) + ",";
  append_key(k + "]");
  conditions_.emplace_back(MarksEqual{std::move(pieces), std::move(marks)});
  return *this;
}

ConditioningEvent& ConditioningEvent::marks_equal_indices(const std::vector<int>& odd_indices,
                                                          const std::vector<int>& marks) {
  std::vector<int> pieces;
  pieces.reserve(odd_indices.size());
  for (int idx : odd_indices) pieces.push_back((idx + 1) / 2);
  return marks_equal(std::move(pieces), marks);
}

ConditioningEvent& ConditioningEvent::joint_event(int step, JointEvent event) {
  std::string k = "R" + std::to_string(step) + "[";
  for (std::size_t j = 0; j < event.indices.size(); ++j)
    k += std::to_string(event.indices[j]) + ":" + std::to_string(event.marks[j]) + ",";
  append_key(k + "]");
  conditions_.emplace_back(JointEventIs{step, std::move(event)});
  return *this;
}

ConditioningEvent& ConditioningEvent::active_set(int step, Side side, std::uint64_t mask) {
  append_key("A" + std::to_string(step) + (side == Side::right ? "r" : "l") + std::to_string(mask));
  conditions_.emplace_back(ActiveSetIs{step, side, mask});
  return *this;
}

ConditioningEvent& ConditioningEvent::active_set_indices(int step, Side side,
                                                         const std::vector<int>& odd_indices) {
  return active_set(step, side, mask_of_indices(odd_indices));
}

ConditioningEvent& ConditioningEvent::event_count(int step, int count) {
  append_key("D" + std::to_string(step) + ":" + std::to_string(count));
  conditions_.emplace_back(EventCountIs{step, count});
  return *this;
}

bool ConditioningEvent::holds(const PathSpace& space, std::size_t i) const {
  const auto& p = space.path(i);
  for (const auto& c : conditions_) {
    const bool ok = std::visit(
        [&](const auto& cond) -> bool {
          using T = std::decay_t<decltype(cond)>;
          if constexpr (std::is_same_v<T, MarksEqual>) {
            for (std::size_t j = 0; j < cond.pieces.size(); ++j)
              if (p.marks[static_cast<std::size_t>(cond.pieces[j] - 1)] != cond.marks[j]) return false;
            return true;
          } else if constexpr (std::is_same_v<T, JointEventIs>) {
            if (cond.step < 1 || cond.step > space.steps()) return false;
            return space.event_by_id(cond.step, space.event_id(i, cond.step)) == cond.event;
          } else if constexpr (std::is_same_v<T, ActiveSetIs>) {
            return space.active_mask(i, cond.step, cond.side) == cond.mask;
          } else {
            const bool any = !p.events[static_cast<std::size_t>(cond.step)].empty();
            return (any ? 1 : 0) == cond.count;
          }
        },
        c);
    if (!ok) return false;
  }
  return true;
}

ConditioningEvent operator&(ConditioningEvent a, const ConditioningEvent& b) {
  for (const auto& c : b.conditions()) {
    std::visit(
        [&](const auto& cond) {
          using T = std::decay_t<decltype(cond)>;
          if constexpr (std::is_same_v<T, MarksEqual>) a.marks_equal(cond.pieces, cond.marks);
          else if constexpr (std::is_same_v<T, JointEventIs>) a.joint_event(cond.step, cond.event);
          else if constexpr (std::is_same_v<T, ActiveSetIs>) a.active_set(cond.step, cond.side, cond.mask);
          else a.event_count(cond.step, cond.count);
        },
        c);
  }
  return a;
}

// ---------------------------------------------------------------------------
// ExactEngine

std::vector<std::size_t> ExactEngine::matching(const ConditioningEvent& event) const {
  const auto& space = *space_;
  const std::vector<std::size_t>* candidates = nullptr;
  for (const auto& c : event.conditions()) {
    if (const auto* j = std::get_if<JointEventIs>(&c)) {
      if (j->step < 1 || j->step > space.steps()) return {};
      const int id = space.find_event(j->step, j->event);
      if (id < 0) return {};
      const auto& list = space.paths_with_event(j->step, id);
      if (!candidates || list.size() < candidates->size()) candidates = &list;
    }
  }
  std::vector<std::size_t> out;
  if (candidates) {
    for (auto i : *candidates)
      if (event.holds(space, i)) out.push_back(i);
  } else {
    for (std::size_t i = 0; i < space.size(); ++i)
      if (event.holds(space, i)) out.push_back(i);
  }
  return out;
}

double ExactEngine::probability(const ConditioningEvent& event) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = probability_memo_.find(event.key()); it != probability_memo_.end()) return it->second;
  }
  double s = 0.0;
  for (auto i : matching(event)) s += space_->weight(i);
  std::lock_guard lock(mutex_);
  probability_memo_.emplace(event.key(), s);
  return s;
}

double ExactEngine::conditional_probability(const ConditioningEvent& a,
                                            const ConditioningEvent& given) const {
  return ratio(probability(a & given), probability(given));
}

double ExactEngine::integral(std::span<const double> xi, const ConditioningEvent& event) const {
  double s = 0.0;
  for (auto i : matching(event)) s += space_->weight(i) * xi[i];
  return s;
}

double ExactEngine::conditional_expectation(std::span<const double> xi,
                                            const ConditioningEvent& event) const {
  return ratio(integral(xi, event), probability(event));
}

double ExactEngine::ratio(double numerator, double denominator) const {
  if (denominator == 0.0) {
    zero_denominators_.fetch_add(1);
    return 0.0;
  }
  return numerator / denominator;
}

BoundFunctional::BoundFunctional(const ExactEngine& engine, std::vector<double> values)
    : engine_(&engine), values_(std::move(values)) {
  if (values_.size() != engine.space().size())
    throw ModelError("functional: value count does not match the path space");
}

double BoundFunctional::integral(const ConditioningEvent& event) const {
  if (auto it = memo_.find(event.key()); it != memo_.end()) return it->second;
  const double v = engine_->integral(values_, event);
  memo_.emplace(event.key(), v);
  return v;
}

double BoundFunctional::conditional_expectation(const ConditioningEvent& event) const {
  return engine_->ratio(integral(event), engine_->probability(event));
}

}  // namespace imr
