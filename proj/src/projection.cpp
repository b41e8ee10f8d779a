#include "imr/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace imr {

ConditioningEvent marks_event(const InformationState& state) {
  ConditioningEvent ev;
  ev.marks_equal_indices(state.active_set, state.active_marks);
  return ev;
}

ConditioningEvent cell_event(const InformationState& state, int step, Side side) {
  ConditioningEvent ev = marks_event(state);
  ev.active_set_indices(step, side, state.active_set);
  return ev;
}

std::vector<int> untouched_indices(const std::vector<int>& active_set, const IndexSet& indices) {
  std::vector<int> out;
  for (int j : active_set) {
    const bool touched = std::find(indices.begin(), indices.end(), j) != indices.end() ||
                         std::find(indices.begin(), indices.end(), j + 1) != indices.end();
    if (!touched) out.push_back(j);
  }
  return out;
}

double conditional_on_information(const ExactEngine& engine, const BoundFunctional& xi,
                                  std::size_t path, int step, Side side) {
  const auto& state = engine.space().state(path, step, side);
  const auto z = marks_event(state);
  const auto cell = cell_event(state, step, side);
  const double pz = engine.probability(z);
  const double e_xi_ind = engine.ratio(xi.integral(cell), pz);
  const double e_ind = engine.ratio(engine.probability(cell), pz);
  return engine.ratio(e_xi_ind, e_ind);
}

namespace {

ProjectionPath blank_path(int steps) {
  ProjectionPath p;
  p.right.assign(static_cast<std::size_t>(steps + 1), 0.0);
  p.left.assign(static_cast<std::size_t>(steps + 1), std::numeric_limits<double>::quiet_NaN());
  return p;
}

}  // namespace

std::vector<ProjectionPath> optional_projection(const ExactEngine& engine, const BoundFunctional& xi) {
  const auto& space = engine.space();
  const int n = space.steps();
  std::vector<ProjectionPath> out;
  out.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    auto p = blank_path(n);
    for (int k = 0; k <= n; ++k) {
      p.states.push_back(space.state(i, k, Side::right));
      p.right[static_cast<std::size_t>(k)] = conditional_on_information(engine, xi, i, k, Side::right);
      if (k > 0) p.left[static_cast<std::size_t>(k)] = conditional_on_information(engine, xi, i, k, Side::left);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ProjectionPath> partition_projection(const PathSpace& space, std::span<const double> xi) {
  const int n = space.steps();
  std::vector<ProjectionPath> out(space.size(), blank_path(n));
  for (int k = 0; k <= n; ++k) {
    for (Side side : {Side::right, Side::left}) {
      if (k == 0 && side == Side::left) continue;
      // group by the literal pair (active mask, marks of active pieces)
      std::map<std::pair<std::uint64_t, std::vector<int>>, std::pair<double, double>> cells;
      std::vector<std::pair<std::uint64_t, std::vector<int>>> keys(space.size());
      for (std::size_t i = 0; i < space.size(); ++i) {
        const auto mask = space.active_mask(i, k, side);
        std::vector<int> marks;
        for (int piece = 1; piece <= space.model().max_pieces(); ++piece)
          if (mask >> (piece - 1) & 1U) marks.push_back(space.path(i).marks[static_cast<std::size_t>(piece - 1)]);
        keys[i] = {mask, std::move(marks)};
        auto& c = cells[keys[i]];
        c.first += space.weight(i) * xi[i];
        c.second += space.weight(i);
      }
      for (std::size_t i = 0; i < space.size(); ++i) {
        const auto& c = cells[keys[i]];
        const double v = c.second > 0.0 ? c.first / c.second : 0.0;
        auto& target = side == Side::right ? out[i].right : out[i].left;
        target[static_cast<std::size_t>(k)] = v;
      }
    }
  }
  for (std::size_t i = 0; i < space.size(); ++i)
    for (int k = 0; k <= n; ++k) out[i].states.push_back(space.state(i, k, Side::right));
  return out;
}

std::vector<ProjectionPath> projection_process(const ExactEngine& engine, const ProcessValues& x) {
  const auto& space = engine.space();
  const int n = space.steps();
  if (static_cast<int>(x.size()) != n + 1) throw ModelError("process: expected one value row per grid step");
  std::vector<BoundFunctional> bound;
  bound.reserve(x.size());
  for (const auto& row : x) bound.push_back(engine.bind(row));

  std::vector<ProjectionPath> out;
  out.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    auto p = blank_path(n);
    for (int k = 0; k <= n; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      p.states.push_back(space.state(i, k, Side::right));
      p.right[ks] = conditional_on_information(engine, bound[ks], i, k, Side::right);
      if (k > 0) p.left[ks] = conditional_on_information(engine, bound[ks - 1], i, k, Side::left);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<double> bounded_fraction_diagnostic(const ExactEngine& engine) {
  const auto& space = engine.space();
  std::vector<double> out(space.size(), 0.0);
  for (std::size_t i = 0; i < space.size(); ++i) {
    for (int k = 0; k <= space.steps(); ++k) {
      const auto& state = space.state(i, k, Side::right);
      const double p = engine.conditional_probability(cell_event(state, k, Side::right), marks_event(state));
      out[i] = std::max(out[i], engine.ratio(1.0, p));
    }
  }
  return out;
}

}  // namespace imr
