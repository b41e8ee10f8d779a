#pragma once

#include <span>
#include <vector>

#include "imr/engine.hpp"

namespace imr {

/// Optional projection of a random variable (or process) along one path.
struct ProjectionPath {
  std::vector<double> right;  // E[xi | G_t] for t = t_0..t_N
  std::vector<double> left;   // E[xi | G_t^-]; left[0] is NaN (no left limit at t_0)
  std::vector<InformationState> states;  // right information state per step
};

/// {Z_M = z} for the pieces of an information state.
ConditioningEvent marks_event(const InformationState& state);
/// {Z_M = z} and {A^M_t} (side right) or {A^M_{t-}} (side left).
ConditioningEvent cell_event(const InformationState& state, int step, Side side);
/// Odd indices of M_I = M \ (I u (I-1)): the active pieces not touched by the joint event.
std::vector<int> untouched_indices(const std::vector<int>& active_set, const IndexSet& indices);

/// E[xi | G_t] (or G_t^-) on the cell of path i, via E_M[xi 1^M_t] / E_M[1^M_t].
double conditional_on_information(const ExactEngine& engine, const BoundFunctional& xi,
                                  std::size_t path, int step, Side side);

/// Ratio-formula projection: E_M[xi 1^M_t] / E_M[1^M_t] with M the active set of the path.
std::vector<ProjectionPath> optional_projection(const ExactEngine& engine, const BoundFunctional& xi);

/// Projection by direct grouping of paths into information-state cells (no conditioning vocabulary).
std::vector<ProjectionPath> partition_projection(const PathSpace& space, std::span<const double> xi);

/// Per-time projection of a process; the left value at t_k projects X_{t_k-} = X_{t_{k-1}}.
std::vector<ProjectionPath> projection_process(const ExactEngine& engine, const ProcessValues& x);

/// sup_t 1^M_t / E_M[1^M_t] along each path.
std::vector<double> bounded_fraction_diagnostic(const ExactEngine& engine);

}  // namespace imr
