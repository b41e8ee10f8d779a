#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "imr/atoms.hpp"
#include "imr/engine.hpp"

namespace imr {

/// Forward compensator nu of the counting measures on path i:
/// mass at (u, I, e) is 1^M_{u-} P_{M,R_I=(u,e)}(A^M_{u-}) / P_M(A^M_{u-}) P_M^{R_I}({(u,e)}).
MeasureAtoms compute_nu(const ExactEngine& engine, std::size_t path);
/// Backward compensator rho: the same construction with u in place of u-.
MeasureAtoms compute_rho(const ExactEngine& engine, std::size_t path);
/// Classical compensator: P(event (I, e) at u | full history before u).
MeasureAtoms compute_lambda(const ExactEngine& engine, std::size_t path);

/// mu, nu and rho of one path.
struct PathMeasures {
  MeasureAtoms mu{MeasureKind::mu};
  MeasureAtoms nu{MeasureKind::nu};
  MeasureAtoms rho{MeasureKind::rho};
};

std::vector<PathMeasures> compute_path_measures(const ExactEngine& engine);

/// Integrand F_I(u, e)(omega) of a jump process F.mu; nullopt marks an undefined key.
using IntegrandField = std::function<std::optional<double>(const PathRecord&, const AtomKey&)>;

struct CompensatorPair {
  MeasureAtoms forward{MeasureKind::generic};   // G.nu
  IntegrandTable g{Side::left, {}};
  MeasureAtoms backward{MeasureKind::generic};  // H.rho
  IntegrandTable h{Side::right, {}};
};

/// IF- and IB-compensators of F.mu on path i. Zero-mass atoms are dropped from the products.
CompensatorPair if_ib_compensate(const ExactEngine& engine, std::size_t path, const IntegrandField& f);

/// F.mu on path i as a measure (one atom per nonzero event).
MeasureAtoms integrand_times_mu(const ScenarioModel& model, const PathRecord& path, const IntegrandField& f);

/// Lebesgue measure on [0, t_N] (optional) plus unit Dirac masses at grid points.
struct TimeMeasure {
  bool lebesgue = true;
  std::vector<int> dirac_steps;

  /// Dirac masses given as times; times off the grid are rejected.
  static TimeMeasure from_times(const ScenarioModel& model, bool lebesgue, const std::vector<double>& dirac_times);
  double dirac(int step) const;
};

/// Sojourn rate h(M, t_k) for active odd indices M; may look at the whole path (unobserved marks).
using SojournRate = std::function<double(const std::vector<int>& active, int step, const PathRecord& path)>;

/// Sojourn payments sum_M int 1^M_s h(M,s) gamma(ds) on the grid.
/// Side right: X_k = X_{k-1} + 1^M_{t_k} h(M,t_k) (dt_k + dirac_k).
/// Side left:  Y_k = Y_{k-1} + 1^M_{t_k-} (h(M,t_{k-1}) dt_k + h(M,t_k) dirac_k).
ProcessValues sojourn_process(const PathSpace& space, const SojournRate& h, const TimeMeasure& gamma, Side side);

/// Cumulative drift ledgers along one path: ib for the right form, if_ for the left form.
struct SojournLedger {
  std::vector<double> ib;
  std::vector<double> if_;
};

SojournLedger sojourn_compensator(const ExactEngine& engine, std::size_t path, const SojournRate& h,
                                  const TimeMeasure& gamma);

}  // namespace imr
