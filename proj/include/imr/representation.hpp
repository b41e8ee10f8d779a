#pragma once

#include <optional>
#include <span>
#include <vector>

#include "imr/atoms.hpp"
#include "imr/engine.hpp"
#include "imr/measures.hpp"

namespace imr {

/// G_I(u-, u, e) in `left` and G_I(u, u, e) in `right`, keyed by (u, I, e).
struct RepresentationIntegrand {
  IntegrandTable left{Side::left, {}};
  IntegrandTable right{Side::right, {}};
};

/// Random variable used at each step: either one xi for all steps, or one per step (size N+1).
class XiSchedule {
 public:
  XiSchedule(const ExactEngine& engine, std::vector<double> xi);
  XiSchedule(const ExactEngine& engine, const ProcessValues& per_step);

  const BoundFunctional& at(int step) const {
    return bound_.size() == 1 ? bound_.front() : bound_[static_cast<std::size_t>(step)];
  }

 private:
  std::vector<BoundFunctional> bound_;
};

/// Integrand of the two-sided representation on path i, for every event seen at each step.
RepresentationIntegrand integrand_xi(const ExactEngine& engine, std::size_t path, const XiSchedule& xi);

/// Change-minus-remain form: E[xi | G_{u-}, R_I=(u,e)] - E[xi | G_{u-}, no event at u]
/// (and the G_u analogue), evaluated on the atoms of path i.
RepresentationIntegrand integrand_interpretation(const ExactEngine& engine, std::size_t path,
                                                 const XiSchedule& xi);

/// Classical integrand under full history: E[xi | F_{u-}, event e at u] - E[xi | F_{u-}, no event at u].
IntegrandTable classical_integrand(const ExactEngine& engine, std::size_t path, const XiSchedule& xi);

/// sum over atoms in (0, t_step] of value * (plus - minus); a missing integrand key is rejected.
double stochastic_integral(const ScenarioModel& model, const IntegrandTable& integrand,
                           const MeasureAtoms& plus, const MeasureAtoms& minus, int up_to_step);

struct ReportRow {
  std::size_t path_id = 0;
  int step = 0;
  double t = 0.0;
  double lhs = 0.0;
  double drift = 0.0;
  double if_integral = 0.0;
  double ib_integral = 0.0;
  double residual = 0.0;
};

struct RepresentationReport {
  std::vector<ReportRow> rows;
  double max_abs_residual = 0.0;
  std::size_t zero_denominators = 0;
};

/// E[xi|G_t] - E[xi|G_0] = if_integral + ib_integral on every path and step.
RepresentationReport verify_representation_xi(const ExactEngine& engine, std::span<const double> xi,
                                              const std::vector<PathMeasures>* measures = nullptr);

enum class DriftSide { ib, if_ };

/// Generic cumulative drift: sum_k E[X_k - X_{k-1} | G_k] (ib) or | G_k^- (if), per [step][path].
ProcessValues generic_drift(const ExactEngine& engine, const ProcessValues& x, DriftSide side);

/// X^G_t - X^G_0 = drift + if_integral + ib_integral for a process X.
/// The integrands use xi_u = X_{u-} (ib side) or X_u (if side). `drift` overrides the generic one;
/// `last_step` limits the horizon (defaults to t_N).
RepresentationReport verify_representation_process(const ExactEngine& engine, const ProcessValues& x,
                                                   DriftSide side,
                                                   const ProcessValues* drift = nullptr,
                                                   std::optional<int> last_step = std::nullopt,
                                                   const std::vector<PathMeasures>* measures = nullptr);

struct TelescopingRow {
  std::uint64_t mask = 0;
  std::vector<int> marks;  // z, aligned with the pieces of mask (may hold kNullMark)
  int step = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct TelescopingReport {
  std::vector<TelescopingRow> rows;
  double max_abs_error = 0.0;
};

/// E_M[1^M_t xi] - E_M[1^M_0 xi] = sum_I int E_{M,R_I=(u,e)}[(1^M_u - 1^M_{u-}) xi] P_M^{R_I}(d(u,e)),
/// for each M that is ever active and each z with P(Z_M = z) > 0.
TelescopingReport lemma_telescoping_check(const ExactEngine& engine, std::span<const double> xi);

void write_report_csv(std::ostream& out, const RepresentationReport& report);

}  // namespace imr
