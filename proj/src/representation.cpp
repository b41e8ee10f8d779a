#include "imr/representation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "imr/projection.hpp"

namespace imr {

XiSchedule::XiSchedule(const ExactEngine& engine, std::vector<double> xi) {
  bound_.push_back(engine.bind(std::move(xi)));
}

XiSchedule::XiSchedule(const ExactEngine& engine, const ProcessValues& per_step) {
  if (static_cast<int>(per_step.size()) != engine.space().steps() + 1)
    throw ModelError("xi schedule: expected one value row per grid step");
  bound_.reserve(per_step.size());
  for (const auto& row : per_step) bound_.push_back(engine.bind(row));
}

namespace {

struct Restricted {
  std::vector<int> indices;
  std::vector<int> marks;
};

Restricted restrict_to_untouched(const InformationState& state, const IndexSet& event_indices) {
  Restricted r;
  r.indices = untouched_indices(state.active_set, event_indices);
  for (std::size_t j = 0; j < state.active_set.size(); ++j)
    if (std::find(r.indices.begin(), r.indices.end(), state.active_set[j]) != r.indices.end())
      r.marks.push_back(state.active_marks[j]);
  return r;
}

/// E_{M,R_I=(u,e)}[1^M_s xi] / E_{M,R_I=(u,e)}[1^M_s]
double changed_term(const ExactEngine& engine, const BoundFunctional& xi, const InformationState& state,
                    int step, Side side, const JointEvent& ev) {
  const auto r = restrict_to_untouched(state, ev.indices);
  ConditioningEvent base;
  base.marks_equal_indices(r.indices, r.marks).joint_event(step, ev);
  ConditioningEvent with_a = base;
  with_a.active_set_indices(step, side, state.active_set);
  const double pb = engine.probability(base);
  const double e_xi = engine.ratio(xi.integral(with_a), pb);
  const double e_ind = engine.ratio(engine.probability(with_a), pb);
  return engine.ratio(e_xi, e_ind);
}

/// E_M[1^M_{u-} 1^M_u xi] / E_M[1^M_{u-} 1^M_u]
double remain_term(const ExactEngine& engine, const BoundFunctional& xi, const InformationState& state,
                   int step) {
  const auto z = marks_event(state);
  ConditioningEvent both = z;
  both.active_set_indices(step, Side::left, state.active_set)
      .active_set_indices(step, Side::right, state.active_set);
  const double pz = engine.probability(z);
  const double e_xi = engine.ratio(xi.integral(both), pz);
  const double e_ind = engine.ratio(engine.probability(both), pz);
  return engine.ratio(e_xi, e_ind);
}

std::string key_string(const ScenarioModel& model, const AtomKey& key) {
  std::ostringstream s;
  s << "(t=" << model.time(key.step) << ", I={" << index_set_string(key.indices) << "}, e=("
    << mark_tuple_string(model, key.marks) << "))";
  return s.str();
}

}  // namespace

RepresentationIntegrand integrand_xi(const ExactEngine& engine, std::size_t path, const XiSchedule& xi) {
  const auto& space = engine.space();
  RepresentationIntegrand out;
  for (int k = 1; k <= space.steps(); ++k) {
    const auto& bound = xi.at(k);
    for (Side side : {Side::left, Side::right}) {
      const auto& state = space.state(path, k, side);
      const double remain = remain_term(engine, bound, state, k);
      auto& table = side == Side::left ? out.left : out.right;
      for (int id = 1; id < space.event_count(k); ++id) {
        const auto& ev = space.event_by_id(k, id);
        table.values[AtomKey{k, ev.indices, ev.marks}] = changed_term(engine, bound, state, k, side, ev) - remain;
      }
    }
  }
  return out;
}

RepresentationIntegrand integrand_interpretation(const ExactEngine& engine, std::size_t path,
                                                 const XiSchedule& xi) {
  const auto& space = engine.space();
  RepresentationIntegrand out;
  for (int k = 1; k <= space.steps(); ++k) {
    const auto& bound = xi.at(k);
    for (Side side : {Side::left, Side::right}) {
      const auto info = cell_event(space.state(path, k, side), k, side);
      ConditioningEvent remain = info;
      remain.event_count(k, 0);
      const double stay = bound.conditional_expectation(remain);
      auto& table = side == Side::left ? out.left : out.right;
      for (int id = 1; id < space.event_count(k); ++id) {
        const auto& ev = space.event_by_id(k, id);
        ConditioningEvent change = info;
        change.joint_event(k, ev);
        table.values[AtomKey{k, ev.indices, ev.marks}] = bound.conditional_expectation(change) - stay;
      }
    }
  }
  return out;
}

IntegrandTable classical_integrand(const ExactEngine& engine, std::size_t path, const XiSchedule& xi) {
  const auto& space = engine.space();
  IntegrandTable out{Side::left, {}};
  for (int k = 1; k <= space.steps(); ++k) {
    const auto& values = xi.at(k).values();
    const int prefix = space.prefix_id(path, k - 1);
    std::map<int, std::pair<double, double>> by_event;
    for (std::size_t j = 0; j < space.size(); ++j) {
      if (space.prefix_id(j, k - 1) != prefix) continue;
      auto& c = by_event[space.event_id(j, k)];
      c.first += space.weight(j) * values[j];
      c.second += space.weight(j);
    }
    const auto none = by_event.find(0);
    const double stay = none == by_event.end() ? 0.0 : engine.ratio(none->second.first, none->second.second);
    for (const auto& [id, c] : by_event) {
      if (id == 0) continue;
      const auto& ev = space.event_by_id(k, id);
      out.values[AtomKey{k, ev.indices, ev.marks}] = engine.ratio(c.first, c.second) - stay;
    }
  }
  return out;
}

double stochastic_integral(const ScenarioModel& model, const IntegrandTable& integrand,
                           const MeasureAtoms& plus, const MeasureAtoms& minus, int up_to_step) {
  std::map<AtomKey, double> net;
  for (const auto& a : plus.atoms())
    if (a.key.step <= up_to_step) net[a.key] += a.mass;
  for (const auto& a : minus.atoms())
    if (a.key.step <= up_to_step) net[a.key] -= a.mass;
  double s = 0.0;
  for (const auto& [key, mass] : net) {
    auto it = integrand.values.find(key);
    if (it == integrand.values.end()) throw ModelError("integrand undefined at atom " + key_string(model, key));
    s += it->second * mass;
  }
  return s;
}

namespace {

RepresentationReport verify_impl(const ExactEngine& engine, const XiSchedule& integrand_xi_schedule,
                                 const XiSchedule& target, const ProcessValues* drift, int last_step,
                                 const std::vector<PathMeasures>* measures) {
  const auto& space = engine.space();
  const auto& model = space.model();
  const auto before = engine.zero_denominator_count();

  RepresentationReport report;
  for (std::size_t i = 0; i < space.size(); ++i) {
    PathMeasures local;
    const PathMeasures* pm = nullptr;
    if (measures) {
      pm = &(*measures)[i];
    } else {
      local.mu = counting_measure_atoms(model, space.path(i));
      local.nu = compute_nu(engine, i);
      local.rho = compute_rho(engine, i);
      pm = &local;
    }
    const auto integrand = integrand_xi(engine, i, integrand_xi_schedule);
    const double x0 = conditional_on_information(engine, target.at(0), i, 0, Side::right);
    for (int k = 0; k <= last_step; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      ReportRow row;
      row.path_id = i;
      row.step = k;
      row.t = model.time(k);
      row.lhs = conditional_on_information(engine, target.at(k), i, k, Side::right) - x0;
      row.drift = drift ? (*drift)[ks][i] - (*drift)[0][i] : 0.0;
      row.if_integral = stochastic_integral(model, integrand.left, pm->mu, pm->nu, k);
      row.ib_integral = stochastic_integral(model, integrand.right, pm->rho, pm->mu, k);
      row.residual = row.lhs - row.drift - row.if_integral - row.ib_integral;
      report.max_abs_residual = std::max(report.max_abs_residual, std::abs(row.residual));
      report.rows.push_back(row);
    }
  }
  report.zero_denominators = engine.zero_denominator_count() - before;
  return report;
}

}  // namespace

RepresentationReport verify_representation_xi(const ExactEngine& engine, std::span<const double> xi,
                                              const std::vector<PathMeasures>* measures) {
  const auto& space = engine.space();
  std::vector<double> values(xi.begin(), xi.end());
  if (values.size() != space.size()) throw ModelError("xi: value count does not match the path space");
  const XiSchedule schedule(engine, std::move(values));
  return verify_impl(engine, schedule, schedule, nullptr, space.steps(), measures);
}

ProcessValues generic_drift(const ExactEngine& engine, const ProcessValues& x, DriftSide side) {
  const auto& space = engine.space();
  const int n = space.steps();
  if (static_cast<int>(x.size()) != n + 1) throw ModelError("process: expected one value row per grid step");
  ProcessValues d(x.size(), std::vector<double>(space.size(), 0.0));
  for (int k = 1; k <= n; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    std::vector<double> inc(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) inc[i] = x[ks][i] - x[ks - 1][i];
    const auto bound = engine.bind(std::move(inc));
    const Side s = side == DriftSide::ib ? Side::right : Side::left;
    std::map<int, double> memo;
    for (std::size_t i = 0; i < space.size(); ++i) {
      const int id = space.state_id(i, k, s);
      auto it = memo.find(id);
      if (it == memo.end()) it = memo.emplace(id, conditional_on_information(engine, bound, i, k, s)).first;
      d[ks][i] = d[ks - 1][i] + it->second;
    }
  }
  return d;
}

RepresentationReport verify_representation_process(const ExactEngine& engine, const ProcessValues& x,
                                                   DriftSide side, const ProcessValues* drift,
                                                   std::optional<int> last_step,
                                                   const std::vector<PathMeasures>* measures) {
  const auto& space = engine.space();
  const int n = space.steps();
  if (static_cast<int>(x.size()) != n + 1) throw ModelError("process: expected one value row per grid step");
  const int last = last_step.value_or(n);
  if (last < 0 || last > n) throw ModelError("process: verification horizon outside the grid");
  if (drift && static_cast<int>(drift->size()) != n + 1)
    throw ModelError("process: drift must have one value row per grid step");

  ProcessValues xi_rows = x;
  if (side == DriftSide::ib)
    for (int k = n; k >= 1; --k) xi_rows[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k - 1)];
  const XiSchedule schedule(engine, xi_rows);

  ProcessValues own;
  if (!drift) {
    own = generic_drift(engine, x, side);
    drift = &own;
  }
  const XiSchedule target(engine, x);
  return verify_impl(engine, schedule, target, drift, last, measures);
}

TelescopingReport lemma_telescoping_check(const ExactEngine& engine, std::span<const double> xi) {
  const auto& space = engine.space();
  const int n = space.steps();
  const int kp = space.model().max_pieces();
  const auto bound = engine.bind(std::vector<double>(xi.begin(), xi.end()));

  std::set<std::uint64_t> masks;
  for (int k = 0; k <= n; ++k)
    for (std::size_t i = 0; i < space.size(); ++i) masks.insert(space.active_mask(i, k, Side::right));

  TelescopingReport report;
  for (auto mask : masks) {
    std::vector<int> odd;
    for (int piece = 1; piece <= kp; ++piece)
      if (mask >> (piece - 1) & 1U) odd.push_back(2 * piece - 1);
    std::set<std::vector<int>> zs;
    for (std::size_t i = 0; i < space.size(); ++i) {
      std::vector<int> z;
      for (int j : odd) z.push_back(space.path(i).mark_of(j));
      zs.insert(std::move(z));
    }
    for (const auto& z : zs) {
      const InformationState state{odd, z};
      const auto zev = marks_event(state);
      const double pz = engine.probability(zev);
      if (pz <= 0.0) continue;
      auto e_m_ind = [&](int k) {
        ConditioningEvent a = zev;
        a.active_set(k, Side::right, mask);
        return engine.ratio(bound.integral(a), pz);
      };
      const double base = e_m_ind(0);
      double rhs = 0.0;
      for (int k = 0; k <= n; ++k) {
        if (k > 0) {
          for (int id = 1; id < space.event_count(k); ++id) {
            const auto& ev = space.event_by_id(k, id);
            const auto r = restrict_to_untouched(state, ev.indices);
            ConditioningEvent mr;
            mr.marks_equal_indices(r.indices, r.marks).joint_event(k, ev);
            ConditioningEvent at_u = mr, at_u_minus = mr;
            at_u.active_set(k, Side::right, mask);
            at_u_minus.active_set(k, Side::left, mask);
            const double p_mr = engine.probability(mr);
            const double e_mr = engine.ratio(bound.integral(at_u) - bound.integral(at_u_minus), p_mr);
            ConditioningEvent zr = zev;
            zr.joint_event(k, ev);
            rhs += e_mr * engine.ratio(engine.probability(zr), pz);
          }
        }
        TelescopingRow row{mask, z, k, e_m_ind(k) - base, rhs};
        report.max_abs_error = std::max(report.max_abs_error, std::abs(row.lhs - row.rhs));
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

void write_report_csv(std::ostream& out, const RepresentationReport& report) {
  out << "path_id,t,lhs,drift,if_integral,ib_integral,residual\n";
  const auto old = out.precision(17);
  for (const auto& r : report.rows)
    out << r.path_id << ',' << r.t << ',' << r.lhs << ',' << r.drift << ',' << r.if_integral << ','
        << r.ib_integral << ',' << r.residual << '\n';
  out.precision(old);
}

}  // namespace imr
