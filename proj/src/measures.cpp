#include "imr/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "imr/projection.hpp"

namespace imr {

namespace {

std::vector<int> pieces_of(const std::vector<int>& odd_indices) {
  std::vector<int> out;
  out.reserve(odd_indices.size());
  for (int j : odd_indices) out.push_back((j + 1) / 2);
  return out;
}

/// P(R_I = (u,e) | Z_M = z, A^M) through the three ratios of the compensator display.
double compensator_mass(const ExactEngine& engine, const InformationState& state, int step, Side side,
                        const JointEvent& event) {
  const auto z = marks_event(state);
  ConditioningEvent a;
  a.active_set_indices(step, side, state.active_set);
  ConditioningEvent r;
  r.joint_event(step, event);

  const auto untouched = untouched_indices(state.active_set, event.indices);
  ConditioningEvent z_i;
  z_i.marks_equal(pieces_of(untouched), [&] {
    std::vector<int> m;
    for (std::size_t j = 0; j < state.active_set.size(); ++j)
      if (std::find(untouched.begin(), untouched.end(), state.active_set[j]) != untouched.end())
        m.push_back(state.active_marks[j]);
    return m;
  }());

  // P_{M,R}(A) P_M^R / P_M(A) with P(Z_M = z) cancelled, as one quotient: when the cells
  // coincide the sums are identical and the mass is exactly 1
  const auto zr = z_i & r;
  const double num = engine.probability(a & zr) * engine.probability(z & r);
  const double den = engine.probability(zr) * engine.probability(z & a);
  return engine.ratio(num, den);
}

MeasureAtoms compensator(const ExactEngine& engine, std::size_t path, Side side, MeasureKind kind) {
  const auto& space = engine.space();
  MeasureAtoms out(kind);
  for (int k = 1; k <= space.steps(); ++k) {
    const auto& state = space.state(path, k, side);
    for (int id = 1; id < space.event_count(k); ++id) {
      const auto& ev = space.event_by_id(k, id);
      const double m = compensator_mass(engine, state, k, side, ev);
      if (m != 0.0) out.add(AtomKey{k, ev.indices, ev.marks}, space.model().time(k), m);
    }
  }
  return out;
}

std::string key_string(const ScenarioModel& model, const AtomKey& key) {
  std::ostringstream s;
  s << "(t=" << model.time(key.step) << ", I={" << index_set_string(key.indices) << "}, e=("
    << mark_tuple_string(model, key.marks) << "))";
  return s.str();
}

}  // namespace

MeasureAtoms compute_nu(const ExactEngine& engine, std::size_t path) {
  return compensator(engine, path, Side::left, MeasureKind::nu);
}

MeasureAtoms compute_rho(const ExactEngine& engine, std::size_t path) {
  return compensator(engine, path, Side::right, MeasureKind::rho);
}

MeasureAtoms compute_lambda(const ExactEngine& engine, std::size_t path) {
  const auto& space = engine.space();
  MeasureAtoms out(MeasureKind::lambda);
  for (int k = 1; k <= space.steps(); ++k) {
    const int prefix = space.prefix_id(path, k - 1);
    std::map<int, double> by_event;
    double total = 0.0;
    for (std::size_t j = 0; j < space.size(); ++j) {
      if (space.prefix_id(j, k - 1) != prefix) continue;
      total += space.weight(j);
      by_event[space.event_id(j, k)] += space.weight(j);
    }
    for (const auto& [id, w] : by_event) {
      if (id == 0) continue;
      const auto& ev = space.event_by_id(k, id);
      const double m = engine.ratio(w, total);
      if (m != 0.0) out.add(AtomKey{k, ev.indices, ev.marks}, space.model().time(k), m);
    }
  }
  return out;
}

std::vector<PathMeasures> compute_path_measures(const ExactEngine& engine) {
  const auto& space = engine.space();
  std::vector<PathMeasures> out(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    out[i].mu = counting_measure_atoms(space.model(), space.path(i));
    out[i].nu = compute_nu(engine, i);
    out[i].rho = compute_rho(engine, i);
  }
  return out;
}

MeasureAtoms integrand_times_mu(const ScenarioModel& model, const PathRecord& path, const IntegrandField& f) {
  MeasureAtoms out(MeasureKind::generic);
  const auto mu = counting_measure_atoms(model, path);
  for (const auto& a : mu.atoms()) {
    const auto v = f(path, a.key);
    if (!v) throw ModelError("integrand undefined at atom " + key_string(model, a.key));
    if (*v != 0.0) out.add(a.key, a.time, *v);
  }
  return out;
}

CompensatorPair if_ib_compensate(const ExactEngine& engine, std::size_t path, const IntegrandField& f) {
  const auto& space = engine.space();
  const auto& model = space.model();
  CompensatorPair out;

  auto average_f = [&](const ConditioningEvent& given, const AtomKey& key) {
    double num = 0.0, den = 0.0;
    for (auto j : engine.matching(given)) {
      const auto v = f(space.path(j), key);
      if (!v) throw ModelError("integrand undefined at atom " + key_string(model, key));
      num += space.weight(j) * *v;
      den += space.weight(j);
    }
    return engine.ratio(num, den);
  };

  for (Side side : {Side::left, Side::right}) {
    const auto measure = side == Side::left ? compute_nu(engine, path) : compute_rho(engine, path);
    auto& table = side == Side::left ? out.g : out.h;
    auto& product = side == Side::left ? out.forward : out.backward;
    for (const auto& atom : measure.atoms()) {
      const int k = atom.key.step;
      const auto& state = space.state(path, k, side);
      const auto untouched = untouched_indices(state.active_set, atom.key.indices);
      std::vector<int> marks;
      for (std::size_t j = 0; j < state.active_set.size(); ++j)
        if (std::find(untouched.begin(), untouched.end(), state.active_set[j]) != untouched.end())
          marks.push_back(state.active_marks[j]);
      ConditioningEvent given;
      given.marks_equal_indices(untouched, marks)
          .joint_event(k, JointEvent{atom.key.indices, atom.key.marks})
          .active_set_indices(k, side, state.active_set);
      const double v = average_f(given, atom.key);
      table.values[atom.key] = v;
      if (v * atom.mass != 0.0) product.add(atom.key, atom.time, v * atom.mass);
    }
  }
  return out;
}

TimeMeasure TimeMeasure::from_times(const ScenarioModel& model, bool lebesgue,
                                    const std::vector<double>& dirac_times) {
  TimeMeasure g;
  g.lebesgue = lebesgue;
  for (double t : dirac_times) g.dirac_steps.push_back(model.step_of(t));
  std::sort(g.dirac_steps.begin(), g.dirac_steps.end());
  return g;
}

double TimeMeasure::dirac(int step) const {
  return static_cast<double>(std::count(dirac_steps.begin(), dirac_steps.end(), step));
}

ProcessValues sojourn_process(const PathSpace& space, const SojournRate& h, const TimeMeasure& gamma, Side side) {
  const auto& model = space.model();
  const int n = space.steps();
  ProcessValues x(static_cast<std::size_t>(n + 1), std::vector<double>(space.size(), 0.0));
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& p = space.path(i);
    x[0][i] = gamma.dirac(0) * h(space.state(i, 0, Side::right).active_set, 0, p);
    for (int k = 1; k <= n; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const double dt = gamma.lebesgue ? model.time(k) - model.time(k - 1) : 0.0;
      const double dk = gamma.dirac(k);
      double inc = 0.0;
      if (side == Side::right) {
        const auto& m = space.state(i, k, Side::right).active_set;
        if (dt + dk != 0.0) inc = h(m, k, p) * (dt + dk);
      } else {
        const auto& m = space.state(i, k, Side::left).active_set;
        if (dt != 0.0) inc += h(m, k - 1, p) * dt;
        if (dk != 0.0) inc += h(m, k, p) * dk;
      }
      x[ks][i] = x[ks - 1][i] + inc;
    }
  }
  return x;
}

SojournLedger sojourn_compensator(const ExactEngine& engine, std::size_t path, const SojournRate& h,
                                  const TimeMeasure& gamma) {
  const auto& space = engine.space();
  const auto& model = space.model();
  const int n = space.steps();
  SojournLedger out;
  out.ib.assign(static_cast<std::size_t>(n + 1), 0.0);
  out.if_.assign(static_cast<std::size_t>(n + 1), 0.0);

  // E[h(M, t_j) | cell of path at step k on `side`], M being the cell's active set
  auto cond_h = [&](int k, Side side, int j) {
    const auto& state = space.state(path, k, side);
    std::vector<double> values(space.size());
    for (std::size_t q = 0; q < space.size(); ++q) values[q] = h(state.active_set, j, space.path(q));
    return conditional_on_information(engine, engine.bind(std::move(values)), path, k, side);
  };

  for (int k = 1; k <= n; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const double dt = gamma.lebesgue ? model.time(k) - model.time(k - 1) : 0.0;
    const double dk = gamma.dirac(k);
    double ib = 0.0, fw = 0.0;
    if (dt + dk != 0.0) ib = cond_h(k, Side::right, k) * (dt + dk);
    if (dt != 0.0) fw += cond_h(k, Side::left, k - 1) * dt;
    if (dk != 0.0) fw += cond_h(k, Side::left, k) * dk;
    out.ib[ks] = out.ib[ks - 1] + ib;
    out.if_[ks] = out.if_[ks - 1] + fw;
  }
  return out;
}

}  // namespace imr
