#include "imr/atoms.hpp"

#include <algorithm>
#include <ostream>

namespace imr {

const char* to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::mu: return "mu";
    case MeasureKind::nu: return "nu";
    case MeasureKind::rho: return "rho";
    case MeasureKind::lambda: return "lambda";
    case MeasureKind::generic: return "generic";
  }
  return "generic";
}

void MeasureAtoms::add(const AtomKey& key, double time, double mass) {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), key,
                             [](const Atom& a, const AtomKey& k) { return a.key < k; });
  if (it != atoms_.end() && it->key == key) {
    it->mass += mass;
    return;
  }
  atoms_.insert(it, Atom{key, time, mass});
}

double MeasureAtoms::mass(const AtomKey& key) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), key,
                             [](const Atom& a, const AtomKey& k) { return a.key < k; });
  return (it != atoms_.end() && it->key == key) ? it->mass : 0.0;
}

double MeasureAtoms::total(int up_to_step) const {
  double s = 0.0;
  for (const auto& a : atoms_)
    if (a.key.step <= up_to_step) s += a.mass;
  return s;
}

double MeasureAtoms::total(int up_to_step, const IndexSet& indices, const MarkTuple& marks) const {
  double s = 0.0;
  for (const auto& a : atoms_)
    if (a.key.step <= up_to_step && a.key.indices == indices && a.key.marks == marks) s += a.mass;
  return s;
}

MeasureAtoms counting_measure_atoms(const ScenarioModel& model, const PathRecord& path) {
  MeasureAtoms out(MeasureKind::mu);
  for (int k = 1; k <= path.steps(); ++k) {
    const auto ev = path.joint_event(k);
    if (ev.empty()) continue;
    out.add(AtomKey{k, ev.indices, ev.marks}, model.time(k), 1.0);
  }
  return out;
}

void write_atoms_csv(std::ostream& out, const ScenarioModel& model, const MeasureAtoms& atoms,
                     bool header) {
  if (header) out << "time,index_set,marks,mass,kind\n";
  const auto old = out.precision(17);
  for (const auto& a : atoms.atoms()) {
    out << a.time << ',' << index_set_string(a.key.indices) << ','
        << mark_tuple_string(model, a.key.marks) << ',' << a.mass << ',' << to_string(atoms.kind())
        << '\n';
  }
  out.precision(old);
}

}  // namespace imr
