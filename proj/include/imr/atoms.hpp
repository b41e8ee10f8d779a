#pragma once

#include <compare>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "imr/model.hpp"

namespace imr {

/// Key of a measure atom: grid step u, index set I and mark tuple e.
struct AtomKey {
  int step = 0;
  IndexSet indices;
  MarkTuple marks;

  auto operator<=>(const AtomKey&) const = default;
};

struct Atom {
  AtomKey key;
  double time = 0.0;
  double mass = 0.0;
};

enum class MeasureKind { mu, nu, rho, lambda, generic };

const char* to_string(MeasureKind kind);

/// A random measure restricted to one path: finitely many atoms on the grid.
class MeasureAtoms {
 public:
  explicit MeasureAtoms(MeasureKind kind = MeasureKind::generic) : kind_(kind) {}

  MeasureKind kind() const { return kind_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }
  std::size_t size() const { return atoms_.size(); }

  /// Adds mass to the atom at key, creating it if needed. Keeps atoms sorted.
  void add(const AtomKey& key, double time, double mass);

  /// Mass of a single atom, 0 if absent.
  double mass(const AtomKey& key) const;
  /// Total mass on (0, t_step], optionally restricted to one (I, e).
  double total(int up_to_step) const;
  double total(int up_to_step, const IndexSet& indices, const MarkTuple& marks) const;

 private:
  MeasureKind kind_;
  std::vector<Atom> atoms_;
};

/// Real-valued integrand on atom keys. Side tags the forward (G) or backward (H) version.
struct IntegrandTable {
  Side side = Side::left;
  std::map<AtomKey, double> values;
};

/// Counting measures mu_I on one path: one unit atom per step with a nonempty event.
MeasureAtoms counting_measure_atoms(const ScenarioModel& model, const PathRecord& path);

/// Writes atoms as CSV rows: time,index_set,marks,mass,kind (with header when requested).
void write_atoms_csv(std::ostream& out, const ScenarioModel& model, const MeasureAtoms& atoms,
                     bool header = true);

}  // namespace imr
