#pragma once

// Small hand-built scenario trees shared by the unit tests.

#include <vector>

#include "imr/model.hpp"

namespace imr::testing {

inline ScenarioModel deterministic_model() {
  return ScenarioModel({0.0, 1.0}, {"a"}, 1, [](const History&) {
    return std::vector<Branch>{{{ElementaryEvent::innovate(1, 0)}, 1.0}};
  });
}

/// Piece 1 appears at t_1 with mark a with probability p.
inline ScenarioModel bernoulli_model(double p) {
  return ScenarioModel({0.0, 1.0}, {"a"}, 1, [p](const History&) {
    return std::vector<Branch>{{{ElementaryEvent::innovate(1, 0)}, p}, {{}, 1.0 - p}};
  });
}

/// Innovation w.p. 0.5 at t_1, deletion of an active piece w.p. 1 at t_2.
inline ScenarioModel bernoulli_delete_model() {
  return ScenarioModel({0.0, 1.0, 2.0}, {"a"}, 1, [](const History& h) {
    if (h.step() == 0) return std::vector<Branch>{{{ElementaryEvent::innovate(1, 0)}, 0.5}, {{}, 0.5}};
    if (h.active(1)) return std::vector<Branch>{{{ElementaryEvent::remove(1)}, 1.0}};
    return std::vector<Branch>{{{}, 1.0}};
  });
}

/// Piece 1 gets mark a (0.6) or b (0.4) at t_1; at t_2 it is erased w.p. 0.5 (mark a) or 0.25 (mark b).
/// At t_3 piece 2 (mark a) appears w.p. 0.8 if the record was a, else 0.2.
inline ScenarioModel two_mark_deletion_model() {
  return ScenarioModel({0.0, 1.0, 2.0, 3.0}, {"a", "b"}, 2, [](const History& h) {
    if (h.step() == 0)
      return std::vector<Branch>{{{ElementaryEvent::innovate(1, 0)}, 0.6}, {{ElementaryEvent::innovate(1, 1)}, 0.4}};
    const bool a = h.mark(1) == 0;
    if (h.step() == 1) {
      const double q = a ? 0.5 : 0.25;
      return std::vector<Branch>{{{ElementaryEvent::remove(1)}, q}, {{}, 1.0 - q}};
    }
    const double r = a ? 0.8 : 0.2;
    return std::vector<Branch>{{{ElementaryEvent::innovate(2, 0)}, r}, {{}, 1.0 - r}};
  });
}

}  // namespace imr::testing
