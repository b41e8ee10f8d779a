#pragma once

// Hand-rolled generators for property tests: random scenario trees and random payoffs.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "imr/engine.hpp"
#include "imr/model.hpp"

namespace imr::testing {

inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_string(std::uint64_t seed, const std::string& s) {
  std::uint64_t h = mix(seed);
  for (unsigned char c : s) h = mix(h ^ c);
  return h;
}

struct RandomModelOptions {
  int max_pieces = 3;
  int max_steps = 5;
  int max_marks = 3;
  int max_branches = 4;
  bool deletions = true;
  bool time_tagged = false;  // marks "s@k" may only be used at step k: the state reveals the history
  double min_probability = 0.0;  // lower bound for every branch probability
  double simultaneous = 0.3;     // chance that a branch combines two elementary events
  bool exact_sizes = false;      // use max_steps, max_pieces and max_marks as given
};

struct RandomModel {
  ScenarioModel model;
  std::uint64_t seed;
};

/// Random tabular law: each node draws 1..max_branches feasible composite events from a
/// stream seeded by (seed, history key), so the law is a fixed function of the node.
inline ScenarioModel random_model(std::uint64_t seed, const RandomModelOptions& opt) {
  std::mt19937_64 rng(mix(seed));
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int steps = opt.exact_sizes ? opt.max_steps : pick(2, opt.max_steps);
  const int pieces = opt.exact_sizes ? opt.max_pieces : pick(1, opt.max_pieces);
  const int symbols = opt.exact_sizes ? opt.max_marks : pick(1, opt.max_marks);

  std::vector<double> grid{0.0};
  for (int k = 1; k <= steps; ++k) grid.push_back(grid.back() + 0.5 + std::uniform_real_distribution<double>(0, 1)(rng));

  std::vector<std::string> marks;
  if (opt.time_tagged) {
    for (int k = 1; k <= steps; ++k)
      for (int s = 0; s < symbols; ++s) marks.push_back(std::string(1, static_cast<char>('a' + s)) + "@" + std::to_string(k));
  } else {
    for (int s = 0; s < symbols; ++s) marks.push_back(std::string(1, static_cast<char>('a' + s)));
  }

  auto law = [seed, opt, pieces, symbols](const History& h) {
    std::string key;
    for (const auto& ev : h.events()) {
      key += '|';
      for (const auto& e : ev) key += std::to_string(static_cast<int>(e.kind)) + ":" + std::to_string(e.piece) + ":" + std::to_string(e.mark) + ";";
    }
    std::mt19937_64 r(hash_string(seed, key));
    auto unit = [&] { return std::uniform_real_distribution<double>(0, 1)(r); };
    const int k = h.step() + 1;

    std::vector<ElementaryEvent> elementary;
    for (int p = 1; p <= pieces; ++p) {
      if (!h.innovated(p)) {
        for (int s = 0; s < symbols; ++s)
          elementary.push_back(ElementaryEvent::innovate(p, opt.time_tagged ? (k - 1) * symbols + s : s));
      } else if (opt.deletions && h.active(p)) {
        elementary.push_back(ElementaryEvent::remove(p));
      }
    }
    std::vector<CompositeEvent> chosen{CompositeEvent{}};
    const int want = std::uniform_int_distribution<int>(1, opt.max_branches)(r);
    for (int attempt = 0; attempt < 20 && static_cast<int>(chosen.size()) < want && !elementary.empty(); ++attempt) {
      CompositeEvent ev{elementary[std::uniform_int_distribution<std::size_t>(0, elementary.size() - 1)(r)]};
      if (unit() < opt.simultaneous) {
        const auto& e2 = elementary[std::uniform_int_distribution<std::size_t>(0, elementary.size() - 1)(r)];
        if (e2.piece != ev[0].piece) ev.push_back(e2);
      }
      canonicalize(ev);
      if (std::find(chosen.begin(), chosen.end(), ev) == chosen.end()) chosen.push_back(ev);
    }
    // drop the empty event sometimes so that certain events also occur
    if (chosen.size() > 1 && unit() < 0.25) chosen.erase(chosen.begin());

    std::vector<double> w;
    for (std::size_t j = 0; j < chosen.size(); ++j) w.push_back(0.2 + unit());
    double total = 0.0;
    for (double x : w) total += x;
    std::vector<Branch> out;
    const double floor = std::min(opt.min_probability, 1.0 / static_cast<double>(chosen.size()));
    const double rest = 1.0 - floor * static_cast<double>(chosen.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < chosen.size(); ++j) {
      double p = floor + rest * w[j] / total;
      if (j + 1 == chosen.size()) p = 1.0 - acc;
      acc += p;
      out.push_back({chosen[j], p});
    }
    return out;
  };
  return ScenarioModel(std::move(grid), std::move(marks), pieces, law);
}

/// Bounded random variable: a uniform value in [-1, 1] per path, keyed by the path itself.
inline std::vector<double> random_xi(const PathSpace& space, std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(space.size());
  for (const auto& p : space.paths())
    out.push_back(static_cast<double>(hash_string(seed, p.key()) >> 11) * 0x1.0p-53 * 2.0 - 1.0);
  return out;
}

/// Random process value per (path, step), bounded in [-1, 1].
inline ProcessValues random_process(const PathSpace& space, std::uint64_t seed) {
  ProcessValues x(static_cast<std::size_t>(space.steps() + 1), std::vector<double>(space.size()));
  for (int k = 0; k <= space.steps(); ++k)
    for (std::size_t i = 0; i < space.size(); ++i)
      x[static_cast<std::size_t>(k)][i] =
          static_cast<double>(hash_string(seed + static_cast<std::uint64_t>(k), space.path(i).key()) >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  return x;
}

}  // namespace imr::testing
