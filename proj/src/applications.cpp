#include "imr/applications.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "imr/measures.hpp"
#include "imr/projection.hpp"

namespace imr {

namespace {

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

double trapezoid(const std::function<double(double)>& f, double a, double b) {
  return 0.5 * (f(a) + f(b)) * (b - a);
}

double uniform_spacing(const ScenarioModel& model) {
  const auto& g = model.grid();
  const double dt = g[1] - g[0];
  for (std::size_t k = 1; k + 1 < g.size(); ++k)
    if (std::abs((g[k + 1] - g[k]) - dt) > 1e-9 * std::max(1.0, dt))
      throw ModelError("this application needs an equally spaced grid");
  return dt;
}

int grid_multiple(double value, double dt, const char* what) {
  const double r = value / dt;
  const auto m = static_cast<int>(std::llround(r));
  if (m < 1 || std::abs(r - m) > 1e-9) throw ModelError(std::string(what) + " is not a positive multiple of the grid spacing");
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Thiele

void thiele_liability(const PathSpace& space, const InsuranceContract& contract, ProcessValues& liability,
                      ProcessValues& benefits) {
  const auto& model = space.model();
  const int n = space.steps();
  const int kt = model.step_of(contract.horizon);
  liability.assign(sz(n + 1), std::vector<double>(space.size(), 0.0));
  benefits.assign(sz(n + 1), std::vector<double>(space.size(), 0.0));

  std::vector<double> v_step(sz(n + 1), 1.0);  // discount factor over (t_{k-1}, t_k]
  for (int k = 1; k <= n; ++k)
    v_step[sz(k)] = std::exp(-trapezoid(contract.phi, model.time(k - 1), model.time(k)));

  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& p = space.path(i);
    const int death = p.max_pieces() >= 1 ? p.innovation_step[0] : kNever;
    std::vector<double> db(sz(n + 1), 0.0);
    for (int k = 1; k <= kt; ++k) {
      if (death >= k) db[sz(k)] += trapezoid(contract.a, model.time(k - 1), model.time(k));
      if (death == k) db[sz(k)] += contract.b(model.time(k));
      benefits[sz(k)][i] = benefits[sz(k - 1)][i] + db[sz(k)];
    }
    for (int k = kt + 1; k <= n; ++k) benefits[sz(k)][i] = benefits[sz(k - 1)][i];
    // backward recursion X_{k-1} = v_k (dB_k + X_k)
    for (int k = kt; k >= 1; --k) liability[sz(k - 1)][i] = v_step[sz(k)] * (db[sz(k)] + liability[sz(k)][i]);
  }
}

ThieleReport thiele_reserve(const ExactEngine& engine, const InsuranceContract& contract) {
  const auto& space = engine.space();
  const auto& model = space.model();
  const int n = space.steps();
  if (model.max_pieces() < 1) throw ModelError("thiele: the model needs piece 1 for the death time");
  model.step_of(contract.horizon);

  std::map<int, int> death_step_of_mark;
  for (const auto& p : space.paths()) {
    if (p.deletion_step[0] != kNever) throw ModelError("thiele: the death piece 1 must never be deleted");
    if (p.innovation_step[0] == kNever) continue;
    auto [it, inserted] = death_step_of_mark.emplace(p.marks[0], p.innovation_step[0]);
    if (it->second != p.innovation_step[0])
      throw ModelError("thiele: the mark of piece 1 must determine the death time");
  }

  ThieleReport report;
  thiele_liability(space, contract, report.liability, report.benefits);
  const auto reserve = projection_process(engine, report.liability);

  // xi at step k: g_k X_{k-1} = X_k + Delta B_k
  ProcessValues xi_rows(sz(n + 1), std::vector<double>(space.size(), 0.0));
  for (int k = 0; k <= n; ++k)
    for (std::size_t i = 0; i < space.size(); ++i)
      xi_rows[sz(k)][i] = report.liability[sz(k)][i] +
                          (k > 0 ? report.benefits[sz(k)][i] - report.benefits[sz(k - 1)][i] : 0.0);
  const XiSchedule schedule(engine, xi_rows);

  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto mu = counting_measure_atoms(model, space.path(i));
    const auto nu = compute_nu(engine, i);
    const auto rho = compute_rho(engine, i);
    const auto integrand = integrand_xi(engine, i, schedule);
    for (const auto& [key, g] : integrand.left.values) {
      const bool on_path = nu.mass(key) != 0.0 || rho.mass(key) != 0.0 || mu.mass(key) != 0.0;
      if (!on_path) continue;
      report.sum_at_risk.push_back(SumAtRisk{i, key, g, integrand.right.values.at(key)});
    }
    double prev_if = 0.0, prev_ib = 0.0;
    for (int k = 0; k <= n; ++k) {
      ThieleRow row;
      row.path_id = i;
      row.step = k;
      row.t = model.time(k);
      row.reserve = reserve[i].right[sz(k)];
      if (k > 0) {
        const double g = std::exp(trapezoid(contract.phi, model.time(k - 1), model.time(k)));
        const double cum_if = stochastic_integral(model, integrand.left, mu, nu, k);
        const double cum_ib = stochastic_integral(model, integrand.right, rho, mu, k);
        row.d_benefit = report.benefits[sz(k)][i] - report.benefits[sz(k - 1)][i];
        row.interest = (g - 1.0) * reserve[i].right[sz(k - 1)];
        row.if_integral = cum_if - prev_if;
        row.ib_integral = cum_ib - prev_ib;
        prev_if = cum_if;
        prev_ib = cum_ib;
        const double dx = row.reserve - reserve[i].right[sz(k - 1)];
        row.residual = dx - (-row.d_benefit + row.interest + row.if_integral + row.ib_integral);
        report.max_abs_residual = std::max(report.max_abs_residual, std::abs(row.residual));
      }
      report.rows.push_back(row);
    }
    const int kt = model.step_of(contract.horizon);
    report.max_abs_terminal = std::max(report.max_abs_terminal, std::abs(reserve[i].right[sz(kt)]));
  }
  return report;
}

ScenarioModel build_thiele_model(const ThieleModelParams& params) {
  if (params.steps < 1) throw ModelError("thiele model: needs at least one step");
  if (params.health_records < 0) throw ModelError("thiele model: negative record count");
  std::vector<double> grid;
  for (int k = 0; k <= params.steps; ++k) grid.push_back(k * params.dt);
  std::vector<std::string> marks{"mild", "severe"};
  for (int k = 1; k <= params.steps; ++k) marks.push_back("d" + std::to_string(k));
  const int pieces = 1 + params.health_records;
  const ThieleModelParams p = params;

  auto law = [p, pieces](const History& h) {
    std::vector<Branch> out;
    const int k = h.step() + 1;
    if (h.innovated(1)) return std::vector<Branch>{{{}, 1.0}};
    bool mild = false, severe = false;
    for (int j = 2; j <= pieces; ++j) {
      if (!h.innovated(j)) continue;
      (h.mark(j) == 0 ? mild : severe) = true;
    }
    const double q = std::clamp(p.q_base + (mild ? p.q_mild : 0.0) + (severe ? p.q_severe : 0.0), 0.0, 1.0);

    std::vector<Branch> health;
    int active = 0, next = 0;
    for (int j = 2; j <= pieces; ++j) {
      if (h.active(j)) active = j;
      if (!h.innovated(j) && next == 0) next = j;
    }
    if (active != 0) {
      health.push_back({{ElementaryEvent::remove(active)}, p.p_delete});
      health.push_back({{}, 1.0 - p.p_delete});
    } else if (next != 0) {
      health.push_back({{ElementaryEvent::innovate(next, 0)}, p.p_record * (1.0 - p.p_severe)});
      health.push_back({{ElementaryEvent::innovate(next, 1)}, p.p_record * p.p_severe});
      health.push_back({{}, 1.0 - p.p_record});
    } else {
      health.push_back({{}, 1.0});
    }
    const int death_mark = 1 + k;  // "d<k>"
    for (const auto& b : health) {
      auto with_death = b.event;
      with_death.push_back(ElementaryEvent::innovate(1, death_mark));
      out.push_back({with_death, q * b.probability});
      out.push_back({b.event, (1.0 - q) * b.probability});
    }
    return out;
  };
  return ScenarioModel(std::move(grid), std::move(marks), pieces, law);
}

// ---------------------------------------------------------------------------
// Markov approximation

std::pair<int, int> markov_state(const PathRecord& path, int step) {
  int state = kNullMark, jumps = 0, innovated = 0;
  for (int piece = 1; piece <= path.max_pieces(); ++piece) {
    if (path.innovation_step[sz(piece - 1)] > step) continue;
    ++innovated;
    if (path.active(piece, step, Side::right)) state = path.marks[sz(piece - 1)];
  }
  jumps = std::max(0, innovated - 1);
  return {state, jumps};
}

MarkovReport markov_gap(const ExactEngine& engine, const MarkovApproxSpec& spec) {
  const auto& space = engine.space();
  const auto& model = space.model();
  const int n = space.steps();

  for (const auto& p : space.paths()) {
    for (int piece = 1; piece < p.max_pieces(); ++piece) {
      const int del = p.deletion_step[sz(piece - 1)];
      const int next = p.innovation_step[sz(piece)];
      if (del != next) throw ModelError("markov: deletion of a state piece must coincide with the next innovation");
    }
    if (p.max_pieces() >= 1 && p.deletion_step[sz(p.max_pieces() - 1)] != kNever)
      throw ModelError("markov: the last state piece cannot be deleted");
  }

  std::vector<double> f(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto [y, jumps] = markov_state(space.path(i), n);
    f[i] = spec.f(y, jumps);
  }
  const auto bound = engine.bind(f);
  const auto verify = verify_representation_xi(engine, f);

  MarkovReport report;
  report.max_abs_residual = verify.max_abs_residual;
  for (int k = 0; k <= n; ++k) {
    std::map<int, std::pair<double, double>> by_prefix;
    std::map<std::pair<int, int>, std::pair<double, double>> by_state;
    for (std::size_t i = 0; i < space.size(); ++i) {
      auto& a = by_prefix[space.prefix_id(i, k)];
      a.first += space.weight(i) * f[i];
      a.second += space.weight(i);
      auto& b = by_state[markov_state(space.path(i), k)];
      b.first += space.weight(i) * f[i];
      b.second += space.weight(i);
    }
    std::map<int, double> proj_memo;
    for (std::size_t i = 0; i < space.size(); ++i) {
      MarkovRow row;
      row.path_id = i;
      row.step = k;
      row.t = model.time(k);
      std::tie(row.state, row.jumps) = markov_state(space.path(i), k);
      const auto& a = by_prefix[space.prefix_id(i, k)];
      const auto& b = by_state[{row.state, row.jumps}];
      row.full = engine.ratio(a.first, a.second);
      row.state_only = engine.ratio(b.first, b.second);
      const int id = space.state_id(i, k);
      auto it = proj_memo.find(id);
      if (it == proj_memo.end())
        it = proj_memo.emplace(id, conditional_on_information(engine, bound, i, k, Side::right)).first;
      row.projection = it->second;
      row.gap = std::abs(row.full - row.projection);
      const auto& v = verify.rows[i * sz(n + 1) + sz(k)];
      row.if_integral = v.if_integral;
      row.ib_integral = v.ib_integral;
      report.max_gap = std::max(report.max_gap, row.gap);
      report.max_state_mismatch = std::max(report.max_state_mismatch, std::abs(row.state_only - row.projection));
      report.rows.push_back(row);
    }
  }
  // rows are [step][path]; reorder to [path][step] and fill the IB series
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const MarkovRow& x, const MarkovRow& y) { return x.path_id < y.path_id; });
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    auto& row = report.rows[r];
    if (row.step == 0) continue;
    const auto& prev = report.rows[r - 1];
    row.ib_abs_increment = std::abs(row.ib_integral - prev.ib_integral);
    row.ib_abs_running = prev.ib_abs_running + row.ib_abs_increment;
  }
  return report;
}

ScenarioModel build_jump_model(const JumpModelParams& params, JumpLaw law) {
  const int m = static_cast<int>(params.states.size());
  if (m < 1) throw ModelError("jump model: needs at least one state");
  if (static_cast<int>(params.initial.size()) != m) throw ModelError("jump model: initial law size mismatch");
  if (params.steps < 1 || params.max_jumps < 0) throw ModelError("jump model: bad dimensions");
  std::vector<double> grid;
  for (int k = 0; k <= params.steps; ++k) grid.push_back(k * params.dt);
  const auto p = params;
  auto tl = [p, law, m](const History& h) {
    std::vector<Branch> out;
    if (h.step() == 0) {
      for (int s = 0; s < m; ++s) out.push_back({{ElementaryEvent::innovate(1, s)}, p.initial[sz(s)]});
      return out;
    }
    int current = 0;
    for (int piece = 1; piece <= h.max_pieces(); ++piece)
      if (h.active(piece)) current = piece;
    const int k = h.step() + 1;
    const int jumps = current - 1;
    if (current == 0 || jumps >= p.max_jumps) return std::vector<Branch>{{{}, 1.0}};
    const int state = h.mark(current);
    const auto w = law(state, k - h.innovation_step(current), jumps);
    double moved = 0.0;
    for (int d = 0; d < m; ++d) {
      if (d == state || w[sz(d)] <= 0.0) continue;
      out.push_back({{ElementaryEvent::innovate(current + 1, d), ElementaryEvent::remove(current)}, w[sz(d)]});
      moved += w[sz(d)];
    }
    out.push_back({{}, 1.0 - moved});
    return out;
  };
  return ScenarioModel(std::move(grid), params.states, 1 + params.max_jumps, tl);
}

JumpLaw markov_jump_law(std::vector<std::vector<double>> transition) {
  return [transition](int state, int, int) {
    auto row = transition.at(sz(state));
    row[sz(state)] = 0.0;
    return row;
  };
}

JumpLaw duration_jump_law(std::vector<double> jump_by_duration, int state_count) {
  return [jump_by_duration, state_count](int state, int duration, int) {
    const auto idx = std::min(sz(std::max(duration, 1) - 1), jump_by_duration.size() - 1);
    const double p = jump_by_duration[idx];
    std::vector<double> w(sz(state_count), state_count > 1 ? p / (state_count - 1) : 0.0);
    w[sz(state)] = 0.0;
    return w;
  };
}

// ---------------------------------------------------------------------------
// Location

int location_at(const PathRecord& path, int step) {
  int best = 0, mark = kNullMark;
  for (int piece = 1; piece <= path.max_pieces(); ++piece) {
    const int tau = path.innovation_step[sz(piece - 1)];
    if (tau <= step && tau >= best) {
      best = tau;
      mark = path.marks[sz(piece - 1)];
    }
  }
  return mark;
}

LocationReport location_predictor(const ExactEngine& engine, const LocationSpec& spec) {
  const auto& space = engine.space();
  const auto& model = space.model();
  const int n = space.steps();
  const double dt = uniform_spacing(model);
  const int ds = grid_multiple(spec.delta, dt, "retention limit delta");
  const int hs = grid_multiple(spec.lag, dt, "prediction lag h");
  if (hs > n) throw ModelError("prediction lag exceeds the horizon");

  for (const auto& p : space.paths()) {
    for (int piece = 1; piece <= p.max_pieces(); ++piece) {
      const int tau = p.innovation_step[sz(piece - 1)];
      if (tau == kNever) continue;
      const int expected = tau + ds <= n ? tau + ds : kNever;
      if (p.deletion_step[sz(piece - 1)] != expected)
        throw ModelError("location: model deletions do not follow sigma = tau + delta");
    }
  }

  LocationReport report;
  report.last_step = n - hs;
  ProcessValues x(sz(n + 1), std::vector<double>(space.size(), 0.0));
  for (int k = 0; k <= report.last_step; ++k)
    for (std::size_t i = 0; i < space.size(); ++i) {
      const int y = location_at(space.path(i), k + hs);
      x[sz(k)][i] = std::find(spec.area.begin(), spec.area.end(), y) != spec.area.end() ? 1.0 : 0.0;
    }
  const auto verify = verify_representation_process(engine, x, DriftSide::if_, nullptr, report.last_step);
  report.max_abs_residual = verify.max_abs_residual;
  for (const auto& v : verify.rows) {
    LocationRow row;
    row.path_id = v.path_id;
    row.step = v.step;
    row.t = v.t;
    row.drift = v.drift;
    row.if_integral = v.if_integral;
    row.ib_integral = v.ib_integral;
    row.residual = v.residual;
    report.rows.push_back(row);
    report.max_abs_ib = std::max(report.max_abs_ib, std::abs(v.ib_integral));
  }
  const auto proj = projection_process(engine, x);
  for (auto& row : report.rows) row.predictor = proj[row.path_id].right[sz(row.step)];
  return report;
}

ScenarioModel build_location_model(const LocationModelParams& params) {
  const int l = static_cast<int>(params.locations.size());
  if (l < 1 || params.steps < 1 || params.delta_steps < 1) throw ModelError("location model: bad parameters");
  std::vector<double> grid;
  for (int k = 0; k <= params.steps; ++k) grid.push_back(k * params.dt);
  const auto p = params;
  auto law = [p, l](const History& h) {
    std::vector<Branch> out;
    const int k = h.step() + 1;
    CompositeEvent del;
    if (k - p.delta_steps >= 1) del.push_back(ElementaryEvent::remove(k - p.delta_steps));
    auto with = [&](int loc) {
      auto ev = del;
      ev.push_back(ElementaryEvent::innovate(k, loc));
      return ev;
    };
    if (k == 1) {
      for (int loc = 0; loc < l; ++loc) out.push_back({with(loc), 1.0 / l});
      return out;
    }
    const int prev = h.mark(k - 1);
    const bool moved = k >= 3 && h.mark(k - 2) != prev;
    const double stay = l == 1 ? 1.0 : (moved ? p.p_stay_after_move : p.p_stay_after_stay);
    out.push_back({with(prev), stay});
    for (int loc = 0; loc < l; ++loc)
      if (loc != prev) out.push_back({with(loc), (1.0 - stay) / (l - 1)});
    return out;
  };
  return ScenarioModel(std::move(grid), params.locations, params.steps, law);
}

std::vector<SweepRow> location_delta_sweep(const LocationModelParams& params, const LocationSpec& spec,
                                           const std::vector<int>& delta_steps) {
  std::vector<SweepRow> out;
  for (int d : delta_steps) {
    auto p = params;
    p.delta_steps = d;
    const auto space = PathSpace::enumerate(build_location_model(p));
    const ExactEngine engine(space);
    auto s = spec;
    s.delta = d * params.dt;
    const auto rep = location_predictor(engine, s);
    SweepRow row;
    row.delta = s.delta;
    row.max_abs_ib = rep.max_abs_ib;
    row.max_abs_residual = rep.max_abs_residual;
    for (const auto& r : rep.rows)
      if (r.step == rep.last_step) row.mean_abs_ib += space.weight(r.path_id) * std::abs(r.ib_integral);
    out.push_back(row);
  }
  return out;
}

bool location_refines(const LocationModelParams& params, int delta_lo, int delta_hi) {
  auto build = [&](int d) {
    auto p = params;
    p.delta_steps = d;
    return PathSpace::enumerate(build_location_model(p));
  };
  const auto lo = build(delta_lo);
  const auto hi = build(delta_hi);
  auto measurements = [](const PathRecord& p) { return p.marks; };
  std::map<std::vector<int>, std::size_t> lo_index;
  for (std::size_t i = 0; i < lo.size(); ++i) lo_index[measurements(lo.path(i))] = i;
  if (lo_index.size() != hi.size()) return false;
  for (int k = 0; k <= hi.steps(); ++k) {
    std::map<int, int> cell_map;  // hi cell -> lo cell
    for (std::size_t j = 0; j < hi.size(); ++j) {
      auto it = lo_index.find(measurements(hi.path(j)));
      if (it == lo_index.end()) return false;
      const int lo_cell = lo.state_id(it->second, k);
      auto [m, inserted] = cell_map.emplace(hi.state_id(j, k), lo_cell);
      if (m->second != lo_cell) return false;
    }
  }
  return true;
}

}  // namespace imr
