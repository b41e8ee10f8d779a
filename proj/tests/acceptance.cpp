// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "imr/applications.hpp"
#include "imr/measures.hpp"
#include "imr/montecarlo.hpp"
#include "imr/projection.hpp"
#include "imr/representation.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace imr;
using namespace imr::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("criterion %d %s: %s (%s)\n", id, pass ? "PASS" : "FAIL", title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double unit_hash(std::uint64_t seed, const std::string& s) {
  return static_cast<double>(hash_string(seed, s) >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

std::string key_string(const AtomKey& k) {
  std::string s = std::to_string(k.step) + "|";
  for (int i : k.indices) s += std::to_string(i) + ",";
  s += "|";
  for (int m : k.marks) s += std::to_string(m) + ",";
  return s;
}

constexpr int kSuite = 100;

// The suite shared by criteria 1, 2, 4, 5, 6, 7.
std::vector<PathSpace> make_suite() {
  std::vector<PathSpace> out;
  RandomModelOptions opt;
  for (int m = 0; m < kSuite; ++m) out.push_back(PathSpace::enumerate(random_model(1000 + m, opt)));
  return out;
}

void criterion1(const std::vector<PathSpace>& suite) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t xis = 0;
  for (std::size_t m = 0; m < suite.size(); ++m) {
    const ExactEngine engine(suite[m]);
    const auto measures = compute_path_measures(engine);
    for (int r = 0; r < 3; ++r) {
      const auto xi = random_xi(suite[m], 77 * m + r);
      worst = std::max(worst, verify_representation_xi(engine, xi, &measures).max_abs_residual);
      ++xis;
    }
  }
  const double secs = seconds_since(t0);
  report(1, "representation exactness", worst < 1e-10 && secs < 60.0,
         fmt("max residual %.3g over %.0f variables, %.2f s", worst, static_cast<double>(xis), secs));
}

void criterion2(const std::vector<PathSpace>& suite) {
  const auto t0 = Clock::now();
  double worst_ib = 0.0, worst_if = 0.0;
  for (std::size_t m = 0; m < suite.size(); ++m) {
    const auto& space = suite[m];
    const ExactEngine engine(space);
    const auto measures = compute_path_measures(engine);
    // rate depends on the active set, the time and the (possibly deleted) mark of piece 1
    const std::uint64_t seed = 5000 + m;
    SojournRate h = [seed](const std::vector<int>& active, int step, const PathRecord& p) {
      std::string s = std::to_string(step) + ":";
      for (int i : active) s += std::to_string(i) + ",";
      return unit_hash(seed, s) * (1.0 + 0.5 * static_cast<double>(p.marks[0] == 0));
    };
    TimeMeasure gamma;
    gamma.lebesgue = true;
    gamma.dirac_steps = {static_cast<int>(m % static_cast<std::size_t>(space.steps())) + 1};
    for (auto side : {DriftSide::ib, DriftSide::if_}) {
      const auto x = sojourn_process(space, h, gamma, side == DriftSide::ib ? Side::right : Side::left);
      ProcessValues drift(x.size(), std::vector<double>(space.size()));
      for (std::size_t i = 0; i < space.size(); ++i) {
        const auto ledger = sojourn_compensator(engine, i, h, gamma);
        const auto& c = side == DriftSide::ib ? ledger.ib : ledger.if_;
        for (std::size_t k = 0; k < x.size(); ++k) drift[k][i] = c[k];
      }
      const double r = verify_representation_process(engine, x, side, &drift, std::nullopt, &measures).max_abs_residual;
      (side == DriftSide::ib ? worst_ib : worst_if) = std::max(side == DriftSide::ib ? worst_ib : worst_if, r);
    }
  }
  report(2, "process representation (sojourn payments)", worst_ib < 1e-10 && worst_if < 1e-10,
         fmt("max residual ib side %.3g, if side %.3g, %.2f s", worst_ib, worst_if, seconds_since(t0)));
}

void criterion3() {
  RandomModelOptions opt;
  opt.deletions = false;
  opt.time_tagged = true;
  bool rho_exact = true;
  double nu_lambda = 0.0, ib = 0.0, classical = 0.0;
  std::size_t compared = 0;
  for (int m = 0; m < 25; ++m) {
    const auto space = PathSpace::enumerate(random_model(3000 + m, opt));
    const ExactEngine engine(space);
    const auto measures = compute_path_measures(engine);
    const auto xi = random_xi(space, 31 + m);
    const auto rep = verify_representation_xi(engine, xi, &measures);
    for (const auto& row : rep.rows) ib = std::max(ib, std::abs(row.ib_integral));
    const XiSchedule sched(engine, xi);
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto& pm = measures[i];
      if (pm.rho.size() != pm.mu.size()) rho_exact = false;
      for (std::size_t a = 0; a < std::min(pm.rho.size(), pm.mu.size()); ++a)
        if (pm.rho.atoms()[a].key != pm.mu.atoms()[a].key || pm.rho.atoms()[a].mass != pm.mu.atoms()[a].mass) rho_exact = false;
      const auto lambda = compute_lambda(engine, i);
      std::set<AtomKey> keys;
      for (const auto& a : pm.nu.atoms()) keys.insert(a.key);
      for (const auto& a : lambda.atoms()) keys.insert(a.key);
      for (const auto& k : keys) nu_lambda = std::max(nu_lambda, std::abs(pm.nu.mass(k) - lambda.mass(k)));
      const auto g = integrand_xi(engine, i, sched);
      for (int k = 1; k <= space.steps(); ++k)
        for (const auto& [key, v] : classical_oracle(space, i, k, xi)) {
          const auto it = g.left.values.find(key);
          classical = std::max(classical, it == g.left.values.end() ? 1.0 : std::abs(it->second - v));
          ++compared;
        }
    }
  }
  report(3, "classical collapse without deletions",
         rho_exact && nu_lambda < 1e-12 && ib == 0.0 && classical < 1e-10,
         std::string(rho_exact ? "rho == mu exactly" : "rho != mu") +
             fmt(", max |nu - lambda| %.3g, max |ib| %.3g, max integrand gap %.3g", nu_lambda, ib, classical) +
             " over " + std::to_string(compared) + " integrand values");
}

void criterion4(const std::vector<PathSpace>& suite) {
  double worst = 0.0;
  for (const auto& space : suite) {
    const ExactEngine engine(space);
    const auto measures = compute_path_measures(engine);
    // expected mass per (I, e) and step, for each measure
    std::map<std::pair<IndexSet, MarkTuple>, std::vector<std::array<double, 3>>> mass;
    auto add = [&](const MeasureAtoms& a, int which, double w) {
      for (const auto& atom : a.atoms()) {
        auto& v = mass[{atom.key.indices, atom.key.marks}];
        v.resize(static_cast<std::size_t>(space.steps() + 1), {0.0, 0.0, 0.0});
        v[static_cast<std::size_t>(atom.key.step)][static_cast<std::size_t>(which)] += w * atom.mass;
      }
    };
    for (std::size_t i = 0; i < space.size(); ++i) {
      add(measures[i].mu, 0, space.weight(i));
      add(measures[i].nu, 1, space.weight(i));
      add(measures[i].rho, 2, space.weight(i));
    }
    for (const auto& [key, v] : mass) {
      std::array<double, 3> cum{0.0, 0.0, 0.0};
      for (const auto& step : v) {
        for (int j = 0; j < 3; ++j) cum[static_cast<std::size_t>(j)] += step[static_cast<std::size_t>(j)];
        worst = std::max({worst, std::abs(cum[0] - cum[1]), std::abs(cum[0] - cum[2])});
      }
    }
  }
  report(4, "compensation in the mean", worst < 1e-12, fmt("max |E mu - E nu|, |E mu - E rho| = %.3g", worst));
}

void criterion5(const std::vector<PathSpace>& suite) {
  double mart_f = 0.0, mart_b = 0.0, incr_f = 0.0, incr_b = 0.0;
  for (std::size_t m = 0; m < suite.size(); ++m) {
    const auto& space = suite[m];
    const ExactEngine engine(space);
    const std::uint64_t seed = 9000 + m;
    IntegrandField f = [seed](const PathRecord& p, const AtomKey& k) -> std::optional<double> {
      return unit_hash(seed, p.key() + "#" + key_string(k));
    };
    std::vector<MeasureAtoms> fmu, gnu, hrho;
    for (std::size_t i = 0; i < space.size(); ++i) {
      fmu.push_back(integrand_times_mu(space.model(), space.path(i), f));
      auto pair = if_ib_compensate(engine, i, f);
      gnu.push_back(std::move(pair.forward));
      hrho.push_back(std::move(pair.backward));
    }
    const auto a = measure_process(space, fmu);
    const auto g = measure_process(space, gnu);
    const auto h = measure_process(space, hrho);
    auto diff = [](ProcessValues x, const ProcessValues& y) {
      for (std::size_t k = 0; k < x.size(); ++k)
        for (std::size_t i = 0; i < x[k].size(); ++i) x[k][i] -= y[k][i];
      return x;
    };
    auto finest = [&](const ProcessValues& x, PartitionSide side) {
      return partition_sum_diagnostic(engine, x, side, 3).levels.back().sums;
    };
    const auto n = static_cast<std::size_t>(space.steps());
    const auto sf = finest(diff(a, g), PartitionSide::forward);
    const auto sb = finest(diff(a, h), PartitionSide::backward);
    const auto cf = finest(g, PartitionSide::forward);
    const auto cb = finest(h, PartitionSide::backward);
    for (std::size_t i = 0; i < space.size(); ++i) {
      mart_f = std::max(mart_f, std::abs(sf[i]));
      mart_b = std::max(mart_b, std::abs(sb[i]));
      incr_f = std::max(incr_f, std::abs(cf[i] - (g[n][i] - g[0][i])));
      incr_b = std::max(incr_b, std::abs(cb[i] - (h[n][i] - h[0][i])));
    }
  }
  report(5, "partition diagnostics at the finest level",
         mart_f < 1e-10 && mart_b < 1e-10 && incr_f < 1e-10 && incr_b < 1e-10,
         fmt("martingale sums fwd %.3g bwd %.3g; ", mart_f, mart_b) +
             fmt("compensator sums vs increments fwd %.3g bwd %.3g", incr_f, incr_b));
}

void criterion6(const std::vector<PathSpace>& suite) {
  double worst = 0.0;
  for (std::size_t m = 0; m < suite.size(); ++m) {
    const auto& space = suite[m];
    const ExactEngine engine(space);
    const auto xi = random_xi(space, 400 + m);
    const auto a = optional_projection(engine, engine.bind(xi));
    const auto b = partition_projection(space, xi);
    for (std::size_t i = 0; i < space.size(); ++i)
      for (int k = 0; k <= space.steps(); ++k) {
        const auto kk = static_cast<std::size_t>(k);
        worst = std::max(worst, std::abs(a[i].right[kk] - b[i].right[kk]));
        if (k > 0) worst = std::max(worst, std::abs(a[i].left[kk] - b[i].left[kk]));
      }
  }
  report(6, "ratio formula equals partition projection", worst < 1e-12, fmt("max difference %.3g", worst));
}

void criterion7(const std::vector<PathSpace>& suite) {
  double worst = 0.0;
  std::size_t compared = 0, missing = 0;
  for (std::size_t m = 0; m < suite.size(); ++m) {
    const auto& space = suite[m];
    const ExactEngine engine(space);
    const XiSchedule xi(engine, random_xi(space, 700 + m));
    const auto measures = compute_path_measures(engine);
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto a = integrand_xi(engine, i, xi);
      const auto b = integrand_interpretation(engine, i, xi);
      auto cmp = [&](const IntegrandTable& x, const IntegrandTable& y, const MeasureAtoms& reach) {
        for (const auto& atom : reach.atoms()) {
          const auto ix = x.values.find(atom.key);
          const auto iy = y.values.find(atom.key);
          if (ix == x.values.end() || iy == y.values.end()) {
            ++missing;
            continue;
          }
          worst = std::max(worst, std::abs(ix->second - iy->second));
          ++compared;
        }
      };
      for (const auto* reach : {&measures[i].mu, &measures[i].nu}) cmp(a.left, b.left, *reach);
      for (const auto* reach : {&measures[i].mu, &measures[i].rho}) cmp(a.right, b.right, *reach);
    }
  }
  report(7, "change-minus-remain integrand equals the ratio integrand", worst < 1e-10 && missing == 0,
         fmt("max difference %.3g over %.0f atoms, %.0f missing", worst, static_cast<double>(compared),
             static_cast<double>(missing)));
}

void criterion8() {
  const auto t0 = Clock::now();
  RandomModelOptions opt;
  opt.max_steps = 3;
  opt.min_probability = 0.1;
  std::size_t cells = 0, within = 0;
  bool identical = true;
  for (int m = 0; m < 10; ++m) {
    const auto model = random_model(8000 + m, opt);
    const auto exact = PathSpace::enumerate(model);
    const auto xi_exact = random_xi(exact, 55 + m);
    const auto truth = partition_projection(exact, xi_exact);
    std::map<std::pair<int, std::string>, double> value;
    for (std::size_t i = 0; i < exact.size(); ++i)
      for (int k = 0; k <= exact.steps(); ++k)
        value[{k, exact.state(i, k).key(exact.model())}] = truth[i].right[static_cast<std::size_t>(k)];
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      SimulationConfig cfg;
      cfg.seed = seed;
      cfg.n_paths = 100000;
      cfg.threads = 4;
      const auto sample = simulate_space(model, cfg);
      const auto xi = random_xi(sample, 55 + m);
      const auto est = estimate_projection(sample, xi, &exact);
      for (const auto& c : est) {
        ++cells;
        if (!c.present) continue;
        const double err = std::abs(c.estimate - value.at({c.step, c.state_key}));
        if (err <= 5.0 * c.stderr_ || err <= 1e-12) ++within;
      }
      if (seed == 1) {
        cfg.threads = 1;
        const auto again = simulate_space(model, cfg);
        const auto est2 = estimate_projection(again, random_xi(again, 55 + m), &exact);
        std::ostringstream s1, s2;
        write_estimates_csv(s1, est);
        write_estimates_csv(s2, est2);
        identical = identical && s1.str() == s2.str();
      }
    }
  }
  const double share = static_cast<double>(within) / static_cast<double>(cells);
  const double secs = seconds_since(t0);
  report(8, "Monte Carlo consistency", share >= 0.99 && identical && secs < 120.0,
         fmt("%.2f%% of cells within 5 standard errors, ", 100.0 * share) + (identical ? "reruns identical" : "reruns differ") +
             fmt(", %.1f s", secs));
}

// Independent check of the duration model gap: both conditionings by enumeration.
double duration_gap_oracle(const PathSpace& space, const std::function<double(int, int)>& f) {
  auto state = [](const PathRecord& p, int k) {
    int y = kNullMark, n = 0, last = -1;
    for (int piece = 1; piece <= p.max_pieces(); ++piece) {
      const int a = p.innovation_step[static_cast<std::size_t>(piece - 1)];
      if (a == kNever || a > k) continue;
      ++n;
      if (a > last) {
        last = a;
        y = p.marks[static_cast<std::size_t>(piece - 1)];
      }
    }
    return std::make_pair(y, std::max(0, n - 1));
  };
  std::vector<double> v;
  for (const auto& p : space.paths()) {
    const auto [y, n] = state(p, space.steps());
    v.push_back(f(y, n));
  }
  double gap = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i)
    for (int k = 0; k <= space.steps(); ++k) {
      const double full = cell_mean(space, v, [&](std::size_t j) { return same_prefix(space.path(i), space.path(j), k); });
      const auto si = state(space.path(i), k);
      const double part = cell_mean(space, v, [&](std::size_t j) { return state(space.path(j), k) == si; });
      gap = std::max(gap, std::abs(full - part));
    }
  return gap;
}

void criterion9() {
  // Thiele
  double thiele_res = 0.0, thiele_terminal = 0.0;
  for (int records : {1, 2}) {
    for (int steps : {3, 4}) {
      ThieleModelParams p;
      p.steps = steps;
      p.health_records = records;
      const auto space = PathSpace::enumerate(build_thiele_model(p));
      const ExactEngine engine(space);
      InsuranceContract c;
      c.a = [](double t) { return 1.0 + 0.1 * t; };
      c.b = [](double t) { return 10.0 - t; };
      c.phi = [](double) { return 0.03; };
      c.horizon = space.model().horizon();
      const auto r = thiele_reserve(engine, c);
      thiele_res = std::max(thiele_res, r.max_abs_residual);
      thiele_terminal = std::max(thiele_terminal, r.max_abs_terminal);
    }
  }
  // Markov chains
  double markov = 0.0;
  const std::function<double(int, int)> f = [](int y, int n) { return (y == 0 ? 1.0 : 0.0) + 0.3 * n; };
  for (const auto& tm : {std::vector<std::vector<double>>{{0.7, 0.3}, {0.4, 0.6}},
                         std::vector<std::vector<double>>{{0.5, 0.3, 0.2}, {0.1, 0.8, 0.1}, {0.3, 0.3, 0.4}}}) {
    JumpModelParams p;
    p.states = tm.size() == 2 ? std::vector<std::string>{"a", "b"} : std::vector<std::string>{"a", "b", "c"};
    p.initial.assign(tm.size(), 1.0 / static_cast<double>(tm.size()));
    p.steps = 4;
    const auto space = PathSpace::enumerate(build_jump_model(p, markov_jump_law(tm)));
    const ExactEngine engine(space);
    markov = std::max(markov, markov_gap(engine, MarkovApproxSpec{f}).max_gap);
  }
  // location with retention beyond the horizon
  double location_ib = 0.0;
  for (int extra : {0, 1, 3}) {
    LocationModelParams p;
    p.steps = 4;
    p.delta_steps = p.steps + extra;
    const auto space = PathSpace::enumerate(build_location_model(p));
    const ExactEngine engine(space);
    LocationSpec s;
    s.delta = space.model().horizon() + extra;
    s.lag = 1.0;
    s.area = {0};
    location_ib = std::max(location_ib, location_predictor(engine, s).max_abs_ib);
  }
  // duration-dependent jumps
  JumpModelParams p;
  p.steps = 4;
  const auto space = PathSpace::enumerate(build_jump_model(p, duration_jump_law({0.1, 0.6, 0.2}, 2)));
  const ExactEngine engine(space);
  const double gap = markov_gap(engine, MarkovApproxSpec{f}).max_gap;
  const double oracle = duration_gap_oracle(space, f);

  const bool pass = thiele_res < 1e-9 && thiele_terminal == 0.0 && markov <= 1e-12 && location_ib <= 1e-12 &&
                    gap > 0.0 && std::abs(gap - oracle) <= 1e-12;
  report(9, "applications", pass,
         fmt("thiele residual %.3g, |X_T| %.3g, markov gap %.3g; ", thiele_res, thiele_terminal, markov) +
             fmt("location ib %.3g; duration gap %.4g (oracle %.4g)", location_ib, gap, oracle));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const auto suite = make_suite();
  std::size_t paths = 0;
  for (const auto& s : suite) paths += s.size();
  std::printf("suite: %d random models, %zu paths, built in %.2f s\n", kSuite, paths, seconds_since(t0));
  criterion1(suite);
  criterion2(suite);
  criterion3();
  criterion4(suite);
  criterion5(suite);
  criterion6(suite);
  criterion7(suite);
  criterion8();
  criterion9();
  std::printf("%s: %d of 9 criteria failed, %.1f s\n", failures ? "FAIL" : "PASS", failures, seconds_since(t0));
  return failures ? 1 : 0;
}
