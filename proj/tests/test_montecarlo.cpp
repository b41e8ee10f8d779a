#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "imr/measures.hpp"
#include "imr/montecarlo.hpp"
#include "imr/projection.hpp"
#include "support/generators.hpp"
#include "support/models.hpp"

using namespace imr;
using namespace imr::testing;

namespace {

double chi2(const ScenarioModel& model, std::uint64_t seed, std::size_t n) {
  std::map<std::string, double> p;
  for (const auto& path : enumerate_paths(model)) p[path.key()] = path.probability;
  SimulationConfig cfg;
  cfg.seed = seed;
  cfg.n_paths = n;
  const auto sample = simulate_space(model, cfg);
  std::map<std::string, double> f;
  for (std::size_t i = 0; i < sample.size(); ++i) f[sample.path(i).key()] = sample.weight(i);
  double d = 0.0;
  for (const auto& [k, pk] : p) d += (f[k] - pk) * (f[k] - pk) / pk;
  return d;
}

}  // namespace

TEST_CASE("deterministic model: every simulated path is the same") {
  const auto model = deterministic_model();
  SimulationConfig cfg;
  cfg.n_paths = 500;
  const auto paths = simulate_paths(model, cfg);
  for (const auto& p : paths) CHECK(p == paths.front());
}

TEST_CASE("bernoulli frequency is within four binomial standard errors") {
  const auto model = bernoulli_model(0.5);
  SimulationConfig cfg;
  cfg.seed = 12345;
  cfg.n_paths = 100000;
  std::size_t hits = 0;
  for (const auto& p : simulate_paths(model, cfg)) hits += p.innovation_step[0] == 1 ? 1 : 0;
  const double freq = static_cast<double>(hits) / 1e5;
  CHECK(std::abs(freq - 0.5) <= 4.0 / std::sqrt(1e5));
}

TEST_CASE("chi-square distance to the enumerated law shrinks with n") {
  const auto model = two_mark_deletion_model();
  double prev = 1e9;
  for (std::size_t n : {1000, 10000, 100000}) {
    double d = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) d += chi2(model, seed, n);
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("simulation is deterministic and independent of the thread count") {
  const auto model = two_mark_deletion_model();
  SimulationConfig cfg;
  cfg.seed = 99;
  cfg.n_paths = 5000;
  const auto a = simulate_paths(model, cfg);
  cfg.threads = 3;
  const auto b = simulate_paths(model, cfg);
  CHECK(a == b);
  cfg.seed = 100;
  CHECK(simulate_paths(model, cfg) != a);
  // the empirical space sees exactly the same draws
  cfg.seed = 99;
  const auto space = simulate_space(model, cfg);
  std::map<std::string, std::size_t> counts;
  for (const auto& p : a) ++counts[p.key()];
  for (std::size_t i = 0; i < space.size(); ++i) CHECK(space.count(i) == counts[space.path(i).key()]);

  auto r1 = path_stream(7, 42), r2 = path_stream(7, 42), r3 = path_stream(7, 43);
  CHECK(r1() == r2());
  CHECK(uniform01(r1) == uniform01(r2));
  CHECK(r2() != r3());
}

TEST_CASE("projection estimates") {
  const auto model = two_mark_deletion_model();
  const auto exact = PathSpace::enumerate(model);
  SUBCASE("constant xi is estimated exactly in every visited cell") {
    SimulationConfig cfg;
    cfg.n_paths = 2000;
    const auto sample = simulate_space(model, cfg);
    for (const auto& c : estimate_projection(sample, std::vector<double>(sample.size(), 1.5))) {
      CHECK(c.present);
      CHECK(c.estimate == 1.5);
      CHECK(c.stderr_ == 0.0);
    }
  }
  SUBCASE("unvisited cells are flagged absent") {
    const auto rare = bernoulli_model(0.001);
    const auto ref = PathSpace::enumerate(rare);
    SimulationConfig cfg;
    cfg.seed = 1;
    cfg.n_paths = 20;
    const auto sample = simulate_space(rare, cfg);
    REQUIRE(sample.size() == 1);
    const auto cells = estimate_projection(sample, std::vector<double>(1, 1.0), &ref);
    std::size_t absent = 0;
    for (const auto& c : cells) absent += c.present ? 0 : 1;
    CHECK(absent == 1);
    std::ostringstream csv;
    write_estimates_csv(csv, cells);
    CHECK(csv.str().rfind("t,state_key,estimate,stderr,n_cell\n", 0) == 0);
    CHECK(csv.str().find("absent,absent") != std::string::npos);
  }
  SUBCASE("estimates fall within five standard errors of exact values") {
    const auto xi_of = [](const PathRecord& p) { return (p.marks[0] == 0 ? 1.0 : 0.0) + (p.innovation_step[1] == 3 ? 0.5 : 0.0); };
    const ExactEngine engine(exact);
    const auto bound = engine.bind(exact.evaluate(xi_of));
    std::map<std::pair<int, std::string>, double> truth;
    for (std::size_t i = 0; i < exact.size(); ++i)
      for (int k = 0; k <= 3; ++k)
        truth[{k, exact.state(i, k).key(model)}] = conditional_on_information(engine, bound, i, k, Side::right);
    std::size_t cells = 0, ok = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      SimulationConfig cfg;
      cfg.seed = seed;
      cfg.n_paths = 20000;
      const auto sample = simulate_space(model, cfg);
      for (const auto& c : estimate_projection(sample, sample.evaluate(xi_of), &exact)) {
        REQUIRE(c.present);
        ++cells;
        const double err = std::abs(c.estimate - truth.at({c.step, c.state_key}));
        if (err <= 5.0 * c.stderr_ || err <= 1e-12) ++ok;
      }
    }
    CHECK(static_cast<double>(ok) >= 0.99 * static_cast<double>(cells));
  }
}

TEST_CASE("partition sums") {
  const auto space = PathSpace::enumerate(random_model(11, RandomModelOptions{}));
  const ExactEngine engine(space);
  const auto n = static_cast<std::size_t>(space.steps());

  SUBCASE("constant process: all sums vanish") {
    const ProcessValues x(n + 1, std::vector<double>(space.size(), 2.0));
    for (auto side : {PartitionSide::forward, PartitionSide::backward}) {
      const auto d = partition_sum_diagnostic(engine, x, side, 2);
      for (const auto& level : d.levels)
        for (double s : level.sums) CHECK(s == 0.0);
    }
  }
  SUBCASE("levels are nested with non-increasing mesh, the finest is the grid") {
    const auto x = random_process(space, 5);
    const auto d = partition_sum_diagnostic(engine, x, PartitionSide::forward, 3);
    REQUIRE(!d.levels.empty());
    for (std::size_t l = 1; l < d.levels.size(); ++l) {
      CHECK(d.levels[l].mesh <= d.levels[l - 1].mesh);
      for (int p : d.levels[l - 1].points)
        CHECK(std::find(d.levels[l].points.begin(), d.levels[l].points.end(), p) != d.levels[l].points.end());
    }
    CHECK(d.levels.back().points.size() == n + 1);
    const auto capped = partition_sum_diagnostic(engine, x, PartitionSide::forward, 40);
    CHECK(capped.capped);
    CHECK(!capped.notice.empty());
    std::ostringstream csv;
    write_diagnostics_csv(csv, d);
    CHECK(csv.str().rfind("path_id,level,mesh,sum\n", 0) == 0);
  }
  SUBCASE("compensated counting processes have vanishing finest sums") {
    const auto pm = compute_path_measures(engine);
    std::vector<MeasureAtoms> mu, nu, rho;
    for (const auto& m : pm) {
      mu.push_back(m.mu);
      nu.push_back(m.nu);
      rho.push_back(m.rho);
    }
    const auto a = measure_process(space, mu);
    const auto b = measure_process(space, nu);
    const auto c = measure_process(space, rho);
    ProcessValues fwd = a, bwd = a;
    for (std::size_t k = 0; k <= n; ++k)
      for (std::size_t i = 0; i < space.size(); ++i) {
        fwd[k][i] -= b[k][i];
        bwd[k][i] -= c[k][i];
      }
    const auto df = partition_sum_diagnostic(engine, fwd, PartitionSide::forward, 3);
    const auto db = partition_sum_diagnostic(engine, bwd, PartitionSide::backward, 3);
    for (double s : df.levels.back().sums) CHECK(std::abs(s) < 1e-10);
    for (double s : db.levels.back().sums) CHECK(std::abs(s) < 1e-10);
    const auto g = partition_sum_diagnostic(engine, b, PartitionSide::forward, 3).levels.back().sums;
    for (std::size_t i = 0; i < space.size(); ++i) CHECK(std::abs(g[i] - b[n][i]) < 1e-10);
  }
}
