// imr: command-line front end over the library.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "imr/applications.hpp"
#include "imr/io.hpp"
#include "imr/measures.hpp"
#include "imr/montecarlo.hpp"
#include "imr/projection.hpp"
#include "imr/representation.hpp"

namespace fs = std::filesystem;
namespace io = imr::io;
using nlohmann::json;

namespace {

struct Options {
  std::string model;
  std::string out;
  std::uint64_t seed = 1;
  std::size_t n_paths = 10000;
  double tol = 1e-10;
  std::string app;
  std::string target;
  int levels = 3;
  std::string drift = "ib";
  unsigned threads = 1;
  std::size_t max_paths = 2'000'000;
};

struct Run {
  std::string command;
  Options opt;
  json results = json::object();
  bool ok = true;

  void check(const std::string& name, bool pass, const std::string& detail) {
    results["contracts"][name] = {{"pass", pass}, {"detail", detail}};
    std::cout << (pass ? "  ok    " : "  FAIL  ") << name << ": " << detail << "\n";
    ok = ok && pass;
  }
};

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

std::ofstream open_out(const Options& o, const std::string& name) {
  std::ofstream f(fs::path(o.out) / name);
  if (!f) throw std::runtime_error("cannot write " + (fs::path(o.out) / name).string());
  f << std::setprecision(17);
  return f;
}

void write_manifest(const Run& run) {
  json flags = {{"tol", run.opt.tol}, {"n_paths", run.opt.n_paths}, {"levels", run.opt.levels},
                {"drift", run.opt.drift}, {"threads", run.opt.threads}};
  if (!run.opt.app.empty()) flags["app"] = run.opt.app;
  if (!run.opt.target.empty()) flags["target"] = run.opt.target;
  json m = {{"command", run.command}, {"model", run.opt.model},   {"out", run.opt.out},
            {"seed", run.opt.seed},   {"flags", flags},           {"results", run.results},
            {"status", run.ok ? "pass" : "fail"}};
  auto f = open_out(run.opt, "manifest.json");
  f << m.dump(2) << "\n";
}

// "xi:name" -> {"xi", "name"}; a bare name is looked up in xi, process and sojourn in that order.
std::pair<std::string, std::string> split_target(const io::ModelDocument& doc, const std::string& t) {
  const auto colon = t.find(':');
  if (colon != std::string::npos) return {t.substr(0, colon), t.substr(colon + 1)};
  if (doc.xi.count(t)) return {"xi", t};
  if (doc.process.count(t)) return {"process", t};
  if (doc.sojourn.count(t)) return {"sojourn", t};
  throw std::runtime_error("unknown target '" + t + "'");
}

void write_measures(const Options& o, const imr::PathSpace& space, const std::vector<imr::PathMeasures>& pm) {
  const auto dir = fs::path(o.out) / "atoms";
  fs::create_directories(dir);
  for (std::size_t i = 0; i < pm.size(); ++i) {
    std::ofstream f(dir / ("path_" + std::to_string(i) + ".csv"));
    f << std::setprecision(17);
    imr::write_atoms_csv(f, space.model(), pm[i].mu, true);
    imr::write_atoms_csv(f, space.model(), pm[i].nu, false);
    imr::write_atoms_csv(f, space.model(), pm[i].rho, false);
  }
}

void cmd_enumerate(Run& run, const io::ModelDocument& doc) {
  const auto space = imr::PathSpace::enumerate(*doc.model, run.opt.max_paths);
  const auto& model = space.model();
  auto paths = open_out(run.opt, "paths.csv");
  paths << "path_id,probability,history\n";
  double total = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& p = space.path(i);
    imr::History h(model.max_pieces());
    for (std::size_t k = 1; k < p.events.size(); ++k) h.push(p.events[k]);
    paths << i << "," << space.weight(i) << ",\"" << model.history_key(h) << "\"\n";
    total += space.weight(i);
  }
  auto states = open_out(run.opt, "states.csv");
  states << "path_id,t,side,state_key\n";
  for (std::size_t i = 0; i < space.size(); ++i)
    for (int k = 0; k <= space.steps(); ++k) {
      states << i << "," << model.time(k) << ",right,\"" << space.state(i, k).key(model) << "\"\n";
      if (k > 0) states << i << "," << model.time(k) << ",left,\"" << space.state(i, k, imr::Side::left).key(model) << "\"\n";
    }
  run.results["paths"] = space.size();
  run.results["total_probability"] = total;
  std::cout << "paths: " << space.size() << "\n";
  run.check("probabilities sum to 1", std::abs(total - 1.0) <= 1e-12, "total " + num(total));
}

void cmd_verify(Run& run, const io::ModelDocument& doc) {
  const auto space = imr::PathSpace::enumerate(*doc.model, run.opt.max_paths);
  const imr::ExactEngine engine(space);
  std::string target = run.opt.target;
  if (target.empty()) {
    if (doc.xi.empty()) throw std::runtime_error("no --target given and the model defines no xi payoff");
    target = "xi:" + doc.xi.begin()->first;
  }
  const auto [kind, name] = split_target(doc, target);
  const auto measures = imr::compute_path_measures(engine);
  const auto side = run.opt.drift == "if" ? imr::DriftSide::if_ : imr::DriftSide::ib;

  imr::RepresentationReport report;
  if (kind == "xi") {
    const auto xi = space.evaluate(doc.xi_functional(name));
    report = imr::verify_representation_xi(engine, xi, &measures);
  } else if (kind == "process") {
    const auto x = space.evaluate(doc.process_functional(name));
    report = imr::verify_representation_process(engine, x, side, nullptr, std::nullopt, &measures);
  } else if (kind == "sojourn") {
    const auto it = doc.sojourn.find(name);
    if (it == doc.sojourn.end()) throw std::runtime_error("unknown sojourn target '" + name + "'");
    const auto h = doc.sojourn_rate(name);
    const auto x = imr::sojourn_process(space, h, it->second.gamma,
                                        side == imr::DriftSide::ib ? imr::Side::right : imr::Side::left);
    imr::ProcessValues drift(x.size(), std::vector<double>(space.size()));
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto ledger = imr::sojourn_compensator(engine, i, h, it->second.gamma);
      const auto& c = side == imr::DriftSide::ib ? ledger.ib : ledger.if_;
      for (std::size_t k = 0; k < x.size(); ++k) drift[k][i] = c[k];
    }
    report = imr::verify_representation_process(engine, x, side, &drift, std::nullopt, &measures);
  } else {
    throw std::runtime_error("unknown target kind '" + kind + "' (use xi:, process: or sojourn:)");
  }

  auto f = open_out(run.opt, "representation_report.csv");
  imr::write_report_csv(f, report);
  write_measures(run.opt, space, measures);

  double max_ib = 0.0;
  for (const auto& r : report.rows) max_ib = std::max(max_ib, std::abs(r.ib_integral));
  run.results["target"] = kind + ":" + name;
  run.results["paths"] = space.size();
  run.results["max_abs_residual"] = report.max_abs_residual;
  run.results["max_abs_ib_integral"] = max_ib;
  run.results["zero_denominators"] = report.zero_denominators;
  std::cout << "target " << kind << ":" << name << " on " << space.size() << " paths\n"
            << "max |ib_integral| " << num(max_ib) << ", zero denominators " << report.zero_denominators << "\n";
  run.check("representation residual", report.max_abs_residual <= run.opt.tol,
            "max |residual| " + num(report.max_abs_residual) + " (tol " + num(run.opt.tol) + ")");
}

void cmd_simulate(Run& run, const io::ModelDocument& doc) {
  imr::SimulationConfig cfg;
  cfg.seed = run.opt.seed;
  cfg.n_paths = run.opt.n_paths;
  cfg.threads = run.opt.threads;
  std::string target = run.opt.target;
  if (target.empty() && !doc.xi.empty()) target = "xi:" + doc.xi.begin()->first;
  if (!target.empty()) cfg.targets.push_back(target);
  const auto sample = imr::simulate_space(*doc.model, cfg);

  std::optional<imr::PathSpace> exact;
  try {
    exact.emplace(imr::PathSpace::enumerate(*doc.model, run.opt.max_paths));
  } catch (const imr::ModelError&) {
    std::cout << "model not enumerable within " << run.opt.max_paths << " paths; no exact reference\n";
  }

  run.results["distinct_paths"] = sample.size();
  if (!target.empty()) {
    const auto [kind, name] = split_target(doc, target);
    if (kind != "xi") throw std::runtime_error("simulate estimates xi targets only");
    const auto xi = sample.evaluate(doc.xi_functional(name));
    const auto cells = imr::estimate_projection(sample, xi, exact ? &*exact : nullptr);
    auto f = open_out(run.opt, "estimates.csv");
    imr::write_estimates_csv(f, cells);
    std::size_t absent = 0;
    for (const auto& c : cells) absent += c.present ? 0 : 1;
    run.results["cells"] = cells.size();
    run.results["absent_cells"] = absent;
    if (exact) {
      const imr::ExactEngine ee(*exact);
      const auto bound = ee.bind(exact->evaluate(doc.xi_functional(name)));
      // exact value per (step, state key)
      std::map<std::pair<int, std::string>, double> truth;
      for (std::size_t i = 0; i < exact->size(); ++i)
        for (int k = 0; k <= exact->steps(); ++k)
          truth.emplace(std::make_pair(k, exact->state(i, k).key(exact->model())),
                        imr::conditional_on_information(ee, bound, i, k, imr::Side::right));
      std::size_t checked = 0, within = 0;
      for (const auto& c : cells) {
        if (!c.present) continue;
        ++checked;
        const double err = std::abs(c.estimate - truth.at({c.step, c.state_key}));
        if (err <= 5.0 * c.stderr_ || err <= 1e-12) ++within;
      }
      const double share = checked ? static_cast<double>(within) / static_cast<double>(checked) : 1.0;
      run.results["within_5se"] = share;
      std::cout << "estimates within 5 standard errors of exact: " << within << "/" << checked << "\n";
    }
    std::cout << "cells " << cells.size() << ", absent " << absent << "\n";
  }

  // partition diagnostics of the compensated counting process on the empirical space
  const imr::ExactEngine engine(sample);
  const auto measures = imr::compute_path_measures(engine);
  std::vector<imr::MeasureAtoms> mu, nu, rho;
  for (const auto& m : measures) {
    mu.push_back(m.mu);
    nu.push_back(m.nu);
    rho.push_back(m.rho);
  }
  const auto n_mu = imr::measure_process(sample, mu);
  const auto n_nu = imr::measure_process(sample, nu);
  const auto n_rho = imr::measure_process(sample, rho);
  auto minus = [](const imr::ProcessValues& a, const imr::ProcessValues& b) {
    auto out = a;
    for (std::size_t k = 0; k < a.size(); ++k)
      for (std::size_t i = 0; i < a[k].size(); ++i) out[k][i] -= b[k][i];
    return out;
  };
  const auto fwd = imr::partition_sum_diagnostic(engine, minus(n_mu, n_nu), imr::PartitionSide::forward, run.opt.levels);
  const auto bwd = imr::partition_sum_diagnostic(engine, minus(n_mu, n_rho), imr::PartitionSide::backward, run.opt.levels);
  {
    auto f = open_out(run.opt, "diagnostics.csv");
    imr::write_diagnostics_csv(f, fwd);
    auto g = open_out(run.opt, "diagnostics_backward.csv");
    imr::write_diagnostics_csv(g, bwd);
  }
  if (fwd.capped) std::cout << "note: " << fwd.notice << "\n";
  auto finest = [](const imr::RefinementDiagnostic& d) {
    double m = 0.0;
    for (double s : d.levels.back().sums) m = std::max(m, std::abs(s));
    return m;
  };
  run.results["levels"] = fwd.levels.size();
  run.check("forward finest-level sums of mu - nu", finest(fwd) <= run.opt.tol, "max " + num(finest(fwd)));
  run.check("backward finest-level sums of mu - rho", finest(bwd) <= run.opt.tol, "max " + num(finest(bwd)));
}

void cmd_app(Run& run, const io::ModelDocument& doc) {
  const auto space = imr::PathSpace::enumerate(*doc.model, run.opt.max_paths);
  const imr::ExactEngine engine(space);
  const auto& model = space.model();
  const std::string& app = run.opt.app;
  if (app == "thiele") {
    const auto report = imr::thiele_reserve(engine, io::contract_from(doc));
    auto f = open_out(run.opt, "thiele_reserve.csv");
    f << "path_id,t,reserve,d_benefit,interest,if_integral,ib_integral,residual\n";
    for (const auto& r : report.rows)
      f << r.path_id << "," << r.t << "," << r.reserve << "," << r.d_benefit << "," << r.interest << ","
        << r.if_integral << "," << r.ib_integral << "," << r.residual << "\n";
    auto g = open_out(run.opt, "thiele_sum_at_risk.csv");
    g << "path_id,time,index_set,marks,forward,backward\n";
    for (const auto& s : report.sum_at_risk)
      g << s.path_id << "," << model.time(s.key.step) << ",\"" << imr::index_set_string(s.key.indices) << "\",\""
        << imr::mark_tuple_string(model, s.key.marks) << "\"," << s.forward << "," << s.backward << "\n";
    run.results["max_abs_residual"] = report.max_abs_residual;
    run.results["max_abs_terminal"] = report.max_abs_terminal;
    run.check("thiele ledger residual", report.max_abs_residual <= run.opt.tol, "max " + num(report.max_abs_residual));
    run.check("terminal reserve is zero", report.max_abs_terminal == 0.0, "max |X_T| " + num(report.max_abs_terminal));
  } else if (app == "markov") {
    const auto report = imr::markov_gap(engine, io::markov_from(doc));
    auto f = open_out(run.opt, "markov_gap.csv");
    f << "path_id,t,state,jumps,full,state_only,projection,gap,if_integral,ib_integral,ib_abs_running\n";
    for (const auto& r : report.rows)
      f << r.path_id << "," << r.t << "," << (r.state == imr::kNullMark ? std::string("-") : model.mark_name(r.state))
        << "," << r.jumps << "," << r.full << "," << r.state_only << "," << r.projection << "," << r.gap << ","
        << r.if_integral << "," << r.ib_integral << "," << r.ib_abs_running << "\n";
    run.results["max_gap"] = report.max_gap;
    run.results["max_abs_residual"] = report.max_abs_residual;
    std::cout << "max gap between full and state-only prediction: " << num(report.max_gap) << "\n";
    run.check("state-only prediction equals projection", report.max_state_mismatch <= 1e-12,
              "max " + num(report.max_state_mismatch));
    run.check("projection residual", report.max_abs_residual <= run.opt.tol, "max " + num(report.max_abs_residual));
  } else if (app == "location") {
    const auto spec = io::location_from(doc);
    const auto report = imr::location_predictor(engine, spec);
    auto f = open_out(run.opt, "location_predictor.csv");
    f << "path_id,t,predictor,drift,if_integral,ib_integral,residual\n";
    for (const auto& r : report.rows)
      f << r.path_id << "," << r.t << "," << r.predictor << "," << r.drift << "," << r.if_integral << ","
        << r.ib_integral << "," << r.residual << "\n";
    run.results["max_abs_ib"] = report.max_abs_ib;
    run.results["max_abs_residual"] = report.max_abs_residual;
    std::cout << "max |ib_integral| " << num(report.max_abs_ib) << "\n";
    run.check("predictor residual", report.max_abs_residual <= run.opt.tol, "max " + num(report.max_abs_residual));
    if (const auto params = io::location_params(doc)) {
      std::vector<int> deltas;
      for (int d = 1; d <= params->steps; ++d) deltas.push_back(d);
      const auto sweep = imr::location_delta_sweep(*params, spec, deltas);
      auto g = open_out(run.opt, "location_sweep.csv");
      g << "delta,max_abs_ib,mean_abs_ib,max_abs_residual\n";
      double worst = 0.0;
      for (const auto& s : sweep) {
        g << s.delta << "," << s.max_abs_ib << "," << s.mean_abs_ib << "," << s.max_abs_residual << "\n";
        worst = std::max(worst, s.max_abs_residual);
      }
      bool nested = true;
      for (std::size_t j = 0; j + 1 < deltas.size(); ++j) nested = nested && imr::location_refines(*params, deltas[j], deltas[j + 1]);
      run.check("sweep residual", worst <= run.opt.tol, "max " + num(worst));
      run.check("information grows with the retention limit", nested, nested ? "nested" : "not nested");
    }
  } else {
    throw std::runtime_error("unknown application '" + app + "' (thiele, markov or location)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"imr: representation of projections under deleted information"};
  cli.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", opt.model, "model document (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory")->required();
    sub->add_option("--seed", opt.seed, "random seed");
    sub->add_option("--n-paths", opt.n_paths, "number of simulated paths");
    sub->add_option("--tol", opt.tol, "residual tolerance");
    sub->add_option("--target", opt.target, "xi:<name>, process:<name> or sojourn:<name>");
    sub->add_option("--levels", opt.levels, "number of partition levels")->check(CLI::PositiveNumber);
    sub->add_option("--drift", opt.drift, "drift side for processes")->check(CLI::IsMember({"ib", "if"}));
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--max-paths", opt.max_paths, "enumeration limit");
  };
  auto* en = cli.add_subcommand("enumerate", "enumerate paths and information states");
  auto* ve = cli.add_subcommand("verify", "verify the two-sided representation");
  auto* si = cli.add_subcommand("simulate", "Monte Carlo estimates and partition diagnostics");
  auto* ap = cli.add_subcommand("app", "run an application");
  for (auto* s : {en, ve, si, ap}) add_common(s);
  ap->add_option("--app", opt.app, "application")->required()->check(CLI::IsMember({"thiele", "markov", "location"}));
  CLI11_PARSE(cli, argc, argv);

  Run run;
  run.command = cli.get_subcommands().front()->get_name();
  if (run.command == "app" && !ap->count("--tol")) opt.tol = 1e-9;
  run.opt = opt;
  try {
    fs::create_directories(opt.out);
    const auto doc = io::load_model_document(opt.model);
    if (run.command == "enumerate") cmd_enumerate(run, doc);
    if (run.command == "verify") cmd_verify(run, doc);
    if (run.command == "simulate") cmd_simulate(run, doc);
    if (run.command == "app") cmd_app(run, doc);
    write_manifest(run);
  } catch (const std::exception& e) {
    std::cerr << "imr " << run.command << ": " << e.what() << "\n";
    return 2;
  }
  std::cout << (run.ok ? "status: pass" : "status: fail") << "\n";
  return run.ok ? 0 : 1;
}
