#include "imr/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace imr {

namespace {

constexpr double kProbabilityTolerance = 1e-12;

std::string piece_list(const std::vector<int>& pieces) {
  std::ostringstream out;
  for (std::size_t i = 0; i < pieces.size(); ++i) out << (i ? "," : "") << pieces[i];
  return out.str();
}

}  // namespace

void canonicalize(CompositeEvent& event) { std::sort(event.begin(), event.end()); }

// ---------------------------------------------------------------------------
// History

History::History(int max_pieces)
    : innovated_at_(static_cast<std::size_t>(max_pieces), kNever),
      deleted_at_(static_cast<std::size_t>(max_pieces), kNever),
      marks_(static_cast<std::size_t>(max_pieces), kNullMark) {}

void History::push(const CompositeEvent& event) {
  events_.push_back(event);
  const int k = step();
  for (const auto& e : event) {
    if (e.kind == ElementaryEvent::Kind::innovation) {
      innovated_at_[idx(e.piece)] = k;
      marks_[idx(e.piece)] = e.mark;
    } else {
      deleted_at_[idx(e.piece)] = k;
    }
  }
}

void History::pop() {
  const int k = step();
  for (const auto& e : events_.back()) {
    if (e.kind == ElementaryEvent::Kind::innovation) {
      if (innovated_at_[idx(e.piece)] == k) {
        innovated_at_[idx(e.piece)] = kNever;
        marks_[idx(e.piece)] = kNullMark;
      }
    } else if (deleted_at_[idx(e.piece)] == k) {
      deleted_at_[idx(e.piece)] = kNever;
    }
  }
  events_.pop_back();
}

// ---------------------------------------------------------------------------
// ScenarioModel

ScenarioModel::ScenarioModel(std::vector<double> grid, std::vector<std::string> mark_names,
                             int max_pieces, TransitionLaw law)
    : grid_(std::move(grid)),
      mark_names_(std::move(mark_names)),
      max_pieces_(max_pieces),
      law_(std::move(law)) {
  if (grid_.size() < 2) throw ModelError("grid: at least two time points required");
  if (grid_.front() != 0.0) throw ModelError("grid: first time point must be 0");
  for (std::size_t k = 1; k < grid_.size(); ++k) {
    if (!std::isfinite(grid_[k]) || !(grid_[k] > grid_[k - 1]))
      throw ModelError("grid: time points must be finite and strictly increasing (at step " +
                       std::to_string(k) + ")");
  }
  if (max_pieces_ < 0 || max_pieces_ > 64) throw ModelError("max_pieces must lie in [0, 64]");
  if (mark_names_.empty()) throw ModelError("mark space must not be empty");
  for (std::size_t i = 0; i < mark_names_.size(); ++i) {
    const auto& name = mark_names_[i];
    if (name.empty() || name == "0" || name == "null")
      throw ModelError("mark space: '" + name + "' is the reserved null symbol");
    for (std::size_t j = 0; j < i; ++j)
      if (mark_names_[j] == name) throw ModelError("mark space: duplicate mark '" + name + "'");
  }
  if (!law_) throw ModelError("transition law is empty");
}

double ScenarioModel::time(int step) const {
  if (step == kNever) return std::numeric_limits<double>::infinity();
  return grid_.at(static_cast<std::size_t>(step));
}

const std::string& ScenarioModel::mark_name(int mark) const {
  static const std::string null_name = "null";
  if (mark == kNullMark) return null_name;
  return mark_names_.at(static_cast<std::size_t>(mark));
}

int ScenarioModel::mark_index(std::string_view name) const {
  for (std::size_t i = 0; i < mark_names_.size(); ++i)
    if (mark_names_[i] == name) return static_cast<int>(i);
  throw ModelError("unknown mark '" + std::string(name) + "'");
}

int ScenarioModel::step_of(double t) const {
  const double scale = std::max(1.0, std::abs(horizon()));
  for (std::size_t k = 0; k < grid_.size(); ++k)
    if (std::abs(grid_[k] - t) <= 1e-12 * scale) return static_cast<int>(k);
  std::ostringstream msg;
  msg << "time " << t << " is not a grid point";
  throw ModelError(msg.str());
}

std::string ScenarioModel::event_string(const CompositeEvent& event) const {
  std::string out;
  for (std::size_t i = 0; i < event.size(); ++i) {
    if (i) out += '&';
    const auto& e = event[i];
    if (e.kind == ElementaryEvent::Kind::innovation)
      out += "+" + std::to_string(e.piece) + "=" + mark_name(e.mark);
    else
      out += "-" + std::to_string(e.piece);
  }
  return out;
}

std::string ScenarioModel::history_key(const History& node) const {
  std::string out;
  for (int k = 1; k <= node.step(); ++k) {
    for (const auto& e : node.at(k)) {
      if (!out.empty()) out += ',';
      out += std::to_string(k) + ":" + event_string(CompositeEvent{e});
    }
  }
  return out;
}

std::vector<Branch> ScenarioModel::branches(const History& node) const {
  const auto where = [&] {
    return " at node (step " + std::to_string(node.step()) + ", history '" + history_key(node) +
           "')";
  };
  if (node.step() >= steps()) return {};

  std::vector<Branch> raw = law_(node);
  std::vector<Branch> out;
  double total = 0.0;
  for (auto& b : raw) {
    if (!std::isfinite(b.probability) || b.probability < 0.0)
      throw ModelError("transition law: probabilities must be finite and non-negative" + where());
    total += b.probability;
    if (b.probability == 0.0) continue;
    canonicalize(b.event);

    std::vector<int> touched;
    for (const auto& e : b.event) {
      if (e.piece < 1 || e.piece > max_pieces_)
        throw ModelError("piece universe: piece " + std::to_string(e.piece) +
                         " outside 1.." + std::to_string(max_pieces_) + where());
      touched.push_back(e.piece);
      if (e.kind == ElementaryEvent::Kind::innovation) {
        if (node.innovated(e.piece))
          throw ModelError("single innovation: piece " + std::to_string(e.piece) +
                           " innovated twice" + where());
        if (e.mark < 0 || e.mark >= mark_count())
          throw ModelError("mark space: innovation of piece " + std::to_string(e.piece) +
                           " without a valid mark" + where());
      } else {
        if (!node.active(e.piece))
          throw ModelError("deletion of inactive piece " + std::to_string(e.piece) + where());
      }
    }
    std::sort(touched.begin(), touched.end());
    if (std::adjacent_find(touched.begin(), touched.end()) != touched.end())
      throw ModelError("no instant deletion: composite event touches piece(s) twice {" +
                       piece_list(touched) + "}" + where());
    out.push_back(std::move(b));
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "transition law: probabilities sum to " << total << " instead of 1" << where();
    throw ModelError(msg.str());
  }
  std::sort(out.begin(), out.end(),
            [](const Branch& a, const Branch& b) { return a.event < b.event; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].event == out[i - 1].event)
      throw ModelError("transition law: duplicate composite event '" +
                       event_string(out[i].event) + "'" + where());
  return out;
}

// ---------------------------------------------------------------------------
// Joint events and paths

JointEvent joint_event_of(const CompositeEvent& event, const std::vector<int>& marks) {
  std::vector<std::pair<int, int>> entries;
  entries.reserve(event.size());
  for (const auto& e : event)
    entries.emplace_back(e.time_index(), e.kind == ElementaryEvent::Kind::innovation
                                             ? e.mark
                                             : marks.at(static_cast<std::size_t>(e.piece - 1)));
  std::sort(entries.begin(), entries.end());
  JointEvent out;
  for (const auto& [index, mark] : entries) {
    out.indices.push_back(index);
    out.marks.push_back(mark);
  }
  return out;
}

int PathRecord::time_step(int index) const {
  const auto piece = static_cast<std::size_t>((index + 1) / 2 - 1);
  return index % 2 == 1 ? innovation_step[piece] : deletion_step[piece];
}

bool PathRecord::active(int piece, int step, Side side) const {
  const int innov = innovation_step[static_cast<std::size_t>(piece - 1)];
  const int del = deletion_step[static_cast<std::size_t>(piece - 1)];
  if (innov == kNever) return false;
  // right: T_{2i-1} <= t < T_{2i}; left: T_{2i-1} < t <= T_{2i}
  if (side == Side::right) return innov <= step && step < del;
  return innov < step && step <= del;
}

std::string PathRecord::key() const {
  std::string out;
  for (std::size_t k = 1; k < events.size(); ++k) {
    out += '|';
    for (const auto& e : events[k]) {
      out += e.kind == ElementaryEvent::Kind::innovation ? '+' : '-';
      out += std::to_string(e.piece);
      if (e.kind == ElementaryEvent::Kind::innovation) out += "=" + std::to_string(e.mark);
      out += ';';
    }
  }
  return out;
}

PathRecord make_path(const History& full_history, int max_pieces, double probability) {
  PathRecord p;
  p.events.reserve(static_cast<std::size_t>(full_history.step()) + 1);
  p.events.emplace_back();
  for (const auto& ev : full_history.events()) p.events.push_back(ev);
  p.innovation_step.resize(static_cast<std::size_t>(max_pieces));
  p.deletion_step.resize(static_cast<std::size_t>(max_pieces));
  p.marks.resize(static_cast<std::size_t>(max_pieces));
  for (int i = 1; i <= max_pieces; ++i) {
    p.innovation_step[static_cast<std::size_t>(i - 1)] = full_history.innovation_step(i);
    p.deletion_step[static_cast<std::size_t>(i - 1)] = full_history.deletion_step(i);
    p.marks[static_cast<std::size_t>(i - 1)] = full_history.mark(i);
  }
  p.probability = probability;
  return p;
}

std::string InformationState::key(const ScenarioModel& model) const {
  std::string out = "{";
  for (std::size_t i = 0; i < active_set.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(active_set[i]) + "=" + model.mark_name(active_marks[i]);
  }
  return out + "}";
}

InformationState information_state(const PathRecord& path, int step, Side side) {
  if (step < 0 || step > path.steps()) throw ModelError("information state: step out of range");
  if (side == Side::left && step == 0)
    throw ModelError("information state: left limit undefined at t = 0");
  InformationState s;
  for (int i = 1; i <= path.max_pieces(); ++i) {
    if (path.active(i, step, side)) {
      s.active_set.push_back(2 * i - 1);
      s.active_marks.push_back(path.marks[static_cast<std::size_t>(i - 1)]);
    }
  }
  return s;
}

InformationState information_state(const ScenarioModel& model, const PathRecord& path, double t,
                                   Side side) {
  return information_state(path, model.step_of(t), side);
}

std::vector<PathRecord> enumerate_paths(const ScenarioModel& model, std::size_t max_paths) {
  std::vector<PathRecord> out;
  History node(model.max_pieces());
  const int n = model.steps();

  // Depth-first walk; the probability product is carried along.
  std::function<void(double)> visit = [&](double prob) {
    if (node.step() == n) {
      if (out.size() >= max_paths)
        throw ModelError("enumeration: more than " + std::to_string(max_paths) + " paths");
      out.push_back(make_path(node, model.max_pieces(), prob));
      return;
    }
    for (const auto& b : model.branches(node)) {
      node.push(b.event);
      visit(prob * b.probability);
      node.pop();
    }
  };
  visit(1.0);
  return out;
}

int joint_event_step(const PathRecord& path, const IndexSet& indices) {
  for (int k = 1; k <= path.steps(); ++k) {
    const auto& ev = path.events[static_cast<std::size_t>(k)];
    if (ev.size() != indices.size() || ev.empty()) continue;
    if (path.joint_event(k).indices == indices) return k;
  }
  return kNever;
}

std::string index_set_string(const IndexSet& indices) {
  std::string out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(indices[i]);
  }
  return out;
}

std::string mark_tuple_string(const ScenarioModel& model, const MarkTuple& marks) {
  std::string out;
  for (std::size_t i = 0; i < marks.size(); ++i) {
    if (i) out += ';';
    out += model.mark_name(marks[i]);
  }
  return out;
}

}  // namespace imr
