#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace imr {

/// Step index used for a random time that never occurs (+infinity).
inline constexpr int kNever = std::numeric_limits<int>::max();

/// Mark value of a piece that was never innovated. Never a member of the mark space.
inline constexpr int kNullMark = -1;

enum class Side { left, right };

/// Raised for any violation of a model invariant or malformed model input.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ElementaryEvent {
  enum class Kind : std::uint8_t { innovation, deletion };

  Kind kind = Kind::innovation;
  int piece = 0;  // 1-based
  int mark = kNullMark;  // only meaningful for innovations

  static ElementaryEvent innovate(int piece, int mark) { return {Kind::innovation, piece, mark}; }
  static ElementaryEvent remove(int piece) { return {Kind::deletion, piece, kNullMark}; }

  /// Index into the reindexed sequence: 2i-1 for innovations, 2i for deletions.
  int time_index() const { return kind == Kind::innovation ? 2 * piece - 1 : 2 * piece; }

  auto operator<=>(const ElementaryEvent&) const = default;
};

/// A (possibly empty) set of simultaneous elementary events, kept sorted.
using CompositeEvent = std::vector<ElementaryEvent>;

void canonicalize(CompositeEvent& event);

struct Branch {
  CompositeEvent event;
  double probability = 0.0;
};

/// Event history of a tree node: the composite events realized at steps 1..step().
class History {
 public:
  History() = default;
  explicit History(int max_pieces);

  int step() const { return static_cast<int>(events_.size()); }
  int max_pieces() const { return static_cast<int>(innovated_at_.size()); }
  const CompositeEvent& at(int step) const { return events_.at(static_cast<std::size_t>(step - 1)); }
  const std::vector<CompositeEvent>& events() const { return events_; }

  bool innovated(int piece) const { return innovated_at_[idx(piece)] != kNever; }
  bool active(int piece) const { return innovated(piece) && deleted_at_[idx(piece)] == kNever; }
  int mark(int piece) const { return marks_[idx(piece)]; }
  int innovation_step(int piece) const { return innovated_at_[idx(piece)]; }
  int deletion_step(int piece) const { return deleted_at_[idx(piece)]; }

  /// Appends the composite event of the next step. Does not validate.
  void push(const CompositeEvent& event);
  void pop();

 private:
  static std::size_t idx(int piece) { return static_cast<std::size_t>(piece - 1); }

  std::vector<CompositeEvent> events_;
  std::vector<int> innovated_at_;
  std::vector<int> deleted_at_;
  std::vector<int> marks_;
};

using TransitionLaw = std::function<std::vector<Branch>(const History&)>;

/// Finite discrete-time scenario tree generating an extended marked point process.
///
/// Events happen only at grid steps 1..N; the root node sits at t_0. Pieces are
/// numbered 1..max_pieces and marks are indices into mark_names().
class ScenarioModel {
 public:
  ScenarioModel(std::vector<double> grid, std::vector<std::string> mark_names, int max_pieces,
                TransitionLaw law);

  const std::vector<double>& grid() const { return grid_; }
  double time(int step) const;
  int steps() const { return static_cast<int>(grid_.size()) - 1; }
  double horizon() const { return grid_.back(); }
  int max_pieces() const { return max_pieces_; }
  int mark_count() const { return static_cast<int>(mark_names_.size()); }
  const std::vector<std::string>& mark_names() const { return mark_names_; }
  const std::string& mark_name(int mark) const;
  int mark_index(std::string_view name) const;

  /// Grid step of a time point; throws ModelError when t is not on the grid.
  int step_of(double t) const;

  /// Validated, canonicalized successor distribution of a node (zero-probability branches dropped).
  std::vector<Branch> branches(const History& node) const;

  /// Canonical history key: sorted (step, event) entries, e.g. "1:+1=a,2:-1".
  std::string history_key(const History& node) const;
  std::string event_string(const CompositeEvent& event) const;

 private:
  std::vector<double> grid_;
  std::vector<std::string> mark_names_;
  int max_pieces_;
  TransitionLaw law_;
};

/// Index set I of the reindexed times, kept sorted ascending.
using IndexSet = std::vector<int>;
/// Mark tuple aligned with an IndexSet.
using MarkTuple = std::vector<int>;

struct JointEvent {
  IndexSet indices;
  MarkTuple marks;

  bool empty() const { return indices.empty(); }
  auto operator<=>(const JointEvent&) const = default;
};

/// Joint event of a composite event; `marks` gives the mark of every piece (deletions carry Z_{2i}).
JointEvent joint_event_of(const CompositeEvent& event, const std::vector<int>& marks);

/// One realized path of the scenario tree.
struct PathRecord {
  std::vector<CompositeEvent> events;  // events[k] realized at step k; events[0] is empty
  std::vector<int> innovation_step;    // per piece, kNever if not innovated
  std::vector<int> deletion_step;      // per piece, kNever if not deleted
  std::vector<int> marks;              // per piece, kNullMark if not innovated
  double probability = 0.0;

  int steps() const { return static_cast<int>(events.size()) - 1; }
  int max_pieces() const { return static_cast<int>(marks.size()); }

  /// Step of the reindexed random time T_index (1-based), kNever if infinite.
  int time_step(int index) const;
  /// Mark Z_index of the reindexed sequence (Z_{2i-1} = Z_{2i}).
  int mark_of(int index) const { return marks[static_cast<std::size_t>((index + 1) / 2 - 1)]; }
  bool active(int piece, int step, Side side) const;
  JointEvent joint_event(int step) const { return joint_event_of(events[static_cast<std::size_t>(step)], marks); }

  /// Canonical textual key that identifies the path within its tree.
  std::string key() const;

  auto operator<=>(const PathRecord& other) const { return events <=> other.events; }
  bool operator==(const PathRecord& other) const { return events == other.events; }
};

PathRecord make_path(const History& full_history, int max_pieces, double probability);

/// Observable information: active odd indices with their marks (the value of Gamma_t).
/// The index of a piece can itself be informative (which slot was filled), and the state exposes it.
struct InformationState {
  std::vector<int> active_set;    // odd indices 2i-1, ascending
  std::vector<int> active_marks;  // aligned with active_set

  bool empty() const { return active_set.empty(); }
  std::string key(const ScenarioModel& model) const;
  auto operator<=>(const InformationState&) const = default;
};

InformationState information_state(const PathRecord& path, int step, Side side);
/// Time-based variant; rejects times off the grid and side=left at t=0.
InformationState information_state(const ScenarioModel& model, const PathRecord& path, double t,
                                   Side side);

/// All positive-probability paths of the tree. Validates every node on the way.
std::vector<PathRecord> enumerate_paths(const ScenarioModel& model,
                                        std::size_t max_paths = 5'000'000);

/// Step of Q_I: the first step at which exactly the times indexed by I coincide.
int joint_event_step(const PathRecord& path, const IndexSet& indices);

std::string index_set_string(const IndexSet& indices);
std::string mark_tuple_string(const ScenarioModel& model, const MarkTuple& marks);

}  // namespace imr
