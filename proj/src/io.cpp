#include "imr/io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace imr::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Expressions

struct Expression::Node {
  enum class Kind { number, time_of, mark_of, active, step_time, step_index, var, unary, binary, call };
  Kind kind = Kind::number;
  double value = 0.0;
  int index = 0;
  std::string name;  // operator, function or variable
  std::vector<std::shared_ptr<const Node>> kids;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& marks, const std::vector<std::string>& vars)
      : s_(text), marks_(marks), vars_(vars) {}

  NodePtr parse() {
    auto n = parse_or();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ModelError("expression '" + std::string(s_) + "': " + msg + " at column " + std::to_string(pos_ + 1));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(std::string_view tok) {
    skip();
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  static NodePtr binary(std::string op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::binary;
    n->name = std::move(op);
    n->kids = {std::move(a), std::move(b)};
    return n;
  }

  NodePtr parse_or() {
    auto a = parse_and();
    while (eat("||")) a = binary("||", a, parse_and());
    return a;
  }
  NodePtr parse_and() {
    auto a = parse_cmp();
    while (eat("&&")) a = binary("&&", a, parse_cmp());
    return a;
  }
  NodePtr parse_cmp() {
    auto a = parse_add();
    for (std::string_view op : {"<=", ">=", "==", "!=", "<", ">"})
      if (eat(op)) return binary(std::string(op), a, parse_add());
    return a;
  }
  NodePtr parse_add() {
    auto a = parse_mul();
    for (;;) {
      if (eat("+")) a = binary("+", a, parse_mul());
      else if (eat("-")) a = binary("-", a, parse_mul());
      else return a;
    }
  }
  NodePtr parse_mul() {
    auto a = parse_unary();
    for (;;) {
      if (eat("*")) a = binary("*", a, parse_unary());
      else if (eat("/")) a = binary("/", a, parse_unary());
      else return a;
    }
  }
  NodePtr parse_unary() {
    skip();
    if (pos_ < s_.size() && (s_[pos_] == '-' || (s_[pos_] == '!' && s_.substr(pos_, 2) != "!="))) {
      const char op = s_[pos_++];
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::unary;
      n->name = std::string(1, op);
      n->kids = {parse_unary()};
      return n;
    }
    return parse_primary();
  }
  NodePtr parse_primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    auto n = std::make_shared<Node>();
    if (c == '(') {
      ++pos_;
      auto inner = parse_or();
      if (!eat(")")) fail("expected ')'");
      return inner;
    }
    if (c == '\'') {
      const auto end = s_.find('\'', pos_ + 1);
      if (end == std::string_view::npos) fail("unterminated mark literal");
      const std::string mark(s_.substr(pos_ + 1, end - pos_ - 1));
      const auto it = std::find(marks_.begin(), marks_.end(), mark);
      if (it == marks_.end()) fail("unknown mark '" + mark + "'");
      n->value = static_cast<double>(it - marks_.begin());
      pos_ = end + 1;
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      const std::string rest(s_.substr(pos_));
      try {
        n->value = std::stod(rest, &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const auto start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string id(s_.substr(start, pos_ - start));
      if (eat("(")) {
        n->kind = Node::Kind::call;
        n->name = id;
        if (!eat(")")) {
          do n->kids.push_back(parse_or());
          while (eat(","));
          if (!eat(")")) fail("expected ')'");
        }
        static const std::map<std::string, std::pair<std::size_t, std::size_t>> arity{
            {"ind", {1, 1}}, {"abs", {1, 1}}, {"exp", {1, 1}}, {"log", {1, 1}},
            {"min", {1, 64}}, {"max", {1, 64}}, {"if", {3, 3}}};
        const auto a = arity.find(id);
        if (a == arity.end()) fail("unknown function '" + id + "'");
        if (n->kids.size() < a->second.first || n->kids.size() > a->second.second)
          fail("wrong number of arguments to '" + id + "'");
        return n;
      }
      if (id == "inf") {
        n->value = std::numeric_limits<double>::infinity();
        return n;
      }
      if (id == "t") {
        n->kind = Node::Kind::step_time;
        return n;
      }
      if (id == "k") {
        n->kind = Node::Kind::step_index;
        return n;
      }
      if (std::find(vars_.begin(), vars_.end(), id) != vars_.end()) {
        n->kind = Node::Kind::var;
        n->name = id;
        return n;
      }
      if (id.size() >= 2 && (id[0] == 'T' || id[0] == 'Z' || id[0] == 'A') &&
          std::all_of(id.begin() + 1, id.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
        n->index = std::stoi(id.substr(1));
        if (n->index < 1) fail("index must be positive in '" + id + "'");
        n->kind = id[0] == 'T' ? Node::Kind::time_of : id[0] == 'Z' ? Node::Kind::mark_of : Node::Kind::active;
        return n;
      }
      fail("unknown name '" + id + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  const std::vector<std::string>& marks_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, const EvalContext& ctx) {
  auto need_path = [&]() -> const PathRecord& {
    if (!ctx.path) throw ModelError("expression uses path primitives where no path is available");
    return *ctx.path;
  };
  auto piece_of = [&](int index) {
    const int piece = (index + 1) / 2;
    if (piece > need_path().max_pieces()) throw ModelError("expression refers to a piece outside the model");
    return piece;
  };
  switch (n.kind) {
    case Node::Kind::number: return n.value;
    case Node::Kind::time_of: {
      piece_of(n.index);
      const int step = need_path().time_step(n.index);
      if (step == kNever) return std::numeric_limits<double>::infinity();
      if (!ctx.model) throw ModelError("expression needs the model grid");
      return ctx.model->time(step);
    }
    case Node::Kind::mark_of: {
      piece_of(n.index);
      return static_cast<double>(need_path().mark_of(n.index));
    }
    case Node::Kind::active: {
      const int odd = 2 * n.index - 1;
      if (ctx.active) return std::find(ctx.active->begin(), ctx.active->end(), odd) != ctx.active->end() ? 1.0 : 0.0;
      piece_of(odd);
      return need_path().active(n.index, ctx.step, Side::right) ? 1.0 : 0.0;
    }
    case Node::Kind::step_time:
      if (auto it = ctx.vars.find("t"); it != ctx.vars.end()) return it->second;
      if (!ctx.model) throw ModelError("expression needs the model grid");
      return ctx.model->time(ctx.step);
    case Node::Kind::step_index: return ctx.step;
    case Node::Kind::var: {
      auto it = ctx.vars.find(n.name);
      if (it == ctx.vars.end()) throw ModelError("expression variable '" + n.name + "' is not bound here");
      return it->second;
    }
    case Node::Kind::unary: {
      const double v = eval(*n.kids[0], ctx);
      return n.name == "-" ? -v : (v == 0.0 ? 1.0 : 0.0);
    }
    case Node::Kind::binary: {
      const auto& op = n.name;
      if (op == "&&") return eval(*n.kids[0], ctx) != 0.0 && eval(*n.kids[1], ctx) != 0.0 ? 1.0 : 0.0;
      if (op == "||") return eval(*n.kids[0], ctx) != 0.0 || eval(*n.kids[1], ctx) != 0.0 ? 1.0 : 0.0;
      const double a = eval(*n.kids[0], ctx), b = eval(*n.kids[1], ctx);
      if (op == "+") return a + b;
      if (op == "-") return a - b;
      if (op == "*") return a * b;
      if (op == "/") return a / b;
      if (op == "<") return a < b;
      if (op == "<=") return a <= b;
      if (op == ">") return a > b;
      if (op == ">=") return a >= b;
      if (op == "==") return a == b;
      return a != b;
    }
    case Node::Kind::call: {
      const auto& f = n.name;
      if (f == "if") return eval(*n.kids[0], ctx) != 0.0 ? eval(*n.kids[1], ctx) : eval(*n.kids[2], ctx);
      std::vector<double> args;
      for (const auto& k : n.kids) args.push_back(eval(*k, ctx));
      if (f == "ind") return args[0] != 0.0 ? 1.0 : 0.0;
      if (f == "abs") return std::abs(args[0]);
      if (f == "exp") return std::exp(args[0]);
      if (f == "log") return std::log(args[0]);
      if (f == "min") return *std::min_element(args.begin(), args.end());
      return *std::max_element(args.begin(), args.end());
    }
  }
  return 0.0;
}

}  // namespace

double Expression::evaluate(const EvalContext& ctx) const {
  if (!root_) throw ModelError("empty expression");
  return eval(*root_, ctx);
}

Expression parse_expression(std::string_view text, const std::vector<std::string>& marks,
                            const std::vector<std::string>& vars) {
  Expression e;
  e.root_ = Parser(text, marks, vars).parse();
  e.text_ = std::string(text);
  return e;
}

// ---------------------------------------------------------------------------
// Model documents

ElementaryEvent parse_event(std::string_view text, const std::vector<std::string>& marks) {
  auto bad = [&](const std::string& why) {
    return ModelError("event '" + std::string(text) + "': " + why);
  };
  if (text.size() < 2 || (text[0] != '+' && text[0] != '-')) throw bad("expected +<piece>=<mark> or -<piece>");
  const auto eq = text.find('=');
  const std::string piece_text(text.substr(1, eq == std::string_view::npos ? std::string_view::npos : eq - 1));
  if (piece_text.empty() || !std::all_of(piece_text.begin(), piece_text.end(),
                                         [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw bad("piece must be a positive integer");
  if (piece_text.size() > 9) throw bad("piece index too large");
  const int piece = std::stoi(piece_text);
  if (piece < 1) throw bad("piece must be a positive integer");
  if (text[0] == '-') {
    if (eq != std::string_view::npos) throw bad("deletions carry no mark");
    return ElementaryEvent::remove(piece);
  }
  if (eq == std::string_view::npos) throw bad("innovation needs a mark");
  const std::string mark(text.substr(eq + 1));
  const auto it = std::find(marks.begin(), marks.end(), mark);
  if (it == marks.end()) throw bad("unknown mark '" + mark + "'");
  return ElementaryEvent::innovate(piece, static_cast<int>(it - marks.begin()));
}

namespace {

[[noreturn]] void fail_at(const std::string& where, const std::string& msg) {
  throw ModelError(where + ": " + msg);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

/// Canonical history key of a textual key such as "1:+1=a,2:-1" (order-insensitive).
std::string canonical_history(const std::string& text, int node_step, const ScenarioModel& namer,
                              const std::string& where) {
  std::vector<CompositeEvent> events(static_cast<std::size_t>(node_step));
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }), item.end());
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) fail_at(where, "history entry '" + item + "' lacks '<step>:'");
    int k = 0;
    try {
      k = std::stoi(item.substr(0, colon));
    } catch (const std::exception&) {
      fail_at(where, "history entry '" + item + "' has a bad step");
    }
    if (k < 1 || k > node_step) fail_at(where, "history entry '" + item + "' is outside steps 1.." + std::to_string(node_step));
    events[static_cast<std::size_t>(k - 1)].push_back(parse_event(item.substr(colon + 1), namer.mark_names()));
  }
  History h(namer.max_pieces());
  for (auto& e : events) {
    canonicalize(e);
    h.push(e);
  }
  return namer.history_key(h);
}

std::shared_ptr<const ScenarioModel> table_model(const json& doc) {
  if (!doc.contains("grid")) fail_at("/grid", "missing");
  if (!doc.contains("marks")) fail_at("/marks", "missing");
  if (!doc.contains("pieces")) fail_at("/pieces", "missing");
  const auto grid = doc.at("grid").get<std::vector<double>>();
  const auto marks = doc.at("marks").get<std::vector<std::string>>();
  const auto& pj = doc.at("pieces");
  const int pieces = pj.is_object() ? pj.at("max_pieces").get<int>() : pj.get<int>();
  if (doc.contains("horizon") && std::abs(doc.at("horizon").get<double>() - grid.back()) > 1e-12)
    fail_at("/horizon", "must equal the last grid point");

  const ScenarioModel namer(grid, marks, pieces, [](const History&) { return std::vector<Branch>{}; });
  using Table = std::map<std::pair<int, std::string>, std::vector<Branch>>;
  auto table = std::make_shared<Table>();
  if (!doc.contains("transitions") || !doc.at("transitions").is_array()) fail_at("/transitions", "missing or not a list");
  const auto& tr = doc.at("transitions");
  for (std::size_t e = 0; e < tr.size(); ++e) {
    const std::string where = "/transitions/" + std::to_string(e);
    const auto& entry = tr[e];
    if (!entry.contains("step")) fail_at(where, "missing 'step'");
    const int step = entry.at("step").get<int>();
    if (step < 1 || step > namer.steps()) fail_at(where + "/step", "must lie in 1.." + std::to_string(namer.steps()));
    const std::string hist = get_or<std::string>(entry, "history", "");
    const std::string key = hist == "*" ? "*" : canonical_history(hist, step - 1, namer, where + "/history");
    std::vector<Branch> branches;
    if (!entry.contains("branches") || !entry.at("branches").is_array()) fail_at(where, "missing 'branches'");
    for (std::size_t b = 0; b < entry.at("branches").size(); ++b) {
      const auto& bj = entry.at("branches")[b];
      const std::string bw = where + "/branches/" + std::to_string(b);
      Branch br;
      try {
        for (const auto& ev : bj.at("events")) br.event.push_back(parse_event(ev.get<std::string>(), marks));
      } catch (const ModelError& err) {
        fail_at(bw, err.what());
      }
      br.probability = bj.at("p").get<double>();
      branches.push_back(std::move(br));
    }
    if (!table->emplace(std::make_pair(step, key), std::move(branches)).second)
      fail_at(where, "duplicate entry for step " + std::to_string(step) + " and history '" + key + "'");
  }

  auto namer_ptr = std::make_shared<const ScenarioModel>(namer);
  auto law = [table, namer_ptr](const History& h) {
    const int step = h.step() + 1;
    auto it = table->find({step, namer_ptr->history_key(h)});
    if (it == table->end()) it = table->find({step, "*"});
    if (it == table->end())
      throw ModelError("transition table: no entry for step " + std::to_string(step) + " after history '" +
                       namer_ptr->history_key(h) + "'");
    return it->second;
  };
  return std::make_shared<const ScenarioModel>(grid, marks, pieces, law);
}

std::shared_ptr<const ScenarioModel> generated_model(const json& g) {
  const auto kind = g.at("kind").get<std::string>();
  if (kind == "thiele") {
    ThieleModelParams p;
    p.steps = get_or(g, "steps", p.steps);
    p.dt = get_or(g, "dt", p.dt);
    p.q_base = get_or(g, "q_base", p.q_base);
    p.q_mild = get_or(g, "q_mild", p.q_mild);
    p.q_severe = get_or(g, "q_severe", p.q_severe);
    p.p_record = get_or(g, "p_record", p.p_record);
    p.p_severe = get_or(g, "p_severe", p.p_severe);
    p.p_delete = get_or(g, "p_delete", p.p_delete);
    p.health_records = get_or(g, "health_records", p.health_records);
    return std::make_shared<const ScenarioModel>(build_thiele_model(p));
  }
  if (kind == "jump") {
    JumpModelParams p;
    p.states = get_or(g, "states", p.states);
    p.initial = get_or(g, "initial", std::vector<double>(p.states.size(), 1.0 / static_cast<double>(p.states.size())));
    p.steps = get_or(g, "steps", p.steps);
    p.dt = get_or(g, "dt", p.dt);
    p.max_jumps = get_or(g, "max_jumps", p.max_jumps);
    const auto law = get_or<std::string>(g, "law", "markov");
    if (law == "markov")
      return std::make_shared<const ScenarioModel>(
          build_jump_model(p, markov_jump_law(g.at("transition").get<std::vector<std::vector<double>>>())));
    if (law == "duration")
      return std::make_shared<const ScenarioModel>(build_jump_model(
          p, duration_jump_law(g.at("jump_by_duration").get<std::vector<double>>(), static_cast<int>(p.states.size()))));
    fail_at("/generator/law", "unknown jump law '" + law + "'");
  }
  if (kind == "location") {
    LocationModelParams p;
    p.locations = get_or(g, "locations", p.locations);
    p.steps = get_or(g, "steps", p.steps);
    p.dt = get_or(g, "dt", p.dt);
    p.p_stay_after_stay = get_or(g, "p_stay_after_stay", p.p_stay_after_stay);
    p.p_stay_after_move = get_or(g, "p_stay_after_move", p.p_stay_after_move);
    p.delta_steps = get_or(g, "delta_steps", p.delta_steps);
    return std::make_shared<const ScenarioModel>(build_location_model(p));
  }
  fail_at("/generator/kind", "unknown generator '" + kind + "'");
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ModelDocument parse_model_document(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ModelError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error: " + e.what());
  }
  if (!doc.is_object()) throw ModelError(source + ": the model document must be a JSON object");

  ModelDocument out;
  out.source = source;
  try {
    out.meta = doc.value("meta", json::object());
    out.applications = doc.value("applications", json::object());
    if (doc.contains("generator")) {
      for (const char* k : {"grid", "marks", "pieces", "transitions"})
        if (doc.contains(k)) fail_at(std::string("/") + k, "not allowed together with a generator");
      out.generator = doc.at("generator");
      out.model = generated_model(out.generator);
    } else {
      out.model = table_model(doc);
    }
    const auto& marks = out.model->mark_names();
    const auto payoffs = doc.value("payoffs", json::object());
    const auto xi_block = payoffs.value("xi", json::object());
    const auto process_block = payoffs.value("process", json::object());
    const auto sojourn_block = payoffs.value("sojourn", json::object());
    for (const auto& [name, v] : xi_block.items())
      out.xi[name] = parse_expression(v.get<std::string>(), marks);
    for (const auto& [name, v] : process_block.items())
      out.process[name] = parse_expression(v.get<std::string>(), marks);
    for (const auto& [name, v] : sojourn_block.items()) {
      SojournSpec s;
      s.h = parse_expression(v.at("h").get<std::string>(), marks, {"nactive"});
      s.gamma = TimeMeasure::from_times(*out.model, v.value("lebesgue", true),
                                        v.value("dirac", std::vector<double>{}));
      out.sojourn[name] = std::move(s);
    }
  } catch (const json::exception& e) {
    throw ModelError(source + ": malformed model document: " + e.what());
  } catch (const ModelError& e) {
    throw ModelError(source + ": " + e.what());
  }
  return out;
}

ModelDocument load_model_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_document(ss.str(), path);
}

PathFunctional ModelDocument::xi_functional(const std::string& name) const {
  auto it = xi.find(name);
  if (it == xi.end()) throw ModelError("unknown xi payoff '" + name + "'");
  const auto expr = it->second;
  const auto m = model;
  return [expr, m](const PathRecord& p) {
    EvalContext ctx;
    ctx.model = m.get();
    ctx.path = &p;
    ctx.step = m->steps();
    return expr.evaluate(ctx);
  };
}

ProcessFunctional ModelDocument::process_functional(const std::string& name) const {
  auto it = process.find(name);
  if (it == process.end()) throw ModelError("unknown process payoff '" + name + "'");
  const auto expr = it->second;
  const auto m = model;
  return [expr, m](const PathRecord& p, int step) {
    EvalContext ctx;
    ctx.model = m.get();
    ctx.path = &p;
    ctx.step = step;
    return expr.evaluate(ctx);
  };
}

SojournRate ModelDocument::sojourn_rate(const std::string& name) const {
  auto it = sojourn.find(name);
  if (it == sojourn.end()) throw ModelError("unknown sojourn payoff '" + name + "'");
  const auto expr = it->second.h;
  const auto m = model;
  return [expr, m](const std::vector<int>& active, int step, const PathRecord& p) {
    EvalContext ctx;
    ctx.model = m.get();
    ctx.path = &p;
    ctx.step = step;
    ctx.active = &active;
    ctx.vars["nactive"] = static_cast<double>(active.size());
    return expr.evaluate(ctx);
  };
}

InsuranceContract contract_from(const ModelDocument& doc) {
  if (!doc.applications.contains("thiele")) throw ModelError(doc.source + ": no applications.thiele block");
  const auto& j = doc.applications.at("thiele");
  const auto& marks = doc.model->mark_names();
  auto fn = [&](const char* key) -> std::function<double(double)> {
    const auto e = parse_expression(j.value(key, std::string("0")), marks);
    return [e](double t) {
      EvalContext ctx;
      ctx.vars["t"] = t;
      return e.evaluate(ctx);
    };
  };
  InsuranceContract c;
  c.a = fn("a");
  c.b = fn("b");
  c.phi = fn("phi");
  c.horizon = j.value("horizon", doc.model->horizon());
  doc.model->step_of(c.horizon);
  return c;
}

MarkovApproxSpec markov_from(const ModelDocument& doc) {
  if (!doc.applications.contains("markov")) throw ModelError(doc.source + ": no applications.markov block");
  const auto e = parse_expression(doc.applications.at("markov").value("f", std::string("0")),
                                  doc.model->mark_names(), {"Y", "N"});
  MarkovApproxSpec s;
  s.f = [e](int y, int n) {
    EvalContext ctx;
    ctx.vars["Y"] = y;
    ctx.vars["N"] = n;
    return e.evaluate(ctx);
  };
  return s;
}

LocationSpec location_from(const ModelDocument& doc) {
  if (!doc.applications.contains("location")) throw ModelError(doc.source + ": no applications.location block");
  const auto& j = doc.applications.at("location");
  LocationSpec s;
  s.delta = j.value("delta", s.delta);
  s.lag = j.value("lag", s.lag);
  for (const auto& name : j.value("area", std::vector<std::string>{})) {
    const int m = doc.model->mark_index(name);
    s.area.push_back(m);
  }
  return s;
}

std::optional<LocationModelParams> location_params(const ModelDocument& doc) {
  if (doc.generator.is_null() || doc.generator.value("kind", std::string()) != "location") return std::nullopt;
  const auto& g = doc.generator;
  LocationModelParams p;
  p.locations = get_or(g, "locations", p.locations);
  p.steps = get_or(g, "steps", p.steps);
  p.dt = get_or(g, "dt", p.dt);
  p.p_stay_after_stay = get_or(g, "p_stay_after_stay", p.p_stay_after_stay);
  p.p_stay_after_move = get_or(g, "p_stay_after_move", p.p_stay_after_move);
  p.delta_steps = get_or(g, "delta_steps", p.delta_steps);
  return p;
}

}  // namespace imr::io
