#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "imr/applications.hpp"
#include "imr/engine.hpp"
#include "imr/measures.hpp"

namespace imr::io {

/// Evaluation environment of a payoff expression.
struct EvalContext {
  const ScenarioModel* model = nullptr;
  const PathRecord* path = nullptr;
  int step = 0;
  const std::vector<int>* active = nullptr;  // odd indices M for sojourn rates
  std::map<std::string, double> vars;
};

/// Compiled payoff expression.
///
/// Vocabulary: numbers, 'mark' literals, T<n> (time of T_n, inf if never), Z<n> (mark of Z_n,
/// compared with literals), A<n> (piece n active), t, k, named variables, + - * /, comparisons,
/// && || !, and the functions ind, min, max, abs, exp, log, if.
class Expression {
 public:
  Expression() = default;
  double evaluate(const EvalContext& ctx) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  friend Expression parse_expression(std::string_view, const std::vector<std::string>&,
                                     const std::vector<std::string>&);
  std::shared_ptr<const Node> root_;
  std::string text_;
};

/// Parses an expression; mark literals are resolved against `marks`, free names against `vars`.
Expression parse_expression(std::string_view text, const std::vector<std::string>& marks,
                            const std::vector<std::string>& vars = {});

struct SojournSpec {
  Expression h;
  TimeMeasure gamma;
};

/// A parsed model document.
struct ModelDocument {
  std::string source;
  nlohmann::json meta;
  std::shared_ptr<const ScenarioModel> model;
  std::map<std::string, Expression> xi;
  std::map<std::string, Expression> process;
  std::map<std::string, SojournSpec> sojourn;
  nlohmann::json applications;
  nlohmann::json generator;  // null unless the model comes from a built-in generator

  PathFunctional xi_functional(const std::string& name) const;
  ProcessFunctional process_functional(const std::string& name) const;
  SojournRate sojourn_rate(const std::string& name) const;
};

ModelDocument parse_model_document(const std::string& text, const std::string& source = "<string>");
ModelDocument load_model_document(const std::string& path);

/// Application blocks of the document.
InsuranceContract contract_from(const ModelDocument& doc);
MarkovApproxSpec markov_from(const ModelDocument& doc);
LocationSpec location_from(const ModelDocument& doc);
/// Location generator parameters, when the model was generated by the location generator.
std::optional<LocationModelParams> location_params(const ModelDocument& doc);

/// Parses one elementary event: "+<piece>=<mark>" or "-<piece>".
ElementaryEvent parse_event(std::string_view text, const std::vector<std::string>& marks);

}  // namespace imr::io
