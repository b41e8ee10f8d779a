#pragma once

#include <functional>
#include <string>
#include <vector>

#include "imr/atoms.hpp"
#include "imr/engine.hpp"
#include "imr/representation.hpp"

namespace imr {

// ---------------------------------------------------------------------------
// Thiele reserving with deletions

/// Survival benefit rate a(t), death benefit b(t), interest intensity phi(t) >= 0, horizon T.
struct InsuranceContract {
  std::function<double(double)> a = [](double) { return 0.0; };
  std::function<double(double)> b = [](double) { return 0.0; };
  std::function<double(double)> phi = [](double) { return 0.0; };
  double horizon = 0.0;
};

struct ThieleRow {
  std::size_t path_id = 0;
  int step = 0;
  double t = 0.0;
  double reserve = 0.0;   // X^G_t
  double d_benefit = 0.0; // Delta B_t
  double interest = 0.0;  // (g_k - 1) X^G_{t-}, g_k = exp(int phi over the step)
  double if_integral = 0.0;
  double ib_integral = 0.0;
  double residual = 0.0;  // Delta X^G - (-Delta B + interest + if + ib)
};

struct SumAtRisk {
  std::size_t path_id = 0;
  AtomKey key;
  double forward = 0.0;   // G_I(u-, u, e), paid on nu
  double backward = 0.0;  // G_I(u, u, e), paid on rho
};

struct ThieleReport {
  std::vector<ThieleRow> rows;
  std::vector<SumAtRisk> sum_at_risk;
  ProcessValues liability;  // X_t = discounted future benefits, [step][path]
  ProcessValues benefits;   // cumulative B_t
  double max_abs_residual = 0.0;
  double max_abs_terminal = 0.0;  // max |X^G_T|
};

/// Reserve X^G = optional projection of the prospective liability, with its stochastic Thiele ledger.
/// Piece 1 is the death time (never deleted, mark determines the death step); other pieces are free.
ThieleReport thiele_reserve(const ExactEngine& engine, const InsuranceContract& contract);

/// Prospective liability X_t and cumulative benefits B_t on the grid.
void thiele_liability(const PathSpace& space, const InsuranceContract& contract, ProcessValues& liability,
                      ProcessValues& benefits);

struct ThieleModelParams {
  int steps = 4;
  double dt = 1.0;
  double q_base = 0.05;        // death probability per step
  double q_mild = 0.05;        // added once a mild record was ever made
  double q_severe = 0.2;       // added once a severe record was ever made
  double p_record = 0.3;       // probability of a new health record when none is active
  double p_severe = 0.4;       // share of severe records
  double p_delete = 0.5;       // probability that an active record is erased
  int health_records = 1;      // pieces 2..health_records+1
};

/// Death piece 1 with time-tag marks "d<k>"; health records with marks "mild"/"severe".
ScenarioModel build_thiele_model(const ThieleModelParams& params);

// ---------------------------------------------------------------------------
// Markovian approximation

/// f(Y_T, N_T) for state mark Y and jump count N.
struct MarkovApproxSpec {
  std::function<double(int state, int jumps)> f;
};

struct MarkovRow {
  std::size_t path_id = 0;
  int step = 0;
  double t = 0.0;
  int state = kNullMark;
  int jumps = 0;
  double full = 0.0;        // E[f | F_t]
  double state_only = 0.0;  // E[f | Y_t, N_t]
  double projection = 0.0;  // E[f | G_t]
  double gap = 0.0;         // |full - projection|
  double if_integral = 0.0;
  double ib_integral = 0.0;
  double ib_abs_increment = 0.0;
  double ib_abs_running = 0.0;
};

struct MarkovReport {
  std::vector<MarkovRow> rows;
  double max_gap = 0.0;
  double max_state_mismatch = 0.0;  // max |E[f|Y,N] - E[f|G]|
  double max_abs_residual = 0.0;
};

/// Compares full-history and state-only predictions of f(Y_T, N_T) and decomposes the latter.
MarkovReport markov_gap(const ExactEngine& engine, const MarkovApproxSpec& spec);

/// Y_t (mark of the active state piece, null before the first) and N_t (jumps so far).
std::pair<int, int> markov_state(const PathRecord& path, int step);

/// Destination weights for a jump out of `state` after `duration` steps in it (sum <= 1, rest = stay).
using JumpLaw = std::function<std::vector<double>(int state, int duration, int jumps)>;

struct JumpModelParams {
  std::vector<std::string> states{"a", "b"};
  std::vector<double> initial{0.5, 0.5};
  int steps = 4;
  double dt = 1.0;
  int max_jumps = 3;
};

/// Pieces are consecutive sojourns: a jump at t_k is {+(n+1)=state, -n}; piece 1 starts at t_1.
ScenarioModel build_jump_model(const JumpModelParams& params, JumpLaw law);
/// Jump law from a row-stochastic matrix (diagonal = stay).
JumpLaw markov_jump_law(std::vector<std::vector<double>> transition);
/// Jump probability depends on the sojourn duration only; destination uniform over other states.
JumpLaw duration_jump_law(std::vector<double> jump_by_duration, int state_count);

// ---------------------------------------------------------------------------
// Location prediction with auto-delete

struct LocationSpec {
  double delta = 1.0;      // retention limit
  double lag = 1.0;        // prediction lag h
  std::vector<int> area;   // target marks A
};

struct LocationRow {
  std::size_t path_id = 0;
  int step = 0;
  double t = 0.0;
  double predictor = 0.0;  // P(Y_{t+h} in A | G_t)
  double drift = 0.0;
  double if_integral = 0.0;
  double ib_integral = 0.0;
  double residual = 0.0;
};

struct LocationReport {
  std::vector<LocationRow> rows;
  double max_abs_ib = 0.0;
  double max_abs_residual = 0.0;
  int last_step = 0;  // last step with t + h on the grid
};

/// Predictor trajectories with their IF-side decomposition (drift X^IF, IF- and IB-integrals).
LocationReport location_predictor(const ExactEngine& engine, const LocationSpec& spec);

/// Location at time step s: mark of the latest measurement innovated at or before s.
int location_at(const PathRecord& path, int step);

struct LocationModelParams {
  std::vector<std::string> locations{"a", "b"};
  int steps = 5;
  double dt = 1.0;
  double p_stay_after_stay = 0.8;
  double p_stay_after_move = 0.3;
  int delta_steps = 1;  // measurement k is erased at step k + delta_steps
};

/// One measurement per grid step (piece k at t_k) from a persistent walk; sigma_k = tau_k + delta.
ScenarioModel build_location_model(const LocationModelParams& params);

struct SweepRow {
  double delta = 0.0;
  double max_abs_ib = 0.0;
  double mean_abs_ib = 0.0;  // E|ib_integral| at the last verified step
  double max_abs_residual = 0.0;
};

std::vector<SweepRow> location_delta_sweep(const LocationModelParams& params, const LocationSpec& spec,
                                           const std::vector<int>& delta_steps);

/// True when every information cell of the delta_hi model lies inside one cell of the delta_lo model.
bool location_refines(const LocationModelParams& params, int delta_lo, int delta_hi);

}  // namespace imr
