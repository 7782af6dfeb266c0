#pragma once

// Exponential-SAV time steppers.
//
// The auxiliary variable R = exp(E/S) is carried as ln R throughout; no
// raw exponential of an energy is ever formed. One step of the BDFk
// scheme is
//
//   (alpha I + dt G L) phi_bar = phi_hat - dt G F'(phi_star)
//   mu_bar = L phi_bar + F'(phi_bar),  d = (G mu_bar, mu_bar)
//   ln R~ = ln R^n - log1p(dt d / S)
//   xi = exp(ln R~ - E(phi_bar)/S),  phi^{n+1} = U_k(xi) phi_bar
//
// followed, for the relaxed variant, by a convex combination of R~ and
// exp(E(phi^{n+1})/S) with the smallest admissible weight on R~.

#include <optional>
#include <string>
#include <vector>

#include "esav/models.hpp"
#include "esav/spectral.hpp"

namespace esav {

enum class SchemeKind { Esav, Resav, TraditionalEsav };

std::string scheme_name(SchemeKind kind);  // esav, resav, traditional_esav
SchemeKind parse_scheme_kind(const std::string& name);

struct BdfTable {
  int k = 1;
  double alpha = 1.0;
  std::vector<double> hist_weights;    // phi_hat = sum w_i phi^{n-i}
  std::vector<double> extrap_weights;  // phi_star = sum e_i phi^{n-i}
  std::vector<double> u_coeffs;        // U_k in the power basis, ascending
};

/// Throws InvalidArgument for k outside 1..4.
BdfTable bdf_table(int k);

/// U_k(xi); satisfies U_k(1 + c) = 1 - c^{k+1}.
double u_poly(int k, double xi);

struct SchemeState {
  std::vector<Field> history;  // newest first
  double ln_r = 0.0;
  long step = 0;
  double time = 0.0;
  int capacity = 1;  // history entries retained after a step
};

struct StepReport {
  long step = 0;
  double time = 0.0;
  double energy_original = 0.0;
  double ln_r_scaled = 0.0;  // S ln R^{n+1}; modified energy for the baseline
  double xi = 1.0;
  double u_of_xi = 1.0;
  std::optional<double> lambda0;  // relaxed scheme only
  double dissipation = 0.0;
  double mass = 0.0;

  // Diagnostics kept in memory only.
  double alpha = 1.0;
  double mean_phi_hat = 0.0;
  double mean_phi_bar = 0.0;
  std::optional<double> solve_residual;  // relative, when verified
};

struct StepOptions {
  bool verify_solve = false;  // recompute ||(aI + dt GL) u - rhs|| / ||rhs||
  bool dealias = false;       // 2/3-rule truncation of the explicit force
  double blowup_limit = 30.0; // max |ln R~ - E(phi_bar)/S|
};

struct StepResult {
  SchemeState state;
  StepReport report;
};

SchemeState initial_state(const Field& ic, const ModelSpec& m, SchemeKind scheme,
                          int capacity);

/// Requires state.history.size() >= t.k and dt > 0.
StepResult esav_step(SchemeState state, const ModelSpec& m, const BdfTable& t,
                     double dt, const StepOptions& opts = {});

StepResult resav_step(SchemeState state, const ModelSpec& m, const BdfTable& t,
                      double dt, double kappa, const StepOptions& opts = {});

/// First-order baseline with r = exp(E_1(phi)/S); state.ln_r holds ln r.
StepResult traditional_esav_step(SchemeState state, const ModelSpec& m, double dt,
                                 const StepOptions& opts = {});

/// Optimal relaxation weight on R~. `dt_d` is dt*(G mu_bar, mu_bar)/S.
/// Works on logarithms; the result is always in [0, 1].
double relaxation_lambda(double ln_r_tilde, double e_new_scaled, double ln_r_prev,
                         double dt_d, double kappa);

/// ln(lambda exp(a) + (1 - lambda) exp(b)) without overflow.
double relaxed_log_r(double ln_r_tilde, double e_new_scaled, double lambda0);

StepResult advance(SchemeState state, const ModelSpec& m, SchemeKind scheme,
                   const BdfTable& t, double dt, double kappa,
                   const StepOptions& opts = {});

/// Substep count used by bootstrap when none is given: 1 for k <= 2,
/// otherwise ceil(dt^{-(k-2)/2}) so the start-up error is O(dt^k).
int auto_startup_substeps(int k, double dt);

struct BootstrapResult {
  SchemeState state;
  std::vector<StepReport> reports;  // one per pre-step
};

/// Fills a k-entry history by order ramping (BDF1, BDF2, ..., BDF(k-1)).
/// With substeps > 1 the ramp runs at dt/substeps and history entries are
/// sampled at multiples of dt.
BootstrapResult bootstrap(const Field& ic, const ModelSpec& m, int k, double dt,
                          double kappa, SchemeKind scheme, int substeps = 1,
                          const StepOptions& opts = {});

}  // namespace esav
