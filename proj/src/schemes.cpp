#include "esav/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "esav/errors.hpp"

namespace esav {

std::string scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Esav: return "esav";
    case SchemeKind::Resav: return "resav";
    case SchemeKind::TraditionalEsav: return "traditional_esav";
  }
  return "unknown";
}

SchemeKind parse_scheme_kind(const std::string& name) {
  for (SchemeKind k : {SchemeKind::Esav, SchemeKind::Resav, SchemeKind::TraditionalEsav}) {
    if (scheme_name(k) == name) return k;
  }
  throw InvalidArgument("unknown scheme '" + name + "'");
}

BdfTable bdf_table(int k) {
  switch (k) {
    case 1: return {1, 1.0, {1.0}, {1.0}, {0.0, 2.0, -1.0}};
    case 2: return {2, 3.0 / 2.0, {2.0, -1.0 / 2.0}, {2.0, -1.0}, {2.0, -3.0, 3.0, -1.0}};
    case 3:
      return {3, 11.0 / 6.0, {3.0, -3.0 / 2.0, 1.0 / 3.0}, {3.0, -3.0, 1.0},
              {0.0, 4.0, -6.0, 4.0, -1.0}};
    case 4:
      return {4, 25.0 / 12.0, {4.0, -3.0, 4.0 / 3.0, -1.0 / 4.0}, {4.0, -6.0, 4.0, -1.0},
              {2.0, -5.0, 10.0, -10.0, 5.0, -1.0}};
    default: break;
  }
  throw InvalidArgument("bdf_table: unsupported order " + std::to_string(k) +
                        " (expected 1..4)");
}

double u_poly(int k, double xi) {
  switch (k) {
    case 1: return xi * (2.0 - xi);
    case 2: return (2.0 - xi) * (xi * xi - xi + 1.0);
    case 3: return xi * (2.0 - xi) * (xi * xi - 2.0 * xi + 2.0);
    case 4: {
      const double x2 = xi * xi;
      return (2.0 - xi) * (x2 * x2 - 3.0 * x2 * xi + 4.0 * x2 - 2.0 * xi + 1.0);
    }
    default: break;
  }
  throw InvalidArgument("u_poly: unsupported order " + std::to_string(k));
}

SchemeState initial_state(const Field& ic, const ModelSpec& m, SchemeKind scheme,
                          int capacity) {
  if (capacity < 1) throw InvalidArgument("initial_state: capacity must be >= 1");
  SchemeState s;
  s.history.push_back(ic);
  s.capacity = capacity;
  s.ln_r = scheme == SchemeKind::TraditionalEsav ? nonlinear_energy(ic, m) / m.s_scale
                                                 : log_sav(ic, m);
  if (!std::isfinite(s.ln_r)) throw EnergyOverflowError("initial_state: non-finite ln R");
  return s;
}

namespace {

struct Prediction {
  Field phi_new;
  double ln_r_tilde = 0.0;
  double e_new = 0.0;
  double xi = 1.0;
  double u = 1.0;
  double d = 0.0;
  double mean_hat = 0.0;
  double mean_bar = 0.0;
  std::optional<double> residual = std::nullopt;
};

void check_step_inputs(const SchemeState& s, const BdfTable& t, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidArgument("step: dt must be positive and finite");
  }
  if (s.history.size() < static_cast<std::size_t>(t.k)) {
    std::ostringstream os;
    os << "step: BDF" << t.k << " needs " << t.k << " history entries, have "
       << s.history.size();
    throw InvalidArgument(os.str());
  }
}

double relative_residual(const Grid& grid, double alpha, double dt, const ModelSpec& m,
                         const Field& solution, const Spectrum& rhs_hat) {
  Spectrum hat = forward(solution);
  for (std::size_t n = 0; n < hat.size(); ++n) {
    hat[n] *= alpha + dt * m.g_symbol[n] * m.l_symbol[n];
  }
  const Field lhs = inverse(grid, hat);
  const Field rhs = inverse(grid, rhs_hat);
  const double scale = rhs.max_abs();
  const double r = (lhs - rhs).max_abs();
  return scale > 0.0 ? r / scale : r;
}

// Steps I-III, shared by the plain and relaxed schemes.
Prediction predict(const SchemeState& s, const ModelSpec& m, const BdfTable& t, double dt,
                   const StepOptions& opts) {
  check_step_inputs(s, t, dt);
  const Grid& grid = m.grid();

  // phi_hat = alpha phi^n + sum_{i>0} w_i (phi^{n-i} - phi^n): equal to
  // sum w_i phi^{n-i}, but a constant history stays exact instead of
  // picking up the rounding of sum(w_i) - alpha.
  const Field& phi_n = s.history.front();
  Field phi_hat = t.alpha * Field(phi_n);
  Field phi_star(grid);
  for (int i = 0; i < t.k; ++i) {
    phi_star.axpy(t.extrap_weights[i], s.history[i]);
    if (i > 0) phi_hat.axpy(t.hist_weights[i], s.history[i] - phi_n);
  }

  Spectrum bar_hat = forward(phi_hat);
  Spectrum force_hat = forward(nonlinear_force(phi_star, m));
  if (opts.dealias) truncate_two_thirds(grid, force_hat);
  for (std::size_t n = 0; n < bar_hat.size(); ++n) {
    bar_hat[n] -= dt * m.g_symbol[n] * force_hat[n];
  }
  Spectrum rhs_hat;
  if (opts.verify_solve) rhs_hat = bar_hat;
  solve_shifted_spectral(t.alpha, dt, m.g_symbol, m.l_symbol, bar_hat);

  Field phi_bar = inverse(grid, bar_hat);
  if (!phi_bar.all_finite()) throw EnergyOverflowError("step: non-finite phi_bar");

  Spectrum l_bar(bar_hat);
  for (std::size_t n = 0; n < l_bar.size(); ++n) l_bar[n] *= m.l_symbol[n];
  Field mu_bar = inverse(grid, l_bar);
  mu_bar += nonlinear_force(phi_bar, m);

  Prediction p{Field(grid)};
  p.d = dissipation_quadratic(mu_bar, m.g_symbol);
  const double quad_bar = quadratic_energy(bar_hat, m);
  const double e_bar = quad_bar + nonlinear_energy(phi_bar, m);
  if (!std::isfinite(e_bar)) throw EnergyOverflowError("step: non-finite E(phi_bar)");

  const double S = m.s_scale;
  p.ln_r_tilde = s.ln_r - std::log1p(dt * p.d / S);
  const double exponent = p.ln_r_tilde - e_bar / S;
  if (!(std::abs(exponent) <= opts.blowup_limit)) {
    std::ostringstream os;
    os << "step: blow-up guard tripped, ln R~ - E(phi_bar)/S = " << exponent
       << " (limit " << opts.blowup_limit << ")";
    throw BlowUpError(os.str(), exponent);
  }
  p.xi = std::exp(exponent);
  p.u = u_poly(t.k, p.xi);
  p.phi_new = p.u * phi_bar;
  p.e_new = p.u * p.u * quad_bar + nonlinear_energy(p.phi_new, m);
  if (!std::isfinite(p.e_new)) throw EnergyOverflowError("step: non-finite E(phi^{n+1})");
  p.mean_hat = phi_hat.mean();
  p.mean_bar = phi_bar.mean();
  if (opts.verify_solve) {
    p.residual = relative_residual(grid, t.alpha, dt, m, phi_bar, rhs_hat);
  }
  return p;
}

StepResult finish(SchemeState s, const ModelSpec& m, const BdfTable& t, double dt,
                  Prediction&& p, double ln_r_new, std::optional<double> lambda0) {
  StepReport r;
  r.step = s.step + 1;
  r.time = s.time + dt;
  r.energy_original = p.e_new;
  r.ln_r_scaled = m.s_scale * ln_r_new;
  r.xi = p.xi;
  r.u_of_xi = p.u;
  r.lambda0 = lambda0;
  r.dissipation = p.d;
  r.mass = p.phi_new.mean() * m.grid().area();
  r.alpha = t.alpha;
  r.mean_phi_hat = p.mean_hat;
  r.mean_phi_bar = p.mean_bar;
  r.solve_residual = p.residual;

  s.history.insert(s.history.begin(), std::move(p.phi_new));
  if (s.history.size() > static_cast<std::size_t>(s.capacity)) {
    s.history.erase(s.history.begin() + s.capacity, s.history.end());
  }
  s.ln_r = ln_r_new;
  s.step = r.step;
  s.time = r.time;
  return {std::move(s), r};
}

// Root of S ln s + c0 - a s - b s^2 = 0 nearest the bracket around s = 1.
double solve_baseline_scalar(double S, double c0, double a, double b) {
  auto f = [&](double s) { return S * std::log(s) + c0 - a * s - b * s * s; };
  auto df = [&](double s) { return S / s - a - 2.0 * b * s; };

  double lo = 1.0, hi = 1.0;
  const double f1 = f(1.0);
  if (f1 == 0.0) return 1.0;
  int expand = 0;
  if (f1 > 0.0) {
    lo = 0.5;
    while (!(f(lo) < 0.0)) {
      lo *= 0.5;
      if (++expand > 1000) throw BaselineStepError("baseline step: no root below s = 1");
    }
  } else {
    hi = 2.0;
    while (!(f(hi) > 0.0)) {
      hi *= 2.0;
      if (++expand > 1000 || !std::isfinite(hi)) {
        throw BaselineStepError("baseline step: no root above s = 1");
      }
    }
  }

  double s = 1.0;
  for (int it = 0; it < 50; ++it) {
    const double fs = f(s);
    if (fs < 0.0) lo = s; else hi = s;
    double next = s - fs / df(s);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 1e-12 * std::max(1.0, std::abs(s))) return next;
    s = next;
  }
  throw BaselineStepError("baseline step: scalar Newton did not converge in 50 iterations");
}

}  // namespace

StepResult esav_step(SchemeState state, const ModelSpec& m, const BdfTable& t, double dt,
                     const StepOptions& opts) {
  Prediction p = predict(state, m, t, dt, opts);
  const double ln_r_new = p.ln_r_tilde;
  return finish(std::move(state), m, t, dt, std::move(p), ln_r_new, std::nullopt);
}

double relaxation_lambda(double ln_r_tilde, double e_new_scaled, double ln_r_prev,
                         double dt_d, double kappa) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) {
    throw InvalidArgument("relaxation_lambda: kappa must lie in [0, 1]");
  }
  if (!(dt_d >= 0.0)) throw InvalidArgument("relaxation_lambda: dt_d must be >= 0");
  if (ln_r_tilde >= e_new_scaled) return 0.0;

  // |R~ - exp(E)| = exp(E) * (1 - exp(ln R~ - E)); factor out exp(E).
  const double gap = -std::expm1(ln_r_tilde - e_new_scaled);
  if (!(gap > 0.0)) return 0.0;
  const double a = kappa * dt_d * std::exp(ln_r_prev - e_new_scaled) / ((1.0 + dt_d) * gap);
  if (std::isnan(a)) return 0.0;
  return std::clamp(1.0 - a, 0.0, 1.0);
}

double relaxed_log_r(double ln_r_tilde, double e_new_scaled, double lambda0) {
  if (lambda0 <= 0.0) return e_new_scaled;
  if (lambda0 >= 1.0) return ln_r_tilde;
  // Factor out the larger exponential; log1p/expm1 keep tiny increments exact
  // enough that S * ln R stays monotone for large S.
  if (ln_r_tilde <= e_new_scaled) {
    return e_new_scaled + std::log1p(lambda0 * std::expm1(ln_r_tilde - e_new_scaled));
  }
  return ln_r_tilde + std::log1p((1.0 - lambda0) * std::expm1(e_new_scaled - ln_r_tilde));
}

StepResult resav_step(SchemeState state, const ModelSpec& m, const BdfTable& t, double dt,
                      double kappa, const StepOptions& opts) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) {
    throw InvalidArgument("resav_step: kappa must lie in [0, 1]");
  }
  Prediction p = predict(state, m, t, dt, opts);
  const double S = m.s_scale;
  const double e_scaled = p.e_new / S;
  const double dt_d = dt * p.d / S;
  const double lambda0 = relaxation_lambda(p.ln_r_tilde, e_scaled, state.ln_r, dt_d, kappa);
  // With kappa = 1 the constraint is active at equality; trim the last ulp.
  const double bound = state.ln_r + std::log1p(kappa * dt_d) - std::log1p(dt_d);
  const double ln_r_new = std::min(relaxed_log_r(p.ln_r_tilde, e_scaled, lambda0), bound);
  return finish(std::move(state), m, t, dt, std::move(p), ln_r_new, lambda0);
}

StepResult traditional_esav_step(SchemeState state, const ModelSpec& m, double dt,
                                 const StepOptions& opts) {
  const BdfTable t = bdf_table(1);
  check_step_inputs(state, t, dt);
  const Grid& grid = m.grid();
  const double S = m.s_scale;
  const Field& phi_n = state.history.front();

  const Field force = nonlinear_force(phi_n, m);
  Spectrum force_hat = forward(force);
  if (opts.dealias) truncate_two_thirds(grid, force_hat);

  Spectrum hat1 = forward(phi_n);
  Spectrum hat2(force_hat.size());
  for (std::size_t n = 0; n < hat2.size(); ++n) hat2[n] = -dt * m.g_symbol[n] * force_hat[n];
  Spectrum rhs1, rhs2;
  if (opts.verify_solve) {
    rhs1 = hat1;
    rhs2 = hat2;
  }
  solve_shifted_spectral(1.0, dt, m.g_symbol, m.l_symbol, hat1);
  solve_shifted_spectral(1.0, dt, m.g_symbol, m.l_symbol, hat2);
  const Field phi1 = inverse(grid, hat1);
  const Field phi2 = inverse(grid, hat2);

  const double a = inner_product(force, phi1 - phi_n);
  const double b = inner_product(force, phi2);
  const double e1_n = nonlinear_energy(phi_n, m);
  const double c0 = e1_n - S * state.ln_r;
  const double s = solve_baseline_scalar(S, c0, a, b);

  Field phi_new = phi1;
  phi_new.axpy(s, phi2);
  if (!phi_new.all_finite()) throw EnergyOverflowError("baseline step: non-finite phi");
  const double ln_r_new = std::log(s) + e1_n / S;

  Spectrum new_hat(hat1);
  for (std::size_t n = 0; n < new_hat.size(); ++n) new_hat[n] += s * hat2[n];
  Field mu = inverse(grid, [&] {
    Spectrum l_hat(new_hat);
    for (std::size_t n = 0; n < l_hat.size(); ++n) l_hat[n] *= m.l_symbol[n];
    return l_hat;
  }());
  mu.axpy(s, force);

  const double quad_new = quadratic_energy(new_hat, m);
  const double e1_new = nonlinear_energy(phi_new, m);

  StepReport r;
  r.step = state.step + 1;
  r.time = state.time + dt;
  r.energy_original = quad_new + e1_new;
  if (!std::isfinite(r.energy_original)) {
    throw EnergyOverflowError("baseline step: non-finite energy");
  }
  r.ln_r_scaled = quad_new + S * ln_r_new;
  r.xi = std::exp(std::clamp(ln_r_new - e1_new / S, -700.0, 700.0));
  r.u_of_xi = s;
  r.dissipation = dissipation_quadratic(mu, m.g_symbol);
  r.mass = phi_new.mean() * grid.area();
  r.alpha = 1.0;
  r.mean_phi_hat = phi_n.mean();
  r.mean_phi_bar = phi_new.mean();
  if (opts.verify_solve) {
    r.solve_residual = std::max(relative_residual(grid, 1.0, dt, m, phi1, rhs1),
                                relative_residual(grid, 1.0, dt, m, phi2, rhs2));
  }

  state.history.insert(state.history.begin(), std::move(phi_new));
  if (state.history.size() > static_cast<std::size_t>(state.capacity)) {
    state.history.erase(state.history.begin() + state.capacity, state.history.end());
  }
  state.ln_r = ln_r_new;
  state.step = r.step;
  state.time = r.time;
  return {std::move(state), r};
}

StepResult advance(SchemeState state, const ModelSpec& m, SchemeKind scheme,
                   const BdfTable& t, double dt, double kappa, const StepOptions& opts) {
  switch (scheme) {
    case SchemeKind::Esav: return esav_step(std::move(state), m, t, dt, opts);
    case SchemeKind::Resav: return resav_step(std::move(state), m, t, dt, kappa, opts);
    case SchemeKind::TraditionalEsav:
      if (t.k != 1) throw InvalidArgument("traditional E-SAV is first order only");
      return traditional_esav_step(std::move(state), m, dt, opts);
  }
  throw InvalidArgument("advance: unknown scheme");
}

int auto_startup_substeps(int k, double dt) {
  if (k <= 2 || dt >= 1.0) return 1;
  return static_cast<int>(std::ceil(std::pow(dt, -0.5 * (k - 2)) - 1e-9));
}

BootstrapResult bootstrap(const Field& ic, const ModelSpec& m, int k, double dt, double kappa,
                          SchemeKind scheme, int substeps, const StepOptions& opts) {
  if (k < 1 || k > 4) throw InvalidArgument("bootstrap: order must be in 1..4");
  if (scheme == SchemeKind::TraditionalEsav && k != 1) {
    throw InvalidArgument("bootstrap: traditional E-SAV is first order only");
  }
  if (substeps < 1) throw InvalidArgument("bootstrap: substeps must be >= 1");

  BootstrapResult out{initial_state(ic, m, scheme, k), {}};
  if (k == 1) return out;

  if (substeps == 1) {
    for (int j = 1; j < k; ++j) {
      StepResult r = advance(std::move(out.state), m, scheme, bdf_table(j), dt, kappa, opts);
      out.state = std::move(r.state);
      out.reports.push_back(r.report);
    }
    return out;
  }

  const double h = dt / substeps;
  SchemeState fine = initial_state(ic, m, scheme, k);
  std::vector<Field> samples{ic};
  for (int j = 1; j < k; ++j) {
    StepReport last;
    for (int q = 0; q < substeps; ++q) {
      const int order = std::min<int>(static_cast<int>(fine.history.size()), k);
      StepResult r = advance(std::move(fine), m, scheme, bdf_table(order), h, kappa, opts);
      fine = std::move(r.state);
      last = r.report;
    }
    samples.push_back(fine.history.front());
    last.step = j;
    last.time = j * dt;
    out.reports.push_back(last);
  }
  std::reverse(samples.begin(), samples.end());
  out.state.history = std::move(samples);
  out.state.ln_r = fine.ln_r;
  out.state.step = k - 1;
  out.state.time = (k - 1) * dt;
  return out;
}

}  // namespace esav
