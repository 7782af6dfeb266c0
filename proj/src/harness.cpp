#include "esav/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "esav/errors.hpp"

namespace esav {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void config_error(const std::string& msg) { throw ConfigError(msg); }

Field circle_array(const CircleArray& c, const Grid& grid) {
  const double width = std::sqrt(2.0) * c.eps;
  return Field::from_function(grid, [&](double x, double y) {
    double v = c.background;
    for (int i = 1; i <= c.n_cols; ++i) {
      for (int j = 1; j <= c.n_rows; ++j) {
        const double rx = x - c.spacing * i;
        const double ry = y - c.spacing * j;
        v -= std::tanh((std::sqrt(rx * rx + ry * ry) - c.r0) / width);
      }
    }
    return v;
  });
}

Field random_uniform(const RandomUniform& r, const Grid& grid, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<double> u(grid.size());
  for (double& v : u) {
    const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;  // [0, 1)
    v = 2.0 * unit - 1.0;
  }
  double mean = 0.0;
  for (double v : u) mean += v;
  mean /= static_cast<double>(u.size());
  for (double& v : u) v = r.mean + r.amplitude * (v - mean);
  return Field(grid, std::move(u));
}

Field crystallites(const Crystallites& c, const Grid& grid) {
  for (const auto& p : c.patches) {
    if (!(p.half_width > 0.0) || p.cx - p.half_width < 0.0 || p.cy - p.half_width < 0.0 ||
        p.cx + p.half_width > grid.lx() || p.cy + p.half_width > grid.ly()) {
      std::ostringstream os;
      os << "crystallite patch centred at (" << p.cx << ", " << p.cy << ") with half width "
         << p.half_width << " does not fit in [0, " << grid.lx() << "] x [0, " << grid.ly()
         << "]";
      config_error(os.str());
    }
  }
  const double root3 = std::sqrt(3.0);
  return Field::from_function(grid, [&](double x, double y) {
    for (const auto& p : c.patches) {
      if (std::abs(x - p.cx) <= p.half_width && std::abs(y - p.cy) <= p.half_width) {
        const double s = std::sin(p.theta), co = std::cos(p.theta);
        const double xl = x * s + y * co;
        const double yl = -x * co + y * s;
        return c.phibar + c.c * (std::cos(c.q * yl / root3) * std::cos(c.q * xl) -
                                 0.5 * std::cos(2.0 * c.q * yl / root3));
      }
    }
    return c.phibar;
  });
}

}  // namespace

Field make_ic(const InitialCondition& ic, const Grid& grid, std::uint64_t seed) {
  return std::visit(
      overloaded{
          [&](const CosCos& c) {
            return Field::from_function(grid, [a = c.amplitude](double x, double y) {
              return a * std::cos(x) * std::cos(y);
            });
          },
          [&](const CircleArray& c) { return circle_array(c, grid); },
          [&](const RandomUniform& r) { return random_uniform(r, grid, seed); },
          [&](const Crystallites& c) { return crystallites(c, grid); },
      },
      ic);
}

long step_count(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end > 0.0)) config_error("dt and t_end must be positive");
  const double ratio = t_end / dt;
  const long n = std::lround(ratio);
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream os;
    os << "t_end = " << t_end << " is not a whole multiple of dt = " << dt;
    config_error(os.str());
  }
  return n;
}

void validate(const ExperimentConfig& c) {
  if (!(c.dt > 0.0)) config_error("dt must be > 0");
  if (!(c.t_end >= c.dt)) config_error("t_end must be >= dt");
  step_count(c.t_end, c.dt);
  if (c.order < 1 || c.order > 4) config_error("order must be in 1..4");
  if (c.scheme == SchemeKind::TraditionalEsav && c.order != 1) {
    config_error("traditional_esav is first order only");
  }
  if (!(c.kappa >= 0.0 && c.kappa <= 1.0)) config_error("kappa must lie in [0, 1]");
  if (!(c.s_scale > 0.0)) config_error("s_scale must be > 0");
  if (c.startup_substeps < 0) config_error("startup_substeps must be >= 0");
  if (c.model.epsilon <= 0.0 || c.model.beta < 0.0 || c.model.g < 0.0) {
    config_error("model parameters out of range (epsilon > 0, beta >= 0, g >= 0)");
  }
  for (double t : c.snapshot_times) {
    if (t < 0.0 || t > c.t_end * (1.0 + 1e-12)) {
      config_error("snapshot time " + std::to_string(t) + " outside [0, t_end]");
    }
  }
  try {
    Grid(c.grid.lx, c.grid.ly, c.grid.nx, c.grid.ny);
  } catch (const InvalidArgument& e) {
    config_error(e.what());
  }
}

RunResult run(const ExperimentConfig& config) {
  validate(config);
  const Grid grid(config.grid.lx, config.grid.ly, config.grid.nx, config.grid.ny);
  const ModelSpec model = build_model(config.model, grid, config.s_scale);
  const Field ic = make_ic(config.ic, grid, config.seed);
  const long n_steps = step_count(config.t_end, config.dt);
  const int k = std::min<long>(config.order, n_steps + 1);
  const int substeps =
      config.startup_substeps > 0 ? config.startup_substeps : auto_startup_substeps(k, config.dt);
  const StepOptions opts{config.verify_solve, config.dealias};

  std::vector<long> snapshot_steps;
  for (double t : config.snapshot_times) snapshot_steps.push_back(std::lround(t / config.dt));

  RunResult out;
  auto record = [&](long step, const Field& f) {
    for (long s : snapshot_steps) {
      if (s == step) {
        out.snapshots.push_back({step, step * config.dt, f});
        break;
      }
    }
  };
  record(0, ic);

  auto abort = [&](const Error& e, long step) -> RunAborted {
    std::ostringstream os;
    os << "run aborted at step " << step << " (t = " << step * config.dt << "): " << e.what();
    return RunAborted(os.str(), step, step * config.dt,
                      dynamic_cast<const BlowUpError*>(&e) != nullptr);
  };

  SchemeState state;
  try {
    BootstrapResult b =
        bootstrap(ic, model, k, config.dt, config.kappa, config.scheme, substeps, opts);
    state = std::move(b.state);
    out.trace = std::move(b.reports);
  } catch (const RunAborted&) {
    throw;
  } catch (const Error& e) {
    throw abort(e, 1);
  }
  // Pre-steps end exactly on the coarse grid.
  for (std::size_t j = 0; j < out.trace.size(); ++j) {
    record(static_cast<long>(j) + 1, state.history[state.history.size() - 1 - (j + 1)]);
  }

  const BdfTable table = bdf_table(k);
  out.trace.reserve(n_steps);
  for (long n = state.step; n < n_steps; ++n) {
    try {
      StepResult r =
          advance(std::move(state), model, config.scheme, table, config.dt, config.kappa, opts);
      state = std::move(r.state);
      r.report.time = static_cast<double>(r.report.step) * config.dt;
      state.time = r.report.time;
      out.trace.push_back(r.report);
    } catch (const Error& e) {
      throw abort(e, n + 1);
    }
    record(state.step, state.history.front());
  }
  out.final_state = std::move(state);
  return out;
}

std::optional<double> observed_rate(double e_coarse, double e_fine) {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0) || !std::isfinite(e_coarse) ||
      !std::isfinite(e_fine)) {
    return std::nullopt;
  }
  return std::log2(e_coarse / e_fine);
}

ConvergenceReport convergence_study(const ExperimentConfig& base,
                                    const std::vector<double>& dt_list, double dt_ref) {
  if (dt_list.empty()) config_error("convergence_study: empty dt list");
  const double dt_min = *std::min_element(dt_list.begin(), dt_list.end());
  if (!(dt_ref > 0.0) || !(dt_ref < dt_min)) {
    config_error("convergence_study: dt_ref must be positive and below every dt");
  }
  for (double dt : dt_list) step_count(base.t_end, dt);
  step_count(base.t_end, dt_ref);

  auto final_field = [&](double dt) {
    ExperimentConfig c = base;
    c.dt = dt;
    c.snapshot_times.clear();
    return run(c).final_state.history.front();
  };

  ConvergenceReport rep;
  rep.dt_list = dt_list;
  rep.dt_ref = dt_ref;
  const Field reference = final_field(dt_ref);
  for (double dt : dt_list) {
    rep.errors.push_back((final_field(dt) - reference).max_abs());
  }
  rep.rates.push_back(std::nullopt);
  for (std::size_t i = 1; i < rep.errors.size(); ++i) {
    rep.rates.push_back(observed_rate(rep.errors[i - 1], rep.errors[i]));
  }
  return rep;
}

}  // namespace esav
