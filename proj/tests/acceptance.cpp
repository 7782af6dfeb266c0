// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "esav/cli_io.hpp"
#include "esav/errors.hpp"
#include "esav/harness.hpp"

using namespace esav;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, double budget_s,
            const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    o.pass = false;
    o.detail += fmt::format("; over time budget {:.0f} s", budget_s);
  }
  if (!o.pass) ++failures;
  std::printf("%s %d: %s [%.1f s] %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), secs,
              o.detail.c_str());
  std::fflush(stdout);
}

Grid grid_of(const ExperimentConfig& c) {
  return Grid(c.grid.lx, c.grid.ly, c.grid.nx, c.grid.ny);
}

// Steps by hand so that everything up to a failure stays inspectable.
struct Trajectory {
  std::vector<StepReport> reports;
  std::vector<Field> fields;  // phi^n after each recorded step (only when kept)
  double s_ln_r0 = 0.0;
  std::optional<std::string> failure;
};

Trajectory integrate(const Field& ic, const ModelSpec& m, SchemeKind scheme, int k, double dt,
                     long n_steps, double kappa, const StepOptions& opts, bool keep = false) {
  Trajectory tr;
  tr.s_ln_r0 = free_energy(ic, m);
  SchemeState state;
  try {
    BootstrapResult b =
        bootstrap(ic, m, k, dt, kappa, scheme, auto_startup_substeps(k, dt), opts);
    state = std::move(b.state);
    tr.reports = std::move(b.reports);
    if (keep) {
      for (std::size_t j = 0; j < tr.reports.size(); ++j) {
        tr.fields.push_back(state.history[state.history.size() - 2 - j]);
      }
    }
  } catch (const Error& e) {
    tr.failure = fmt::format("start-up: {}", e.what());
    return tr;
  }
  const BdfTable table = bdf_table(k);
  while (state.step < n_steps) {
    try {
      StepResult r = advance(std::move(state), m, scheme, table, dt, kappa, opts);
      state = std::move(r.state);
      tr.reports.push_back(r.report);
      if (keep) tr.fields.push_back(state.history.front());
    } catch (const Error& e) {
      tr.failure = fmt::format("step {}: {}", tr.reports.size() + 1, e.what());
      return tr;
    }
  }
  return tr;
}

// S ln R^n non-increasing with slack 1e-12 relative to its size.
std::optional<std::string> monotone_violation(const Trajectory& tr) {
  double prev = tr.s_ln_r0;
  for (const StepReport& r : tr.reports) {
    const double slack = 1e-12 * std::max(1.0, std::abs(prev));
    if (r.ln_r_scaled > prev + slack) {
      return fmt::format("step {} rises by {:.3g}", r.step, r.ln_r_scaled - prev);
    }
    prev = r.ln_r_scaled;
  }
  return std::nullopt;
}

struct StabilityCase {
  std::string name;
  ExperimentConfig config;
};

std::vector<StabilityCase> stability_cases() {
  std::vector<StabilityCase> out = {{"allen_cahn", example1_allen_cahn()},
                                    {"cahn_hilliard", example1_cahn_hilliard()},
                                    {"stabilized_cahn_hilliard", example2_circles()},
                                    {"swift_hohenberg", example3_random(0.0)}};
  for (auto& c : out) c.config.grid.nx = c.config.grid.ny = 64;
  return out;
}

struct StabilitySweep {
  std::vector<std::string> aborted, non_monotone;
  std::size_t runs = 0, steps = 0, unverified = 0;
  double worst_residual = 0.0;
};

const StabilitySweep& stability_sweep() {
  static const StabilitySweep sweep = [] {
    StabilitySweep s;
    StepOptions opts;
    opts.verify_solve = true;
    for (const auto& sc : stability_cases()) {
      const Grid g = grid_of(sc.config);
      const ModelSpec m = build_model(sc.config.model, g, sc.config.s_scale);
      const Field ic = make_ic(sc.config.ic, g, sc.config.seed);
      for (SchemeKind scheme : {SchemeKind::Esav, SchemeKind::Resav}) {
        for (int k = 1; k <= 4; ++k) {
          for (double dt : {0.01, 0.1, 1.0}) {
            const Trajectory tr = integrate(ic, m, scheme, k, dt, 50, 1.0, opts);
            ++s.runs;
            const std::string cell =
                fmt::format("{}/{}/k{}/dt{}", sc.name, scheme_name(scheme), k, dt);
            if (tr.failure) s.aborted.push_back(cell + " (" + *tr.failure + ")");
            if (auto v = monotone_violation(tr)) s.non_monotone.push_back(cell + " " + *v);
            for (const StepReport& r : tr.reports) {
              ++s.steps;
              if (!r.solve_residual) {
                ++s.unverified;
              } else {
                s.worst_residual = std::max(s.worst_residual, *r.solve_residual);
              }
            }
          }
        }
      }
    }
    return s;
  }();
  return sweep;
}

std::string join(const std::vector<std::string>& items, std::size_t limit = 100) {
  std::string out;
  for (std::size_t i = 0; i < items.size() && i < limit; ++i) {
    out += (i ? "; " : "") + items[i];
  }
  if (items.size() > limit) out += fmt::format("; ... {} more", items.size() - limit);
  return out;
}

ExperimentConfig desk(ExperimentConfig c, int n) {
  c.grid.nx = c.grid.ny = n;
  c.snapshot_times.clear();
  return c;
}

std::string rates_text(const ConvergenceReport& r) {
  std::string s;
  for (std::size_t i = 0; i < r.errors.size(); ++i) {
    s += fmt::format("{}{:.3e}", i ? " " : "", r.errors[i]);
    if (r.rates[i]) s += fmt::format("({:.3f})", *r.rates[i]);
  }
  return s;
}

Outcome convergence_criterion(const ExperimentConfig& base, const std::vector<double>& dts,
                              double dt_ref, const std::function<double(int)>& tolerance) {
  Outcome o{true, ""};
  for (int k = 1; k <= 4; ++k) {
    ExperimentConfig c = base;
    c.scheme = SchemeKind::Resav;
    c.order = k;
    const ConvergenceReport r = convergence_study(c, dts, dt_ref);
    const auto rate = r.rates.back();
    const bool ok = rate && std::abs(*rate - k) <= tolerance(k);
    o.pass = o.pass && ok;
    o.detail += fmt::format("{}BDF{} rate {:.4f} [{}]", k > 1 ? "; " : "", k,
                            rate.value_or(std::nan("")), rates_text(r));
  }
  return o;
}

}  // namespace

int main() {
  report(1, "U_k(1+c) = 1 - c^(k+1) on 1e4 samples, k = 1..4", 1.0, [] {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    double worst = 0.0;
    for (int k = 1; k <= 4; ++k) {
      for (int i = 0; i < 10000; ++i) {
        const double c = u(rng);
        worst = std::max(worst, std::abs(u_poly(k, 1.0 + c) - (1.0 - std::pow(c, k + 1))));
      }
    }
    return Outcome{worst <= 1e-12, fmt::format("max deviation {:.3g}", worst)};
  });

  report(2, "S ln R non-increasing, 4 models x {esav,resav} x k=1..4 x dt {0.01,0.1,1}, 64^2",
         120.0, [] {
           const StabilitySweep& s = stability_sweep();
           const bool ok = s.aborted.empty() && s.non_monotone.empty();
           std::string d = fmt::format("{} runs, {} aborted, {} non-monotone", s.runs,
                                       s.aborted.size(), s.non_monotone.size());
           if (!s.aborted.empty()) d += "; aborted: " + join(s.aborted);
           if (!s.non_monotone.empty()) d += "; non-monotone: " + join(s.non_monotone);
           return Outcome{ok, d};
         });

  report(3, "Allen-Cahn RE-SAV convergence, 128^2, dt 1/16..1/128, ref 1/2048", 300.0, [] {
    const ExperimentConfig base = desk(example1_allen_cahn(), 128);
    return convergence_criterion(base, {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128}, 1.0 / 2048,
                                 [](int k) { return k == 4 ? 0.35 : 0.25; });
  });

  report(4, "Cahn-Hilliard RE-SAV convergence, 128^2, dt 1/32..1/256, ref 1/4096", 600.0, [] {
    const ExperimentConfig base = desk(example1_cahn_hilliard(), 128);
    return convergence_criterion(base, {1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256}, 1.0 / 4096,
                                 [](int) { return 0.3; });
  });

  report(5, "first-order esav S=1, esav S=10, resav: rates in [0.9, 1.1], S=10 below S=1", 180.0,
         [] {
           const std::vector<double> dts = {1.0 / 10, 1.0 / 20, 1.0 / 40, 1.0 / 80, 1.0 / 160};
           const double dt_ref = dts.back() / 16;
           ExperimentConfig base = desk(example1_allen_cahn(), 128);
           base.order = 1;
           std::vector<ConvergenceReport> reps;
           for (auto [scheme, s] : {std::pair{SchemeKind::Esav, 1.0}, {SchemeKind::Esav, 10.0},
                                    {SchemeKind::Resav, 1.0}}) {
             ExperimentConfig c = base;
             c.scheme = scheme;
             c.s_scale = s;
             reps.push_back(convergence_study(c, dts, dt_ref));
           }
           Outcome o{true, ""};
           const char* names[] = {"esav S=1", "esav S=10", "resav"};
           for (std::size_t i = 0; i < reps.size(); ++i) {
             const auto rate = reps[i].rates.back();
             o.pass = o.pass && rate && *rate >= 0.9 && *rate <= 1.1;
             o.detail += fmt::format("{}{} [{}]", i ? "; " : "", names[i], rates_text(reps[i]));
           }
           for (std::size_t j = 0; j < dts.size(); ++j) {
             if (!(reps[1].errors[j] < reps[0].errors[j])) {
               o.pass = false;
               o.detail += fmt::format("; S=10 not below S=1 at dt={}", dts[j]);
             }
           }
           return o;
         });

  report(6, "dt = 0.1: max |S ln R - E| smaller for resav than esav (S=1)", 60.0, [] {
    ExperimentConfig c = desk(example1_allen_cahn(), 128);
    c.dt = 0.1;
    auto gap = [&](SchemeKind kind) {
      c.scheme = kind;
      double worst = 0.0;
      for (const StepReport& r : run(c).trace) {
        worst = std::max(worst, std::abs(r.ln_r_scaled - r.energy_original));
      }
      return worst;
    };
    const double e = gap(SchemeKind::Esav), re = gap(SchemeKind::Resav);
    return Outcome{re < e, fmt::format("resav {:.4e} vs esav {:.4e}", re, e)};
  });

  report(7, "phi = 1 fixed point, double-well models, all schemes, k = 1..4, dt = 1", 0.0, [] {
    double worst_phi = 0.0, worst_xi = 0.0;
    std::vector<std::string> bad;
    const std::vector<StabilityCase> cases = stability_cases();
    for (std::size_t i = 0; i < 3; ++i) {
      const ExperimentConfig& c = cases[i].config;
      const Grid g = grid_of(c);
      const Field one = Field::constant(g, 1.0);
      struct Combo {
        SchemeKind scheme;
        int k;
      };
      std::vector<Combo> combos = {{SchemeKind::TraditionalEsav, 1}};
      for (int k = 1; k <= 4; ++k) {
        combos.push_back({SchemeKind::Esav, k});
        combos.push_back({SchemeKind::Resav, k});
      }
      std::vector<double> scales = {1.0};
      if (c.s_scale != 1.0) scales.push_back(c.s_scale);
      for (double s : scales) {
        const ModelSpec m = build_model(c.model, g, s);
        for (const Combo& cb : combos) {
          const Trajectory tr = integrate(one, m, cb.scheme, cb.k, 1.0, 100, 1.0, {}, true);
          const std::string cell = fmt::format("{}/{}/k{}/S{}", cases[i].name,
                                               scheme_name(cb.scheme), cb.k, s);
          if (tr.failure) bad.push_back(cell + " " + *tr.failure);
          if (tr.reports.size() != 100) bad.push_back(cell + " incomplete");
          for (std::size_t n = 0; n < tr.reports.size(); ++n) {
            worst_phi = std::max(worst_phi, (tr.fields[n] - one).max_abs());
            if (cb.scheme != SchemeKind::TraditionalEsav) {
              worst_xi = std::max(worst_xi, std::abs(tr.reports[n].xi - 1.0));
            }
          }
        }
      }
    }
    const bool ok = bad.empty() && worst_phi <= 1e-13 && worst_xi <= 1e-13;
    return Outcome{ok, fmt::format("max |phi-1| {:.3g}, max |xi-1| {:.3g}{}", worst_phi, worst_xi,
                                   bad.empty() ? "" : "; " + join(bad))};
  });

  report(8, "mean(phi_bar) = mean(phi_hat)/alpha, Example 2 preset, 20 steps, 64^2", 0.0, [] {
    const ExperimentConfig c = desk(example2_circles(), 64);
    const Grid g = grid_of(c);
    const ModelSpec m = build_model(c.model, g, c.s_scale);
    const Field ic = make_ic(c.ic, g, c.seed);
    Outcome o{true, ""};
    for (int k : {c.order, 2}) {
      const Trajectory tr = integrate(ic, m, c.scheme, k, c.dt, 20, c.kappa, {});
      double worst = 0.0;
      for (const StepReport& r : tr.reports) {
        const double dev = std::abs(r.mean_phi_bar - r.mean_phi_hat / r.alpha);
        worst = std::max(worst, dev / std::abs(r.mean_phi_hat));
      }
      const bool ok = !tr.failure && tr.reports.size() == 20 && worst <= 1e-12;
      o.pass = o.pass && ok;
      o.detail += fmt::format("{}BDF{}: worst relative deviation {:.3g}{}", k == c.order ? "" : "; ",
                              k, worst, tr.failure ? " (" + *tr.failure + ")" : "");
    }
    return o;
  });

  report(9, "long runs at 128^2 (Example 2 T=10, Example 3 T=100, Example 4 T=100)", 0.0, [] {
    struct Long {
      std::string name;
      ExperimentConfig c;
    };
    std::vector<Long> runs = {{"example2", desk(example2_circles(), 128)},
                              {"example3_g0", desk(example3_random(0.0), 128)},
                              {"example3_g1", desk(example3_random(1.0), 128)},
                              {"example4", desk(example4_crystallites(), 128)}};
    runs[0].c.t_end = 10.0;
    runs[1].c.t_end = runs[2].c.t_end = runs[3].c.t_end = 100.0;
    Outcome o{true, ""};
    for (const Long& l : runs) {
      std::string d;
      try {
        const RunResult r = run(l.c);
        std::size_t rises = 0;
        double worst = 0.0;
        for (std::size_t n = std::max(1, l.c.order - 1); n < r.trace.size(); ++n) {
          const double prev = r.trace[n - 1].energy_original;
          const double up = r.trace[n].energy_original - prev;
          if (up > 1e-12 * std::max(1.0, std::abs(prev))) {
            ++rises;
            worst = std::max(worst, up);
          }
        }
        o.pass = o.pass && rises == 0;
        d = fmt::format("{}: {} steps, E {:.6g} -> {:.6g}, {} rises", l.name, r.trace.size(),
                        r.trace.front().energy_original, r.trace.back().energy_original, rises);
        if (rises) d += fmt::format(" (max {:.3g})", worst);
      } catch (const RunAborted& e) {
        o.pass = false;
        d = fmt::format("{}: aborted: {}", l.name, e.what());
      }
      o.detail += (o.detail.empty() ? "" : "; ") + d;
    }
    return o;
  });

  report(10, "relative linear-solve residual <= 1e-10 on every step of criterion 2", 0.0, [] {
    const StabilitySweep& s = stability_sweep();
    const bool ok = s.unverified == 0 && s.worst_residual <= 1e-10;
    return Outcome{ok, fmt::format("{} steps checked, worst {:.3g}, {} unverified", s.steps,
                                   s.worst_residual, s.unverified)};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
