#include "esav/models.hpp"

#include <cmath>

#include "esav/errors.hpp"

namespace esav {

std::string model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::AllenCahn: return "allen_cahn";
    case ModelKind::CahnHilliard: return "cahn_hilliard";
    case ModelKind::StabilizedCahnHilliard: return "stabilized_cahn_hilliard";
    case ModelKind::SwiftHohenberg: return "swift_hohenberg";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  for (ModelKind k : {ModelKind::AllenCahn, ModelKind::CahnHilliard,
                      ModelKind::StabilizedCahnHilliard, ModelKind::SwiftHohenberg}) {
    if (model_name(k) == name) return k;
  }
  throw InvalidArgument("unknown model '" + name + "'");
}

ModelSpec build_model(const BuiltinModel& spec, const Grid& grid, double s_scale) {
  if (!(spec.epsilon > 0.0)) throw InvalidArgument("build_model: epsilon must be > 0");
  if (!(spec.beta >= 0.0)) throw InvalidArgument("build_model: beta must be >= 0");
  if (!(spec.g >= 0.0)) throw InvalidArgument("build_model: g must be >= 0");
  if (!(s_scale > 0.0) || !std::isfinite(s_scale)) {
    throw InvalidArgument("build_model: S must be > 0");
  }

  const double eps2 = spec.epsilon * spec.epsilon;
  auto k2 = [](double kx, double ky) { return kx * kx + ky * ky; };
  const Symbol identity = Symbol::constant(grid, 1.0);
  const Symbol minus_laplacian(grid, k2);

  switch (spec.kind) {
    case ModelKind::AllenCahn:
      return {model_name(spec.kind),
              Symbol(grid, [&](double kx, double ky) { return eps2 * k2(kx, ky); }),
              identity,
              {{0.25, 0.0, -0.5, 0.0, 0.25}},
              s_scale};
    case ModelKind::CahnHilliard:
      return {model_name(spec.kind),
              Symbol(grid, [&](double kx, double ky) { return eps2 * k2(kx, ky); }),
              minus_laplacian,
              {{0.25, 0.0, -0.5, 0.0, 0.25}},
              s_scale};
    case ModelKind::StabilizedCahnHilliard: {
      // 1/4 (phi^2 - 1 - beta)^2 expanded.
      const double a = 1.0 + spec.beta;
      return {model_name(spec.kind),
              Symbol(grid, [&](double kx, double ky) { return eps2 * k2(kx, ky) + spec.beta; }),
              minus_laplacian,
              {{0.25 * a * a, 0.0, -0.5 * a, 0.0, 0.25}},
              s_scale};
    }
    case ModelKind::SwiftHohenberg:
      // -eps/2 phi^2 lives in F so that L = (1 + Laplacian)^2 stays >= 0.
      return {model_name(spec.kind),
              Symbol(grid,
                     [&](double kx, double ky) {
                       const double s = 1.0 - k2(kx, ky);
                       return s * s;
                     }),
              minus_laplacian,
              {{0.0, 0.0, -0.5 * spec.epsilon, -spec.g / 3.0, 0.25}},
              s_scale};
  }
  throw InvalidArgument("build_model: unknown model kind");
}

double quadratic_energy(std::span<const Complex> phi_hat, const ModelSpec& m) {
  return 0.5 * spectral_quadratic(m.grid(), phi_hat, m.l_symbol);
}

double nonlinear_energy(const Field& phi, const ModelSpec& m) {
  double s = 0.0;
  for (double v : phi.values()) s += m.f(v);
  return s * phi.grid().cell_area();
}

double free_energy(const Field& phi, std::span<const Complex> phi_hat,
                   const ModelSpec& m) {
  const double e = quadratic_energy(phi_hat, m) + nonlinear_energy(phi, m);
  if (!std::isfinite(e)) {
    throw EnergyOverflowError("free_energy: non-finite energy (solution blow-up)");
  }
  return e;
}

double free_energy(const Field& phi, const ModelSpec& m) {
  return free_energy(phi, forward(phi), m);
}

Field nonlinear_force(const Field& phi, const ModelSpec& m) {
  Field out(phi.grid());
  auto dst = out.values();
  auto src = phi.values();
  for (std::size_t n = 0; n < src.size(); ++n) dst[n] = m.f_prime(src[n]);
  return out;
}

Field chemical_potential(const Field& phi, const ModelSpec& m) {
  Field mu = apply_symbol(phi, m.l_symbol);
  mu += nonlinear_force(phi, m);
  if (!mu.all_finite()) {
    throw EnergyOverflowError("chemical_potential: non-finite output");
  }
  return mu;
}

double log_sav(const Field& phi, const ModelSpec& m) {
  return free_energy(phi, m) / m.s_scale;
}

}  // namespace esav
