#pragma once

// Gradient-flow models E(phi) = 1/2 (phi, L phi) + int F(phi), with the
// flow phi_t = -G mu and chemical potential mu = L phi + F'(phi).

#include <array>
#include <span>
#include <string>

#include "esav/spectral.hpp"

namespace esav {

enum class ModelKind { AllenCahn, CahnHilliard, StabilizedCahnHilliard, SwiftHohenberg };

struct BuiltinModel {
  ModelKind kind = ModelKind::AllenCahn;
  double epsilon = 0.01;
  double beta = 0.0;  // StabilizedCahnHilliard only
  double g = 0.0;     // SwiftHohenberg only

  static BuiltinModel allen_cahn(double eps) { return {ModelKind::AllenCahn, eps}; }
  static BuiltinModel cahn_hilliard(double eps) { return {ModelKind::CahnHilliard, eps}; }
  static BuiltinModel stabilized_cahn_hilliard(double eps, double beta) {
    return {ModelKind::StabilizedCahnHilliard, eps, beta};
  }
  static BuiltinModel swift_hohenberg(double eps, double g) {
    return {ModelKind::SwiftHohenberg, eps, 0.0, g};
  }

  friend bool operator==(const BuiltinModel&, const BuiltinModel&) = default;
};

/// Canonical lower-case names: allen_cahn, cahn_hilliard,
/// stabilized_cahn_hilliard, swift_hohenberg.
std::string model_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// Energy density F as a quartic polynomial c0 + c1 phi + ... + c4 phi^4.
struct QuarticDensity {
  std::array<double, 5> c{};

  double value(double phi) const noexcept {
    return (((c[4] * phi + c[3]) * phi + c[2]) * phi + c[1]) * phi + c[0];
  }
  double derivative(double phi) const noexcept {
    return ((4.0 * c[4] * phi + 3.0 * c[3]) * phi + 2.0 * c[2]) * phi + c[1];
  }
};

struct ModelSpec {
  std::string name;
  Symbol l_symbol;  // L >= 0
  Symbol g_symbol;  // G >= 0
  QuarticDensity density;
  double s_scale = 1.0;

  double f(double phi) const noexcept { return density.value(phi); }
  double f_prime(double phi) const noexcept { return density.derivative(phi); }
  const Grid& grid() const noexcept { return l_symbol.grid(); }
};

/// Throws InvalidArgument on eps <= 0, beta < 0, g < 0 or s_scale <= 0.
ModelSpec build_model(const BuiltinModel& spec, const Grid& grid, double s_scale = 1.0);

/// 1/2 (phi, L phi), evaluated on the Fourier side from phi_hat.
double quadratic_energy(std::span<const Complex> phi_hat, const ModelSpec& m);
/// int F(phi) with rectangle-rule weights.
double nonlinear_energy(const Field& phi, const ModelSpec& m);

/// Throws EnergyOverflowError when the result is not finite.
double free_energy(const Field& phi, const ModelSpec& m);
/// Same as free_energy with a precomputed spectrum of phi.
double free_energy(const Field& phi, std::span<const Complex> phi_hat, const ModelSpec& m);

/// Pointwise F'(phi).
Field nonlinear_force(const Field& phi, const ModelSpec& m);

Field chemical_potential(const Field& phi, const ModelSpec& m);

/// ln R = E(phi)/S.
double log_sav(const Field& phi, const ModelSpec& m);

}  // namespace esav
