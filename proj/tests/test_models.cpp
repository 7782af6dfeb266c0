#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "esav/errors.hpp"
#include "esav/models.hpp"

using namespace esav;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<BuiltinModel> all_models() {
  return {BuiltinModel::allen_cahn(0.1), BuiltinModel::cahn_hilliard(0.4),
          BuiltinModel::stabilized_cahn_hilliard(0.05, 2.0),
          BuiltinModel::swift_hohenberg(0.25, 1.0)};
}

Field smooth_field(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const double a = u(rng), b = u(rng), c = u(rng);
  const double kx = 2 * kPi / g.lx(), ky = 2 * kPi / g.ly();
  return Field::from_function(g, [=](double x, double y) {
    return a * std::cos(kx * x) + b * std::sin(ky * y + 0.3) +
           c * std::cos(2 * kx * x - ky * y);
  });
}

}  // namespace

TEST(BuildModel, AllenCahnSymbols) {
  const Grid g(2 * kPi, 2 * kPi, 8, 8);
  const ModelSpec m = build_model(BuiltinModel::allen_cahn(0.01), g);
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.half_nx(); ++i) {
      const std::size_t n = static_cast<std::size_t>(j) * g.half_nx() + i;
      const double k2 = g.kx()[i] * g.kx()[i] + g.ky()[j] * g.ky()[j];
      EXPECT_EQ(m.g_symbol[n], 1.0);
      EXPECT_NEAR(m.l_symbol[n], 1e-4 * k2, 1e-18);
    }
  }
}

TEST(BuildModel, StabilizedDensity) {
  const Grid g(2.0, 2.0, 8, 8);
  const ModelSpec m = build_model(BuiltinModel::stabilized_cahn_hilliard(0.01, 2.0), g);
  for (double phi : {-2.0, -0.3, 0.0, 1.0, 1.7}) {
    EXPECT_NEAR(m.f(phi), 0.25 * std::pow(phi * phi - 3.0, 2), 1e-14);
  }
}

TEST(BuildModel, SwiftHohenbergSymbolVanishesOnUnitCircle) {
  const Grid g(2 * kPi, 2 * kPi, 16, 16);  // kx[1] = 1
  const ModelSpec m = build_model(BuiltinModel::swift_hohenberg(0.25, 0.0), g);
  EXPECT_NEAR(m.l_symbol[1], 0.0, 1e-15);
  EXPECT_NEAR(m.l_symbol[0], 1.0, 1e-15);
}

TEST(BuildModel, RejectsBadParameters) {
  const Grid g(1.0, 1.0, 4, 4);
  EXPECT_THROW(build_model(BuiltinModel::allen_cahn(0.0), g), InvalidArgument);
  EXPECT_THROW(build_model(BuiltinModel::stabilized_cahn_hilliard(0.1, -1.0), g),
               InvalidArgument);
  EXPECT_THROW(build_model(BuiltinModel::swift_hohenberg(0.1, -0.5), g), InvalidArgument);
  EXPECT_THROW(build_model(BuiltinModel::allen_cahn(0.1), g, 0.0), InvalidArgument);
}

TEST(BuildModel, NamesRoundTrip) {
  for (auto kind : {ModelKind::AllenCahn, ModelKind::CahnHilliard,
                    ModelKind::StabilizedCahnHilliard, ModelKind::SwiftHohenberg}) {
    EXPECT_EQ(parse_model_kind(model_name(kind)), kind);
  }
  EXPECT_THROW(parse_model_kind("navier_stokes"), InvalidArgument);
}

TEST(FreeEnergy, KnownValues) {
  const Grid g(2 * kPi, 2 * kPi, 16, 16);
  const ModelSpec ac = build_model(BuiltinModel::allen_cahn(0.01), g);
  EXPECT_NEAR(free_energy(Field::constant(g, 1.0), ac), 0.0, 1e-14);
  EXPECT_NEAR(free_energy(Field(g), ac), kPi * kPi, 1e-12);

  const Grid g2(2.0, 3.0, 8, 8);
  const ModelSpec st = build_model(BuiltinModel::stabilized_cahn_hilliard(0.01, 2.0), g2);
  EXPECT_NEAR(free_energy(Field::constant(g2, 1.0), st), 2.0 * g2.area(), 1e-12);
}

TEST(FreeEnergy, ClosedFormAllenCahnCosCos) {
  // E = eps^2/2 * 2 pi^2 a^2 + 1/4 (a^4 (3 pi / 4)^2 - 2 a^2 pi^2 + 4 pi^2)
  const Grid g(2 * kPi, 2 * kPi, 32, 32);
  const double a = 0.5, eps = 0.01;
  const Field phi = Field::from_function(
      g, [&](double x, double y) { return a * std::cos(x) * std::cos(y); });
  const double expect = 0.5 * eps * eps * 2 * kPi * kPi * a * a +
                        0.25 * (std::pow(a, 4) * std::pow(0.75 * kPi, 2) -
                                2 * a * a * kPi * kPi + 4 * kPi * kPi);
  const ModelSpec m = build_model(BuiltinModel::allen_cahn(eps), g);
  EXPECT_NEAR(free_energy(phi, m), expect, 1e-12 * expect);
}

TEST(FreeEnergy, StabilizedEqualsGinzburgLandauPlusConstant) {
  const double beta = 2.0;
  const Grid g(2.0, 2.0, 32, 32);
  const Field phi = smooth_field(g, 4);
  const double split =
      free_energy(phi, build_model(BuiltinModel::stabilized_cahn_hilliard(0.05, beta), g));
  const double plain = free_energy(phi, build_model(BuiltinModel::cahn_hilliard(0.05), g));
  EXPECT_NEAR(split - plain, (beta / 2 + beta * beta / 4) * g.area(), 1e-11);
}

TEST(FreeEnergy, OverflowRaises) {
  const Grid g(1.0, 1.0, 4, 4);
  const ModelSpec m = build_model(BuiltinModel::allen_cahn(0.1), g);
  EXPECT_THROW(free_energy(Field::constant(g, 1e100), m), EnergyOverflowError);
}

TEST(ChemicalPotential, KnownValues) {
  const Grid g(2 * kPi, 2 * kPi, 8, 8);
  const ModelSpec ac = build_model(BuiltinModel::allen_cahn(0.01), g);
  EXPECT_LE(chemical_potential(Field::constant(g, 1.0), ac).max_abs(), 1e-14);
  const Field mu2 = chemical_potential(Field::constant(g, 2.0), ac);
  EXPECT_LE((mu2 - Field::constant(g, 6.0)).max_abs(), 1e-13);
  const ModelSpec st = build_model(BuiltinModel::stabilized_cahn_hilliard(0.01, 2.0), g);
  EXPECT_LE(chemical_potential(Field::constant(g, 1.0), st).max_abs(), 1e-13);
}

TEST(ChemicalPotential, SwiftHohenbergSplitting) {
  const double eps = 0.25, gq = 1.0;
  const Grid g(20.0, 20.0, 32, 32);
  const ModelSpec m = build_model(BuiltinModel::swift_hohenberg(eps, gq), g);
  const Field phi = smooth_field(g, 8);
  // (1 + Delta)^2 phi built from two applications of 1 - |k|^2.
  const Symbol one_plus_lap(g, [](double kx, double ky) { return 1.0 - kx * kx - ky * ky; });
  Field expect = apply_symbol(apply_symbol(phi, one_plus_lap), one_plus_lap);
  for (std::size_t n = 0; n < phi.size(); ++n) {
    const double p = phi[n];
    expect[n] += -eps * p + p * p * p - gq * p * p;
  }
  EXPECT_LE((chemical_potential(phi, m) - expect).max_abs(), 1e-12);
}

TEST(LogSav, KnownValues) {
  const Grid g(2 * kPi, 2 * kPi, 16, 16);
  EXPECT_NEAR(log_sav(Field::constant(g, 1.0), build_model(BuiltinModel::allen_cahn(0.01), g)),
              0.0, 1e-14);
  const ModelSpec m10 = build_model(BuiltinModel::allen_cahn(0.01), g, 10.0);
  EXPECT_NEAR(log_sav(Field(g), m10), kPi * kPi / 10.0, 1e-13);
  const Field phi = smooth_field(g, 3);
  const ModelSpec m20 = build_model(BuiltinModel::allen_cahn(0.01), g, 20.0);
  EXPECT_NEAR(log_sav(phi, m20), 0.5 * log_sav(phi, m10), 1e-15);
}

TEST(ModelProperties, DerivativeMatchesFiniteDifference) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Grid g(1.0, 1.0, 4, 4);
  const double h = 1e-5;
  for (const auto& b : all_models()) {
    const ModelSpec m = build_model(b, g);
    for (int t = 0; t < 100; ++t) {
      const double phi = u(rng);
      const double fd = (m.f(phi + h) - m.f(phi - h)) / (2 * h);
      EXPECT_NEAR(fd, m.f_prime(phi), 1e-6 * std::max(1.0, std::abs(m.f_prime(phi))));
    }
  }
}

TEST(ModelProperties, LinearOperatorNonNegative) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Grid g(10.0, 10.0, 16, 16);
  for (const auto& b : all_models()) {
    const ModelSpec m = build_model(b, g);
    EXPECT_GE(m.l_symbol.min(), 0.0);
    EXPECT_GE(m.g_symbol.min(), 0.0);
    Field phi(g);
    for (std::size_t n = 0; n < phi.size(); ++n) phi[n] = u(rng);
    EXPECT_GE(inner_product(phi, apply_symbol(phi, m.l_symbol)),
              -1e-12 * inner_product(phi, phi));
  }
}

TEST(ModelProperties, ChemicalPotentialIsEnergyGradient) {
  const Grid g(2 * kPi, 2 * kPi, 32, 32);
  for (const auto& b : all_models()) {
    const ModelSpec m = build_model(b, g);
    const Field phi = smooth_field(g, 1);
    const Field psi = smooth_field(g, 2);
    const double h = 1e-5;
    Field plus = phi, minus = phi;
    plus.axpy(h, psi);
    minus.axpy(-h, psi);
    const double fd = (free_energy(plus, m) - free_energy(minus, m)) / (2 * h);
    const double exact = inner_product(chemical_potential(phi, m), psi);
    EXPECT_NEAR(fd, exact, 1e-5 * std::abs(exact)) << m.name;
  }
}
