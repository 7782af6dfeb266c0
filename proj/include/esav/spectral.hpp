#pragma once

// Periodic uniform grids, real lattice fields and Fourier multipliers.
//
// Fourier data uses the FFTW real-to-complex half layout: ny rows of
// nx/2 + 1 complex coefficients, row-major over (ky, kx). The forward
// transform is unnormalized and the inverse divides by nx*ny, so
// inverse(forward(f)) == f up to roundoff.

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace esav {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

namespace detail {
struct GridData;
}

class Grid {
 public:
  /// Throws InvalidArgument unless nx, ny are even and >= 2 and lx, ly > 0.
  Grid(double lx, double ly, int nx, int ny);

  double lx() const noexcept;
  double ly() const noexcept;
  int nx() const noexcept;
  int ny() const noexcept;
  double dx() const noexcept;
  double dy() const noexcept;
  double cell_area() const noexcept { return dx() * dy(); }
  double area() const noexcept { return lx() * ly(); }

  std::size_t size() const noexcept;           // nx*ny
  int half_nx() const noexcept;                // nx/2 + 1
  std::size_t spectral_size() const noexcept;  // ny*(nx/2 + 1)

  /// Wavenumbers (2*pi/L) * {0, 1, ..., n/2-1, -n/2, ..., -1}; the Nyquist
  /// entry is negative, as in numpy.fft.fftfreq.
  std::span<const double> kx() const noexcept;
  std::span<const double> ky() const noexcept;

  double x(int i) const noexcept { return i * dx(); }
  double y(int j) const noexcept { return j * dy(); }

  /// Number of full-spectrum modes represented by half-layout column i
  /// (1 for the zero and Nyquist columns, 2 otherwise).
  double column_multiplicity(int i) const noexcept;

  void forward(std::span<const double> in, std::span<Complex> out) const;
  /// `in` is left untouched.
  void inverse(std::span<const Complex> in, std::span<double> out) const;

  friend bool operator==(const Grid& a, const Grid& b) noexcept;

 private:
  std::shared_ptr<const detail::GridData> data_;
};

Grid make_grid(double lx, double ly, int nx, int ny);

/// Real scalar lattice function, row-major over (y, x).
class Field {
 public:
  explicit Field(Grid grid);
  Field(Grid grid, std::vector<double> values);

  static Field constant(const Grid& grid, double value);
  static Field from_function(const Grid& grid,
                             const std::function<double(double, double)>& fn);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double& operator()(int i, int j) { return values_[j * grid_.nx() + i]; }
  double operator()(int i, int j) const { return values_[j * grid_.nx() + i]; }
  double operator[](std::size_t n) const { return values_[n]; }
  double& operator[](std::size_t n) { return values_[n]; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double a);
  /// this += a * other
  Field& axpy(double a, const Field& other);

  double max_abs() const noexcept;
  double mean() const noexcept;
  bool all_finite() const noexcept;

 private:
  Grid grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double a, Field f);

/// Real diagonal Fourier multiplier, cached per mode in the half layout.
class Symbol {
 public:
  Symbol(const Grid& grid, const std::function<double(double, double)>& fn);
  static Symbol constant(const Grid& grid, double value);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t n) const { return values_[n]; }
  double min() const noexcept;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Symbol of the Laplacian, -(kx^2 + ky^2).
Symbol laplacian_symbol(const Grid& grid);

Spectrum forward(const Field& f);
Field inverse(const Grid& grid, std::span<const Complex> spectrum);

/// Rectangle-rule L2 product sum(f*g)*dx*dy.
double inner_product(const Field& f, const Field& g);

/// Fourier-side counterpart of inner_product: sum over modes of
/// s(k) |f^(k)|^2 scaled to match inner_product(apply_symbol(f, s), f).
double spectral_quadratic(const Grid& grid, std::span<const Complex> spectrum,
                          const Symbol& s);

Field apply_symbol(const Field& f, const Symbol& s);

/// Solves (alpha I + dt G L) u = rhs modewise. Throws SingularOperatorError
/// naming the first mode whose denominator is zero or non-finite.
Field solve_shifted(double alpha, double dt, const Symbol& g, const Symbol& l,
                    const Field& rhs);
/// In-place spectral variant of solve_shifted.
void solve_shifted_spectral(double alpha, double dt, const Symbol& g,
                            const Symbol& l, std::span<Complex> rhs_hat);

/// (G mu, mu); clamped to 0 when negative within roundoff.
double dissipation_quadratic(const Field& mu, const Symbol& g);

/// Zeroes every mode with |index| > n/3 in either direction.
void truncate_two_thirds(const Grid& grid, std::span<Complex> spectrum);

}  // namespace esav
