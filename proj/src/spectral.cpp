#include "esav/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "esav/errors.hpp"

namespace esav {

namespace {

// FFTW planning and plan destruction are not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<double> wavenumbers(double length, int n) {
  std::vector<double> k(n);
  const double base = 2.0 * std::numbers::pi / length;
  for (int i = 0; i < n; ++i) {
    k[i] = base * (i < n / 2 ? i : i - n);
  }
  return k;
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b)) {
    throw InvalidArgument(std::string(where) + ": grid mismatch");
  }
}

}  // namespace

namespace detail {

struct GridData {
  double lx, ly;
  int nx, ny;
  double dx, dy;
  std::vector<double> kx, ky;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  GridData(double lx_, double ly_, int nx_, int ny_)
      : lx(lx_), ly(ly_), nx(nx_), ny(ny_), dx(lx_ / nx_), dy(ly_ / ny_),
        kx(wavenumbers(lx_, nx_)), ky(wavenumbers(ly_, ny_)) {
    std::vector<double> real(static_cast<std::size_t>(nx) * ny);
    std::vector<Complex> cplx(static_cast<std::size_t>(ny) * (nx / 2 + 1));
    auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(planner_mutex());
    r2c = fftw_plan_dft_r2c_2d(ny, nx, real.data(), c, flags);
    c2r = fftw_plan_dft_c2r_2d(ny, nx, c, real.data(),
                               flags | FFTW_DESTROY_INPUT);
  }

  ~GridData() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(r2c);
    fftw_destroy_plan(c2r);
  }

  GridData(const GridData&) = delete;
  GridData& operator=(const GridData&) = delete;
};

}  // namespace detail

// ---------------------------------------------------------------- Grid

Grid::Grid(double lx, double ly, int nx, int ny) {
  if (nx < 2 || ny < 2 || nx % 2 != 0 || ny % 2 != 0) {
    std::ostringstream os;
    os << "make_grid: mode counts must be even and >= 2, got (" << nx << ", "
       << ny << ")";
    throw InvalidArgument(os.str());
  }
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    std::ostringstream os;
    os << "make_grid: domain lengths must be positive, got (" << lx << ", "
       << ly << ")";
    throw InvalidArgument(os.str());
  }
  data_ = std::make_shared<const detail::GridData>(lx, ly, nx, ny);
}

Grid make_grid(double lx, double ly, int nx, int ny) {
  return Grid(lx, ly, nx, ny);
}

double Grid::lx() const noexcept { return data_->lx; }
double Grid::ly() const noexcept { return data_->ly; }
int Grid::nx() const noexcept { return data_->nx; }
int Grid::ny() const noexcept { return data_->ny; }
double Grid::dx() const noexcept { return data_->dx; }
double Grid::dy() const noexcept { return data_->dy; }
std::size_t Grid::size() const noexcept {
  return static_cast<std::size_t>(data_->nx) * data_->ny;
}
int Grid::half_nx() const noexcept { return data_->nx / 2 + 1; }
std::size_t Grid::spectral_size() const noexcept {
  return static_cast<std::size_t>(data_->ny) * half_nx();
}
std::span<const double> Grid::kx() const noexcept { return data_->kx; }
std::span<const double> Grid::ky() const noexcept { return data_->ky; }

double Grid::column_multiplicity(int i) const noexcept {
  return (i == 0 || i == data_->nx / 2) ? 1.0 : 2.0;
}

void Grid::forward(std::span<const double> in, std::span<Complex> out) const {
  if (in.size() != size() || out.size() != spectral_size()) {
    throw InvalidArgument("Grid::forward: buffer size mismatch");
  }
  // r2c does not modify its input.
  fftw_execute_dft_r2c(data_->r2c, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void Grid::inverse(std::span<const Complex> in, std::span<double> out) const {
  if (in.size() != spectral_size() || out.size() != size()) {
    throw InvalidArgument("Grid::inverse: buffer size mismatch");
  }
  Spectrum scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(data_->c2r,
                       reinterpret_cast<fftw_complex*>(scratch.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(size());
  for (double& v : out) v *= scale;
}

bool operator==(const Grid& a, const Grid& b) noexcept {
  if (a.data_ == b.data_) return true;
  return a.nx() == b.nx() && a.ny() == b.ny() && a.lx() == b.lx() &&
         a.ly() == b.ly();
}

// --------------------------------------------------------------- Field

Field::Field(Grid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

Field::Field(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw InvalidArgument("Field: value count does not match grid size");
  }
}

Field Field::constant(const Grid& grid, double value) {
  return Field(grid, std::vector<double>(grid.size(), value));
}

Field Field::from_function(const Grid& grid,
                           const std::function<double(double, double)>& fn) {
  Field f(grid);
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      f(i, j) = fn(grid.x(i), grid.y(j));
    }
  }
  return f;
}

Field& Field::operator+=(const Field& other) { return axpy(1.0, other); }
Field& Field::operator-=(const Field& other) { return axpy(-1.0, other); }

Field& Field::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

Field& Field::axpy(double a, const Field& other) {
  require_same_grid(grid_, other.grid_, "Field::axpy");
  for (std::size_t n = 0; n < values_.size(); ++n) {
    values_[n] += a * other.values_[n];
  }
  return *this;
}

double Field::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double Field::mean() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

bool Field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double a, Field f) { return f *= a; }

// -------------------------------------------------------------- Symbol

Symbol::Symbol(const Grid& grid,
               const std::function<double(double, double)>& fn)
    : grid_(grid), values_(grid.spectral_size()) {
  const int h = grid.half_nx();
  const auto kx = grid.kx();
  const auto ky = grid.ky();
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < h; ++i) {
      const double v = fn(kx[i], ky[j]);
      if (!std::isfinite(v)) {
        throw InvalidArgument("Symbol: non-finite value at a Fourier mode");
      }
      values_[static_cast<std::size_t>(j) * h + i] = v;
    }
  }
}

Symbol Symbol::constant(const Grid& grid, double value) {
  return Symbol(grid, [value](double, double) { return value; });
}

double Symbol::min() const noexcept {
  return *std::min_element(values_.begin(), values_.end());
}

Symbol laplacian_symbol(const Grid& grid) {
  return Symbol(grid, [](double kx, double ky) { return -(kx * kx + ky * ky); });
}

// ---------------------------------------------------------- operations

Spectrum forward(const Field& f) {
  Spectrum out(f.grid().spectral_size());
  f.grid().forward(f.values(), out);
  return out;
}

Field inverse(const Grid& grid, std::span<const Complex> spectrum) {
  Field f(grid);
  grid.inverse(spectrum, f.values());
  return f;
}

double inner_product(const Field& f, const Field& g) {
  require_same_grid(f.grid(), g.grid(), "inner_product");
  double s = 0.0;
  const auto a = f.values();
  const auto b = g.values();
  for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
  return s * f.grid().cell_area();
}

double spectral_quadratic(const Grid& grid, std::span<const Complex> spectrum,
                          const Symbol& s) {
  require_same_grid(grid, s.grid(), "spectral_quadratic");
  const int h = grid.half_nx();
  double sum = 0.0;
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < h; ++i) {
      const std::size_t n = static_cast<std::size_t>(j) * h + i;
      sum += grid.column_multiplicity(i) * s[n] * std::norm(spectrum[n]);
    }
  }
  return sum * grid.cell_area() / static_cast<double>(grid.size());
}

Field apply_symbol(const Field& f, const Symbol& s) {
  require_same_grid(f.grid(), s.grid(), "apply_symbol");
  Spectrum hat = forward(f);
  for (std::size_t n = 0; n < hat.size(); ++n) hat[n] *= s[n];
  Field out = inverse(f.grid(), hat);
  if (!out.all_finite()) {
    throw EnergyOverflowError("apply_symbol: non-finite output");
  }
  return out;
}

void solve_shifted_spectral(double alpha, double dt, const Symbol& g,
                            const Symbol& l, std::span<Complex> rhs_hat) {
  require_same_grid(g.grid(), l.grid(), "solve_shifted");
  const Grid& grid = g.grid();
  if (rhs_hat.size() != grid.spectral_size()) {
    throw InvalidArgument("solve_shifted: spectrum size mismatch");
  }
  const int h = grid.half_nx();
  for (std::size_t n = 0; n < rhs_hat.size(); ++n) {
    const double denom = alpha + dt * g[n] * l[n];
    if (denom == 0.0 || !std::isfinite(denom)) {
      std::ostringstream os;
      os << "solve_shifted: singular operator at mode (kx index " << n % h
         << ", ky index " << n / h << "), denominator " << denom;
      throw SingularOperatorError(os.str());
    }
    rhs_hat[n] /= denom;
  }
}

Field solve_shifted(double alpha, double dt, const Symbol& g, const Symbol& l,
                    const Field& rhs) {
  require_same_grid(rhs.grid(), g.grid(), "solve_shifted");
  Spectrum hat = forward(rhs);
  solve_shifted_spectral(alpha, dt, g, l, hat);
  return inverse(rhs.grid(), hat);
}

double dissipation_quadratic(const Field& mu, const Symbol& g) {
  require_same_grid(mu.grid(), g.grid(), "dissipation_quadratic");
  const double q = spectral_quadratic(mu.grid(), forward(mu), g);
  if (!std::isfinite(q)) throw EnergyOverflowError("dissipation_quadratic: non-finite result");
  if (q >= 0.0) return q;
  const double tol = 1e-12 * inner_product(mu, mu);
  if (q >= -tol) return 0.0;
  throw InvalidArgument(
      "dissipation_quadratic: negative quadratic form, mobility symbol is not "
      "non-negative");
}

void truncate_two_thirds(const Grid& grid, std::span<Complex> spectrum) {
  const int h = grid.half_nx();
  const int nx = grid.nx();
  const int ny = grid.ny();
  for (int j = 0; j < ny; ++j) {
    const int jj = j <= ny / 2 ? j : ny - j;
    for (int i = 0; i < h; ++i) {
      if (3 * i > nx || 3 * jj > ny) {
        spectrum[static_cast<std::size_t>(j) * h + i] = 0.0;
      }
    }
  }
}

}  // namespace esav
