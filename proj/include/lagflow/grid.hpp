#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace lagflow {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

namespace detail {
// The FFTW planner is not reentrant; plan execution on new arrays is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Periodic n x n grid on [0, 2pi)^2 together with its real-to-complex
/// transform plans.
///
/// Physical samples are stored row-major with the x index fastest:
/// sample (i, j) sits at offset j*n + i and has coordinates
/// (2 pi i / n, 2 pi j / n). Spectral coefficients use the half-plane layout
/// of a real transform: row r carries k2 = r (r < n/2) or r - n, column c
/// carries k1 = c for 0 <= c <= n/2. Coefficients are Fourier-series
/// coefficients, u(x) = sum_k uhat_k exp(i k.x).
class Grid {
 public:
  explicit Grid(int n) : n_(n) {
    if (n < 8 || n % 2 != 0) {
      throw std::invalid_argument("grid size n must be even and >= 8, got " + std::to_string(n));
    }
    std::vector<double> phys(physical_size());
    std::vector<Complex> spec(spectral_size());
    auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_ = fftw_plan_dft_r2c_2d(n, n, phys.data(), cplx, FFTW_ESTIMATE | FFTW_UNALIGNED);
    inverse_ = fftw_plan_dft_c2r_2d(n, n, cplx, phys.data(),
                                    FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT);
  }

  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  ~Grid() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  int n() const { return n_; }
  int spectral_cols() const { return n_ / 2 + 1; }
  std::size_t physical_size() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t spectral_size() const { return static_cast<std::size_t>(n_) * spectral_cols(); }
  double length() const { return kTwoPi; }
  double spacing() const { return kTwoPi / n_; }
  double node(int i) const { return spacing() * i; }

  std::size_t physical_index(int i, int j) const { return static_cast<std::size_t>(j) * n_ + i; }
  std::size_t spectral_index(int row, int col) const {
    return static_cast<std::size_t>(row) * spectral_cols() + col;
  }

  int k1(int col) const { return col; }
  int k2(int row) const { return row < n_ / 2 ? row : row - n_; }
  int row_of(int k2) const { return k2 >= 0 ? k2 : k2 + n_; }

  /// Wavenumber used for odd derivatives: zero on the Nyquist line, where a
  /// real field has no resolvable first derivative.
  double d1(int col) const { return col == n_ / 2 ? 0.0 : static_cast<double>(col); }
  double d2(int row) const { return row == n_ / 2 ? 0.0 : static_cast<double>(k2(row)); }

  double k_squared(int row, int col) const {
    const double a = k1(col);
    const double b = k2(row);
    return a * a + b * b;
  }

  /// 2/3-rule: a mode survives when 3|k_i| < n on both axes.
  bool retained(int row, int col) const {
    return 3 * std::abs(k1(col)) < n_ && 3 * std::abs(k2(row)) < n_;
  }

  /// Number of full-plane modes each stored half-plane coefficient stands for.
  double multiplicity(int col) const { return (col == 0 || col == n_ / 2) ? 1.0 : 2.0; }

  /// Forward transform normalised to Fourier-series coefficients.
  void forward(const double* in, Complex* out) const {
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
    const double scale = 1.0 / static_cast<double>(physical_size());
    for (std::size_t i = 0; i < spectral_size(); ++i) out[i] *= scale;
  }

  void inverse(const Complex* in, double* out) const {
    std::vector<Complex> scratch(in, in + spectral_size());
    fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(scratch.data()), out);
  }

 private:
  int n_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(int n) { return std::make_shared<const Grid>(n); }

}  // namespace lagflow
