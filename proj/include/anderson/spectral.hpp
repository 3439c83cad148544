#pragma once

// Periodic box [-L/2, L/2)^2 sampled at x_i = -L/2 + i h, h = L/M.
//
// Fourier convention (used everywhere): unitary coefficients
//   f(x) = (1/L) sum_k fhat_k e^{i k.x},   k in (2 pi / L) Z^2,
// so ||f||_{L^2} = ||fhat||_{l^2} and the Laplacian has symbol -|k|^2.
// Frequency arrays are stored in FFT order; index a maps to wavenumber
// a for a < M/2 and a - M otherwise.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

#include <fftw3.h>

namespace anderson {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) {}
  T* allocate(std::size_t n) {
    void* p = fftw_malloc(n * sizeof(T));
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) { fftw_free(p); }
  template <class U>
  bool operator==(const FftwAllocator<U>&) const { return true; }
  template <class U>
  bool operator!=(const FftwAllocator<U>&) const { return false; }
};

using CVec = std::vector<cplx, FftwAllocator<cplx>>;

struct GridSpec {
  double L = 8.0;
  int M = 64;

  GridSpec() = default;
  GridSpec(double box_length, int points);

  double h() const { return L / M; }
  double dk() const { return 2.0 * kPi / L; }
  std::size_t size() const { return static_cast<std::size_t>(M) * M; }
  int wavenumber(int a) const { return a < M / 2 ? a : a - M; }
  double x(int i) const { return -0.5 * L + i * h(); }
  // symmetric band |a|,|b| <= M/2 - 1 (Nyquist lines excluded)
  bool in_band(int a, int b) const;
  // largest |k| on the lattice (Nyquist corner)
  double kmax() const { return dk() * (M / 2) * std::sqrt(2.0); }
  // padded size for dealiased quadratic products
  int padded() const;

  bool operator==(const GridSpec& o) const { return L == o.L && M == o.M; }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

enum class Rep { space, frequency };

class Field {
 public:
  Field() = default;
  Field(const GridSpec& g, Rep r);
  Field(const GridSpec& g, Rep r, CVec values);

  static Field from_function(const GridSpec& g,
                             const std::function<cplx(double, double)>& fn);

  const GridSpec& grid() const { return grid_; }
  Rep rep() const { return rep_; }
  bool empty() const { return v_.empty(); }
  std::size_t size() const { return v_.size(); }

  CVec& data() { return v_; }
  const CVec& data() const { return v_; }
  cplx& operator[](std::size_t n) { return v_[n]; }
  const cplx& operator[](std::size_t n) const { return v_[n]; }
  cplx& at(int i, int j) { return v_[static_cast<std::size_t>(i) * grid_.M + j]; }
  const cplx& at(int i, int j) const { return v_[static_cast<std::size_t>(i) * grid_.M + j]; }

  // mixed representations: the right operand is converted to ours
  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(cplx s);
  Field& axpy(cplx a, const Field& x);  // this += a x

  Field real_part() const;
  double max_imag() const;

 private:
  GridSpec grid_;
  Rep rep_ = Rep::space;
  CVec v_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx s, Field a);
Field operator-(Field a);

void require_same_grid(const Field& a, const Field& b, const char* what);

// raw 2D FFTs on M x M contiguous data (unnormalized, sign -1 forward)
void fft2_inplace(cplx* data, int M, int sign);

Field transform(const Field& f);
Field inverse_transform(const Field& f);
Field to_space(const Field& f);
Field to_frequency(const Field& f);

// symbols are evaluated at the physical wavevector (kx, ky)
using Multiplier = std::function<cplx(double, double)>;

Field apply_multiplier(const Field& f, const Multiplier& m);
// real symbol stored in FFT order, length M^2
Field apply_symbol(const Field& f, const std::vector<double>& sym);
std::vector<double> radial_symbol(const GridSpec& g, const std::function<double(double)>& m);

Field laplacian(const Field& f);
std::array<Field, 2> gradient(const Field& f);
Field bessel_inverse(const Field& f);       // (1 - Delta)^{-1}
Field bessel_potential(const Field& f, double s);  // (1 - Delta)^{s/2}
Field project_band(const Field& f);          // frequency result on the band

// frequency-side embedding into a finer lattice and truncation back
Field pad(const Field& f, int P);
Field truncate(const Field& F, const GridSpec& g);

// dealiased product: exact product of the band projections, truncated to band
Field product(const Field& f, const Field& g);
// collocation product on the grid (space result)
Field pointwise_product(const Field& f, const Field& g);

// <f, g> = int f conj(g)
cplx inner(const Field& f, const Field& g);
double norm_l2(const Field& f);
double norm_lp(const Field& f, double p);
double norm_sup(const Field& f);
double sobolev_norm(const Field& f, double s);  // ||(1 - Delta)^{s/2} f||_{L^2}

struct WeightProfile {
  double delta = 0.0;
  Field values;  // <x>^delta, space representation, real
  WeightProfile(const GridSpec& g, double delta);
};

Field japanese_bracket(const GridSpec& g, double delta);
Field radius_squared(const GridSpec& g);

// ||<x>^delta f|| with smoothness s (p = 2) or plain L^p (s = 0)
double weighted_norm(const Field& f, double p, double s, double delta);

// mask of the evaluation window |x| <= radius (space, 0/1)
std::vector<char> window_mask(const GridSpec& g, double radius);

}  // namespace anderson
