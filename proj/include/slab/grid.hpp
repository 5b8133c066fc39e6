#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "slab/types.hpp"

namespace slab::grid {

using CVec = Eigen::VectorXcd;

/// Periodic box [-L, L)^n with N points per axis.
///
/// Samples sit at x_j = -L + (j + s) h with h = 2L/N and s = 1/2 on offset
/// grids, so an offset grid never samples x = 0. Frequencies are
/// xi_k = pi k / L for k in [-N/2, N/2), stored with k = -N/2 first.
struct Grid {
  int n = 1;
  int N = 2;
  double L = 1.0;
  bool offset = false;

  double h() const { return 2.0 * L / N; }
  double dxi() const;
  double nyquist() const;
  std::size_t size() const;

  /// Coordinate of sample j along any axis.
  double x(int j) const { return -L + (j + (offset ? 0.5 : 0.0)) * h(); }
  /// Frequency at storage index idx along any axis.
  double xi(int idx) const;

  Vec point(std::size_t flat) const;
  Vec frequency(std::size_t flat) const;
  /// Row-major multi-index of a flat index; axis 0 varies slowest.
  std::vector<int> unflatten(std::size_t flat) const;

  bool operator==(const Grid& o) const {
    return n == o.n && N == o.N && L == o.L && offset == o.offset;
  }
};

/// Throws InvalidSize unless N is a power of two, L > 0 and 1 <= n <= 3.
Grid make_grid(int n, int N, double L, bool offset = true);

/// Samples u(x_j) on the grid.
struct Field {
  Grid grid;
  CVec values;
};

/// Samples of the Fourier transform at the frequency lattice.
struct Spectrum {
  Grid grid;
  CVec values;
};

Field zeros(const Grid& g);
Field sample(const Grid& g, const std::function<Complex(const Vec&)>& f);
Spectrum sample_spectrum(const Grid& g, const std::function<Complex(const Vec&)>& f);

/// u^(xi_k) = h^n sum_j exp(-i x_j . xi_k) u_j.
Spectrum transform(const Field& u);
/// u_j = (2L)^{-n} sum_k exp(i x_j . xi_k) u^_k.
Field inverse_transform(const Spectrum& s);

/// L^2 quadrature norm sqrt(h^n sum |u_j|^2).
double norm(const Field& u);
/// (2 pi)^{-n/2} times the quadrature norm of the spectrum; equals norm(u).
double norm(const Spectrum& s);
/// h^n sum conj(v_j) u_j.
Complex inner(const Field& u, const Field& v);

/// Quadrature norm of <x>^m u.
double weighted_norm(const Field& u, double m);

/// Pointwise |x|^s. Throws SingularAtOrigin for s < 0 on a grid without offset.
Field sample_singular(const Grid& g, double s);

/// Share of |u|^2 inside the ball |x| <= radius.
double mass_fraction(const Field& u, double radius);
/// Share of |u^|^2 where weight(xi) != 0, weighted by weight^2.
double spectral_mass_fraction(const Spectrum& s, const std::function<double(const Vec&)>& weight);

/// Direct DFT sum u^(xi) at arbitrary frequencies: exact trigonometric
/// interpolation of the lattice spectrum.
CVec spectrum_at(const Field& u, const std::vector<Vec>& frequencies);
/// Inverse direct sum at arbitrary positions.
CVec field_at(const Spectrum& s, const std::vector<Vec>& points);

// ---------------------------------------------------------------------------
// Cutoffs.

/// C-infinity step: 0 for t <= 0, 1 for t >= 1, built from exp(-1/t).
double smooth_step(double t);

/// Smooth plateau: 0 below a, rising on [a, b], 1 on [b, c], falling on
/// [c, d], 0 above d. Infinite c and d give a one-sided step.
struct Profile {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  double operator()(double r) const;
};

struct Cutoff {
  enum class Kind { RadialBump, Annular, Conic, ScalarProfile };
  Kind kind = Kind::Annular;
  Vec center;
  /// Radial profile for bump and annular kinds, and the radial factor of conic cutoffs.
  Profile radial;
  /// Cone axis and apertures (angles to the axis) for conic cutoffs.
  Vec axis;
  double core_angle = 0.0;
  double support_angle = 0.0;

  double operator()(const Vec& v) const;
  /// Scalar-profile cutoffs act on a number, e.g. h(p(xi)).
  double operator()(double s) const { return radial(s); }
};

/// 1 on |v - c| <= core, 0 on |v - c| >= support.
Cutoff radial_bump(const Vec& center, double core, double support);
/// Plateau in |v| on [b, c], zero outside [a, d].
Cutoff annular(double a, double b, double c, double d);
/// annular(a, b, c, d) times an angular plateau around `axis`.
Cutoff conic(const Vec& axis, double core_angle, double support_angle, double a, double b,
             double c, double d);
/// Plateau on the real line.
Cutoff scalar_profile(double a, double b, double c, double d);

/// Lower edge of the low-frequency exclusion: two lattice spacings, 2 pi / L.
double default_xi_min(const Grid& g);
/// 0 on |xi| <= xi_min, rising to 1 at 2 xi_min.
Cutoff low_frequency_cutoff(double xi_min);

// ---------------------------------------------------------------------------
// Serialization.

/// Float32 little-endian complex pairs, row-major, plus `path + ".json"`
/// holding {n, N, L, offset}.
void write_field(const std::string& path, const Field& u);
Field read_field(const std::string& path);
/// One line per sample along `axis` through the grid center: x,re,im.
void write_slice_csv(const std::string& path, const Field& u, int axis = 0);

}  // namespace slab::grid
