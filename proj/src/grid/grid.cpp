#include "slab/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "slab/error.hpp"

namespace slab::grid {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t ipow(int base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

// FFTW planning is not thread-safe; plans are created once per shape and
// reused through the new-array execute interface.
fftw_plan plan_for(int n, int N, int sign) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_tuple(n, N, sign);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  std::vector<int> dims(n, N);
  const std::size_t total = ipow(N, n);
  auto* buffer = fftw_alloc_complex(total);
  fftw_plan plan = fftw_plan_dft(n, dims.data(), buffer, buffer, sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buffer);
  plans.emplace(key, plan);
  return plan;
}

void run_fft(CVec& data, const Grid& g, int sign) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_for(g.n, g.N, sign), ptr, ptr);
}

// Multiplies every sample by prod_a f[i_a].
void apply_axis_factors(CVec& values, const Grid& g, const std::vector<Complex>& f) {
  const std::size_t total = values.size();
  for (int a = 0; a < g.n; ++a) {
    const std::size_t stride = ipow(g.N, g.n - 1 - a);
    for (std::size_t flat = 0; flat < total; ++flat) {
      values[static_cast<Eigen::Index>(flat)] *= f[(flat / stride) % g.N];
    }
  }
}

std::vector<Complex> alternating(int N) {
  std::vector<Complex> f(N);
  for (int j = 0; j < N; ++j) f[j] = (j % 2 == 0) ? 1.0 : -1.0;
  return f;
}

// (-1)^k exp(sign 2 pi i s k / N) with k = idx - N/2.
std::vector<Complex> spectral_phase(const Grid& g, double sign) {
  const double s = g.offset ? 0.5 : 0.0;
  std::vector<Complex> f(g.N);
  for (int idx = 0; idx < g.N; ++idx) {
    const int k = idx - g.N / 2;
    const double parity = (k % 2 == 0) ? 1.0 : -1.0;
    f[idx] = parity * std::polar(1.0, sign * 2.0 * kPi * s * k / g.N);
  }
  return f;
}

using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Contracts row-major data of shape N^n with per-axis vectors E_a(:, p).
CVec contract(const CVec& data, int n, int N, const std::vector<Eigen::MatrixXcd>& e) {
  const Eigen::Index points = e[0].cols();
  const Eigen::Index rows = static_cast<Eigen::Index>(ipow(N, n - 1));
  Eigen::Map<const RowMajor> m(data.data(), rows, N);
  const Eigen::MatrixXcd partial = m * e[n - 1];
  CVec out(points);
  for (Eigen::Index p = 0; p < points; ++p) {
    CVec v = partial.col(p);
    for (int a = n - 2; a >= 0; --a) {
      const Eigen::Index r = static_cast<Eigen::Index>(ipow(N, a));
      Eigen::Map<const RowMajor> block(v.data(), r, N);
      CVec next = block * e[a].col(p);
      v = std::move(next);
    }
    out[p] = v[0];
  }
  return out;
}

void check_points(const std::vector<Vec>& pts, int n, const char* where) {
  for (const auto& p : pts) {
    if (p.size() != n) throw Error(ErrorCode::InvalidSize, std::string(where) + ": bad point size");
  }
}

}  // namespace

double Grid::dxi() const { return kPi / L; }
double Grid::nyquist() const { return kPi * N / (2.0 * L); }
std::size_t Grid::size() const { return ipow(N, n); }
double Grid::xi(int idx) const { return kPi * (idx - N / 2) / L; }

std::vector<int> Grid::unflatten(std::size_t flat) const {
  std::vector<int> idx(n);
  for (int a = n - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % N);
    flat /= N;
  }
  return idx;
}

Vec Grid::point(std::size_t flat) const {
  Vec v(n);
  for (int a = n - 1; a >= 0; --a) {
    v[a] = x(static_cast<int>(flat % N));
    flat /= N;
  }
  return v;
}

Vec Grid::frequency(std::size_t flat) const {
  Vec v(n);
  for (int a = n - 1; a >= 0; --a) {
    v[a] = xi(static_cast<int>(flat % N));
    flat /= N;
  }
  return v;
}

Grid make_grid(int n, int N, double L, bool offset) {
  if (n < 1 || n > 3) throw Error(ErrorCode::InvalidSize, "make_grid: n must be 1, 2 or 3");
  if (N < 2 || (N & (N - 1)) != 0) {
    throw Error(ErrorCode::InvalidSize, "make_grid: N must be a power of two, got " + std::to_string(N));
  }
  if (!(L > 0.0) || !std::isfinite(L)) throw Error(ErrorCode::InvalidSize, "make_grid: L must be positive");
  return Grid{n, N, L, offset};
}

Field zeros(const Grid& g) { return Field{g, CVec::Zero(static_cast<Eigen::Index>(g.size()))}; }

Field sample(const Grid& g, const std::function<Complex(const Vec&)>& f) {
  Field u = zeros(g);
  for (std::size_t i = 0; i < g.size(); ++i) u.values[static_cast<Eigen::Index>(i)] = f(g.point(i));
  return u;
}

Spectrum sample_spectrum(const Grid& g, const std::function<Complex(const Vec&)>& f) {
  Spectrum s{g, CVec(static_cast<Eigen::Index>(g.size()))};
  for (std::size_t i = 0; i < g.size(); ++i) s.values[static_cast<Eigen::Index>(i)] = f(g.frequency(i));
  return s;
}

Spectrum transform(const Field& u) {
  const Grid& g = u.grid;
  CVec data = u.values;
  apply_axis_factors(data, g, alternating(g.N));
  run_fft(data, g, FFTW_FORWARD);
  apply_axis_factors(data, g, spectral_phase(g, -1.0));
  data *= std::pow(g.h(), g.n);
  return Spectrum{g, std::move(data)};
}

Field inverse_transform(const Spectrum& s) {
  const Grid& g = s.grid;
  CVec data = s.values;
  apply_axis_factors(data, g, spectral_phase(g, 1.0));
  run_fft(data, g, FFTW_BACKWARD);
  apply_axis_factors(data, g, alternating(g.N));
  data *= std::pow(1.0 / (2.0 * g.L), g.n);
  return Field{g, std::move(data)};
}

double norm(const Field& u) { return std::sqrt(std::pow(u.grid.h(), u.grid.n)) * u.values.norm(); }

double norm(const Spectrum& s) {
  return std::sqrt(std::pow(1.0 / (2.0 * s.grid.L), s.grid.n)) * s.values.norm();
}

Complex inner(const Field& u, const Field& v) {
  if (!(u.grid == v.grid)) throw Error(ErrorCode::InvalidSize, "inner: grids differ");
  return std::pow(u.grid.h(), u.grid.n) * v.values.dot(u.values);
}

double weighted_norm(const Field& u, double m) {
  const Grid& g = u.grid;
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = std::pow(1.0 + g.point(i).squaredNorm(), 0.5 * m);
    acc += std::norm(w * u.values[static_cast<Eigen::Index>(i)]);
  }
  return std::sqrt(std::pow(g.h(), g.n) * acc);
}

Field sample_singular(const Grid& g, double s) {
  if (s < 0.0 && !g.offset) {
    throw Error(ErrorCode::SingularAtOrigin, "sample_singular: negative power needs an offset grid");
  }
  if (s == 0.0) return Field{g, CVec::Ones(static_cast<Eigen::Index>(g.size()))};
  return sample(g, [s](const Vec& x) -> Complex { return std::pow(x.norm(), s); });
}

double mass_fraction(const Field& u, double radius) {
  const Grid& g = u.grid;
  double inside = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = std::norm(u.values[static_cast<Eigen::Index>(i)]);
    total += w;
    if (g.point(i).norm() <= radius) inside += w;
  }
  return total > 0.0 ? inside / total : 1.0;
}

double spectral_mass_fraction(const Spectrum& s, const std::function<double(const Vec&)>& weight) {
  const Grid& g = s.grid;
  double part = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = std::norm(s.values[static_cast<Eigen::Index>(i)]);
    const double c = weight(g.frequency(i));
    total += w;
    part += c * c * w;
  }
  return total > 0.0 ? part / total : 0.0;
}

CVec spectrum_at(const Field& u, const std::vector<Vec>& frequencies) {
  const Grid& g = u.grid;
  if (frequencies.empty()) return CVec(0);
  check_points(frequencies, g.n, "spectrum_at");
  const Eigen::Index P = static_cast<Eigen::Index>(frequencies.size());
  std::vector<Eigen::MatrixXcd> e(g.n, Eigen::MatrixXcd(g.N, P));
  for (int a = 0; a < g.n; ++a) {
    for (Eigen::Index p = 0; p < P; ++p) {
      for (int j = 0; j < g.N; ++j) e[a](j, p) = std::polar(1.0, -g.x(j) * frequencies[p][a]);
    }
  }
  return std::pow(g.h(), g.n) * contract(u.values, g.n, g.N, e);
}

CVec field_at(const Spectrum& s, const std::vector<Vec>& points) {
  const Grid& g = s.grid;
  if (points.empty()) return CVec(0);
  check_points(points, g.n, "field_at");
  const Eigen::Index P = static_cast<Eigen::Index>(points.size());
  std::vector<Eigen::MatrixXcd> e(g.n, Eigen::MatrixXcd(g.N, P));
  for (int a = 0; a < g.n; ++a) {
    for (Eigen::Index p = 0; p < P; ++p) {
      for (int k = 0; k < g.N; ++k) e[a](k, p) = std::polar(1.0, g.xi(k) * points[p][a]);
    }
  }
  return std::pow(1.0 / (2.0 * g.L), g.n) * contract(s.values, g.n, g.N, e);
}

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double Profile::operator()(double r) const {
  double v = 1.0;
  if (b > a) {
    v *= smooth_step((r - a) / (b - a));
  } else if (r < a) {
    v = 0.0;
  }
  if (std::isfinite(c)) {
    if (d > c) {
      v *= 1.0 - smooth_step((r - c) / (d - c));
    } else if (r > c) {
      v = 0.0;
    }
  }
  return v;
}

double Cutoff::operator()(const Vec& v) const {
  switch (kind) {
    case Kind::RadialBump: return radial((v - center).norm());
    case Kind::Annular: return radial(v.norm());
    case Kind::Conic: {
      const double r = v.norm();
      if (r == 0.0) return 0.0;
      const double cosang = std::clamp(v.dot(axis) / (r * axis.norm()), -1.0, 1.0);
      const double ang = std::acos(cosang);
      double angular = 1.0;
      if (ang >= support_angle) {
        angular = 0.0;
      } else if (ang > core_angle) {
        angular = 1.0 - smooth_step((ang - core_angle) / (support_angle - core_angle));
      }
      return angular * radial(r);
    }
    case Kind::ScalarProfile: return radial(v.norm());
  }
  return 0.0;
}

Cutoff radial_bump(const Vec& center, double core, double support) {
  Cutoff c;
  c.kind = Cutoff::Kind::RadialBump;
  c.center = center;
  c.radial = Profile{-2.0, -1.0, core, support};
  return c;
}

Cutoff annular(double a, double b, double c_, double d) {
  Cutoff c;
  c.kind = Cutoff::Kind::Annular;
  c.radial = Profile{a, b, c_, d};
  return c;
}

Cutoff conic(const Vec& axis, double core_angle, double support_angle, double a, double b,
             double c_, double d) {
  Cutoff c = annular(a, b, c_, d);
  c.kind = Cutoff::Kind::Conic;
  c.axis = axis;
  c.core_angle = core_angle;
  c.support_angle = support_angle;
  return c;
}

Cutoff scalar_profile(double a, double b, double c_, double d) {
  Cutoff c = annular(a, b, c_, d);
  c.kind = Cutoff::Kind::ScalarProfile;
  return c;
}

double default_xi_min(const Grid& g) { return 2.0 * g.dxi(); }

Cutoff low_frequency_cutoff(double xi_min) {
  const double inf = std::numeric_limits<double>::infinity();
  return annular(xi_min, 2.0 * xi_min, inf, inf);
}

}  // namespace slab::grid
