#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "json.hpp"

#include "slab/error.hpp"
#include "slab/grid.hpp"

namespace slab::grid {

namespace {

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

void put_float(std::ostream& out, double value) {
  const float f = static_cast<float>(value);
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  bits = to_little(bits);
  out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

double get_float(std::istream& in) {
  std::uint32_t bits;
  in.read(reinterpret_cast<char*>(&bits), sizeof bits);
  bits = to_little(bits);
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

}  // namespace

void write_field(const std::string& path, const Field& u) {
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw Error(ErrorCode::ConfigInvalid, "write_field: cannot open " + path);
  for (Eigen::Index i = 0; i < u.values.size(); ++i) {
    put_float(bin, u.values[i].real());
    put_float(bin, u.values[i].imag());
  }
  nlohmann::json meta = {{"n", u.grid.n}, {"N", u.grid.N}, {"L", u.grid.L}, {"offset", u.grid.offset}};
  std::ofstream side(path + ".json");
  side << meta.dump(2) << '\n';
}

Field read_field(const std::string& path) {
  std::ifstream side(path + ".json");
  if (!side) throw Error(ErrorCode::ConfigInvalid, "read_field: missing sidecar for " + path);
  const nlohmann::json meta = nlohmann::json::parse(side);
  const Grid g = make_grid(meta.at("n").get<int>(), meta.at("N").get<int>(),
                           meta.at("L").get<double>(), meta.at("offset").get<bool>());
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw Error(ErrorCode::ConfigInvalid, "read_field: cannot open " + path);
  Field u = zeros(g);
  for (Eigen::Index i = 0; i < u.values.size(); ++i) {
    const double re = get_float(bin);
    const double im = get_float(bin);
    u.values[i] = Complex(re, im);
  }
  if (!bin) throw Error(ErrorCode::InvalidSize, "read_field: file shorter than the grid in " + path);
  return u;
}

void write_slice_csv(const std::string& path, const Field& u, int axis) {
  const Grid& g = u.grid;
  if (axis < 0 || axis >= g.n) throw Error(ErrorCode::InvalidSize, "write_slice_csv: bad axis");
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigInvalid, "write_slice_csv: cannot open " + path);
  out << "x,re,im\n" << std::setprecision(17);
  std::size_t base = 0;
  std::size_t stride = 1;
  for (int a = g.n - 1; a >= 0; --a) {
    if (a != axis) base += stride * static_cast<std::size_t>(g.N / 2);
    if (a > axis) stride *= g.N;
  }
  stride = 1;
  for (int a = g.n - 1; a > axis; --a) stride *= g.N;
  for (int j = 0; j < g.N; ++j) {
    const Complex v = u.values[static_cast<Eigen::Index>(base + j * stride)];
    out << g.x(j) << ',' << v.real() << ',' << v.imag() << '\n';
  }
}

}  // namespace slab::grid
