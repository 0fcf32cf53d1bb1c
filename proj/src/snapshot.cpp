#include "ndg/snapshot.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <tuple>
#include <vector>

#include "ndg/errors.hpp"

namespace ndg {
namespace {

static_assert(std::endian::native == std::endian::little, "NDG2 I/O assumes a little-endian host");

template <class T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& is, const std::string& path) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw InputError("snapshot: truncated file " + path);
  return v;
}

}  // namespace

void write_snapshot(const std::string& path, const SpectralField& u) {
  const Grid& g = *u.grid();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("snapshot: cannot open " + path + " for writing");
  os.write("NDG2", 4);
  put<std::uint32_t>(os, kSnapshotVersion);
  put<std::uint32_t>(os, std::uint32_t(g.n()));
  put<double>(os, g.length());
  const int n = g.n();
  std::vector<double> row(4 * std::size_t(n));
  for (int i = 0; i < n; ++i) {
    const int a = i < n / 2 ? i : i - n;
    for (int j = 0; j < n; ++j) {
      const int b = j < n / 2 ? j : j - n;
      cplx v1, v2;
      if (i != n / 2 && j != n / 2) std::tie(v1, v2) = u.mode(a, b);
      row[4 * j + 0] = v1.real();
      row[4 * j + 1] = v1.imag();
      row[4 * j + 2] = v2.real();
      row[4 * j + 3] = v2.imag();
    }
    os.write(reinterpret_cast<const char*>(row.data()), std::streamsize(row.size() * sizeof(double)));
  }
  if (!os) throw InputError("snapshot: write failed for " + path);
}

SpectralField read_snapshot(const std::string& path, double dealias_fraction) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("snapshot: cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "NDG2", 4) != 0) throw InputError("snapshot: bad magic in " + path);
  const auto version = get<std::uint32_t>(is, path);
  if (version != kSnapshotVersion) throw InputError("snapshot: unsupported version " + std::to_string(version));
  const auto n = get<std::uint32_t>(is, path);
  const auto length = get<double>(is, path);
  GridSpec spec{int(n), length, dealias_fraction};
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("snapshot: ") + e.what());
  }
  auto grid = Grid::get(spec);
  const int ni = int(n);
  std::vector<double> all(4 * std::size_t(ni) * ni);
  if (!is.read(reinterpret_cast<char*>(all.data()), std::streamsize(all.size() * sizeof(double))))
    throw InputError("snapshot: truncated payload in " + path);
  auto at = [&](int a, int b, int c) {
    const int i = a < 0 ? a + ni : a, j = b < 0 ? b + ni : b;
    const std::size_t o = 4 * (std::size_t(i) * ni + j) + 2 * c;
    return cplx{all[o], all[o + 1]};
  };
  SpectralField u(grid);
  double scale = 0.0, mismatch = 0.0;
  for (std::size_t s = 0; s < grid->slots(); ++s) {
    if (grid->is_nyquist(s)) continue;
    const int a = grid->k1(s), b = grid->k2(s);
    for (int c = 0; c < 2; ++c) {
      const cplx v = at(a, b, c), w = at(-a, -b, c);
      u.comp(c)[s] = v;
      scale = std::max(scale, std::abs(v));
      mismatch = std::max(mismatch, std::abs(v - std::conj(w)));
    }
  }
  if (mismatch > 1e-12 * std::max(1.0, scale)) throw InputError("snapshot: payload is not Hermitian in " + path);
  return u;
}

}  // namespace ndg
