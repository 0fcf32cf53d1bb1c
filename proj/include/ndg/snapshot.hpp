#pragma once

#include <string>

#include "ndg/spectral_field.hpp"

namespace ndg {

/// NDG2 field snapshots: "NDG2", u32 version, u32 n, f64 L, then the full
/// n x n wavevector grid (k1 rows, k2 columns, both in FFT order) as
/// (re u1, im u1, re u2, im u2) f64 quadruples. Little-endian throughout.
inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_snapshot(const std::string& path, const SpectralField& u);
SpectralField read_snapshot(const std::string& path, double dealias_fraction = 2.0 / 3.0);

}  // namespace ndg
