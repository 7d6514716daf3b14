#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "fhd/point_cloud.hpp"

namespace fhd {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);
double parse_number(std::string_view text);

struct Snapshot {
  std::uint64_t step = 0;
  double time = 0.0;
  PointCloud cloud;
};

/// Columnar text: a header line (step, time, N, L, h, dx0, surface count,
/// next id) followed by one record per point
/// (kind, x, y, z, u, v, w, p, id). Reading back is bit-exact.
void write_snapshot(std::ostream& out, const Snapshot& snapshot);
Snapshot read_snapshot(std::istream& in);

void save_snapshot(const std::string& path, const Snapshot& snapshot);
Snapshot load_snapshot(const std::string& path);

}  // namespace fhd
