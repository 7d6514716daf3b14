#include "fhd/snapshot.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "fhd/errors.hpp"

namespace fhd {

std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf, end);
}

double parse_number(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw Error("not a number: '" + std::string(text) + "'");
  return v;
}

namespace {

template <typename T>
T parse_integer(const std::string& s) {
  T v{};
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) throw Error("not an integer: '" + s + "'");
  return v;
}

}  // namespace

void write_snapshot(std::ostream& out, const Snapshot& s) {
  const auto& c = s.cloud;
  out << "# step time N L h dx0 surface_count next_id\n";
  out << s.step << ' ' << format_number(s.time) << ' ' << c.size() << ' '
      << format_number(c.box.length()) << ' ' << format_number(c.h) << ' '
      << format_number(c.dx0) << ' ' << c.surface_count << ' ' << c.next_id << '\n';
  out << "# kind x y z u v w p id\n";
  for (const auto& p : c.points) {
    out << static_cast<int>(p.kind);
    for (int k = 0; k < 3; ++k) out << ' ' << format_number(p.position[k]);
    for (int k = 0; k < 3; ++k) out << ' ' << format_number(p.velocity[k]);
    out << ' ' << format_number(p.pressure) << ' ' << p.id << '\n';
  }
}

Snapshot read_snapshot(std::istream& in) {
  std::string line;
  auto next_data_line = [&]() {
    while (std::getline(in, line))
      if (!line.empty() && line[0] != '#') return true;
    return false;
  };
  if (!next_data_line()) throw Error("snapshot: missing header");
  std::istringstream head(line);
  std::string step, time, n, length, h, dx0, surface, next_id;
  if (!(head >> step >> time >> n >> length >> h >> dx0 >> surface >> next_id))
    throw Error("snapshot: malformed header");

  Snapshot s;
  s.step = parse_integer<std::uint64_t>(step);
  s.time = parse_number(time);
  auto& c = s.cloud;
  c.box = PeriodicBox(parse_number(length));
  c.h = parse_number(h);
  c.dx0 = parse_number(dx0);
  c.surface_count = parse_integer<std::size_t>(surface);
  c.next_id = parse_integer<std::uint64_t>(next_id);
  const auto count = parse_integer<std::size_t>(n);
  c.points.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!next_data_line()) throw Error("snapshot: truncated at record " + std::to_string(i));
    std::istringstream rec(line);
    std::string f[9];
    for (auto& x : f)
      if (!(rec >> x)) throw Error("snapshot: malformed record " + std::to_string(i));
    auto& p = c.points[i];
    p.kind = static_cast<PointKind>(parse_integer<int>(f[0]));
    for (int k = 0; k < 3; ++k) p.position[k] = parse_number(f[1 + k]);
    for (int k = 0; k < 3; ++k) p.velocity[k] = parse_number(f[4 + k]);
    p.pressure = parse_number(f[7]);
    p.id = parse_integer<std::uint64_t>(f[8]);
  }
  return s;
}

void save_snapshot(const std::string& path, const Snapshot& snapshot) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_snapshot(out, snapshot);
  if (!out) throw Error("write failed: " + path);
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  return read_snapshot(in);
}

}  // namespace fhd
