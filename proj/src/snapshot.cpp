#include "nsalpha/snapshot.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace nsalpha {

namespace {

constexpr std::array<char, 4> kMagic{'N', 'S', 'A', '3'};

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get(std::istream& in) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), bytes.size())) throw SnapshotError("snapshot: truncated stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_snapshot(std::ostream& out, const PhysicalField& field) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kSnapshotVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.grid.modes_per_axis));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(field.size()));
  for (int n = 0; n < field.size(); ++n)
    for (int c = 0; c < 3; ++c) put<double>(out, field.values(c, n));
  if (!out) throw SnapshotError("snapshot: write failed");
}

PhysicalField read_snapshot(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw SnapshotError("snapshot: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != kSnapshotVersion) throw SnapshotError("snapshot: unsupported version " + std::to_string(version));
  const auto m = get<std::uint32_t>(in);
  const auto count = get<std::uint64_t>(in);
  GridSpec grid{static_cast<int>(m)};
  validate(grid);
  if (count != static_cast<std::uint64_t>(grid.size())) throw SnapshotError("snapshot: sample count does not match M^3");
  PhysicalField field(grid);
  for (int n = 0; n < grid.size(); ++n)
    for (int c = 0; c < 3; ++c) field.values(c, n) = get<double>(in);
  return field;
}

void write_snapshot(const std::filesystem::path& path, const PhysicalField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SnapshotError("snapshot: cannot open " + path.string());
  write_snapshot(out, field);
}

PhysicalField read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("snapshot: cannot open " + path.string());
  return read_snapshot(in);
}

}  // namespace nsalpha
