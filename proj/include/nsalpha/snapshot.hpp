#pragma once

#include "nsalpha/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>

namespace nsalpha {

/// Binary field snapshot:
///   "NSA3" | u32 version | u32 M | u64 sample count (M^3) | f64 samples,
/// all little-endian, samples x-fastest with the 3 components interleaved.
inline constexpr std::uint32_t kSnapshotVersion = 1;

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_snapshot(std::ostream& out, const PhysicalField& field);
PhysicalField read_snapshot(std::istream& in);

void write_snapshot(const std::filesystem::path& path, const PhysicalField& field);
PhysicalField read_snapshot(const std::filesystem::path& path);

}  // namespace nsalpha
