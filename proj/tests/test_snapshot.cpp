#include "doctest.h"

#include "nsalpha/snapshot.hpp"
#include "nsalpha/spectral.hpp"

#include <cstring>
#include <sstream>

using namespace nsalpha;

TEST_CASE("snapshot round trip is bit exact") {
  const GridSpec g{8};
  const PhysicalField f = sample_field(g, [](const Vec3& x) {
    return Vec3(std::sin(x(0)) / 3.0, std::cos(x(1) + x(2)), 1e-300 * x(2));
  });
  std::stringstream buf;
  write_snapshot(buf, f);
  const PhysicalField back = read_snapshot(buf);
  CHECK(back.grid.modes_per_axis == 8);
  CHECK((back.values.array() == f.values.array()).all());
}

TEST_CASE("snapshot byte layout") {
  const GridSpec g{4};
  PhysicalField f(g);
  f.values(0, 0) = 1.5;
  f.values(2, 1) = -2.0;
  std::stringstream buf;
  write_snapshot(buf, f);
  const std::string bytes = buf.str();
  REQUIRE(bytes.size() == 4 + 4 + 4 + 8 + 8 * 3 * 64);
  CHECK(bytes.substr(0, 4) == "NSA3");
  std::uint32_t version = 0, m = 0;
  std::uint64_t count = 0;
  std::memcpy(&version, bytes.data() + 4, 4);
  std::memcpy(&m, bytes.data() + 8, 4);
  std::memcpy(&count, bytes.data() + 12, 8);
  CHECK(version == 1u);
  CHECK(m == 4u);
  CHECK(count == 64u);
  double first = 0.0, node1_z = 0.0;
  std::memcpy(&first, bytes.data() + 20, 8);
  std::memcpy(&node1_z, bytes.data() + 20 + 8 * 5, 8);
  CHECK(first == 1.5);
  CHECK(node1_z == -2.0);
}

TEST_CASE("corrupt snapshots are rejected") {
  std::stringstream bad("NSA4xxxxxxxxxxxxxxxx");
  CHECK_THROWS_AS(read_snapshot(bad), SnapshotError);
  std::stringstream buf;
  write_snapshot(buf, PhysicalField(GridSpec{4}));
  std::stringstream truncated(buf.str().substr(0, 100));
  CHECK_THROWS_AS(read_snapshot(truncated), SnapshotError);
}
