// ======================================================================== //
// Copyright 2026 The tetvol Authors                                        //
//                                                                          //
// Licensed under the Apache License, Version 2.0 (the "License");          //
// you may not use this file except in compliance with the License.         //
// You may obtain a copy of the License at                                  //
//                                                                          //
//     http://www.apache.org/licenses/LICENSE-2.0                           //
//                                                                          //
// Unless required by applicable law or agreed to in writing, software      //
// distributed under the License is distributed on an "AS IS" BASIS,        //
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. //
// See the License for the specific language governing permissions and      //
// limitations under the License.                                           //
// ======================================================================== //

#include "support/oracles.hpp"
#include "tetvol/sampler.hpp"

#include <gtest/gtest.h>

#include <future>
#include <limits>
#include <random>
#include <sstream>

using namespace tetvol;

namespace {

  /// Hand-assembled TET1 bytes, independent of write_mesh.
  struct RawMesh {
    std::uint8_t                       centering = 0;
    std::vector<float>                 positions;
    std::vector<std::uint32_t>         indices;
    std::vector<float>                 field;
    std::uint64_t                      v_override = ~0ull, t_override = ~0ull;
    std::string                        magic = "TET1";

    std::string bytes() const
    {
      std::string s = magic;
      auto put = [&s](const auto &v) { s.append(reinterpret_cast<const char *>(&v), sizeof v); };
      put(centering);
      put(v_override != ~0ull ? v_override : std::uint64_t(positions.size() / 3));
      put(t_override != ~0ull ? t_override : std::uint64_t(indices.size() / 4));
      for (float f : positions) put(f);
      for (std::uint32_t i : indices) put(i);
      for (float f : field) put(f);
      return s;
    }
  };

  RawMesh unit_tet()
  {
    return {0, {0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 1, 2, 3}, {0, 1, 2, 3}};
  }

  TetMesh parse(const RawMesh &raw)
  {
    std::istringstream in(raw.bytes());
    return read_mesh(in);
  }

} // namespace

TEST(MeshIO, LoadsUnitTet)
{
  const TetMesh m = parse(unit_tet());
  EXPECT_EQ(m.vertices.size(), 4u);
  EXPECT_EQ(m.tets.size(), 1u);
  EXPECT_EQ(m.centering, Centering::Vertex);
  EXPECT_EQ(m.bounds, AABB({0, 0, 0}, {1, 1, 1}));
  EXPECT_EQ(m.field, (std::vector<double>{0, 1, 2, 3}));
}

TEST(MeshIO, RejectsCellFieldLengthMismatch)
{
  RawMesh raw   = unit_tet();
  raw.centering = 1; // one tet, but four field values
  EXPECT_THROW(parse(raw), MeshError);
  raw.field.clear(); // too short
  EXPECT_THROW(parse(raw), MeshError);
  raw.field = {7};
  EXPECT_EQ(parse(raw).field, std::vector<double>{7});
}

TEST(MeshIO, RejectsBadMagicAndIndices)
{
  RawMesh bad_magic = unit_tet();
  bad_magic.magic   = "TET2";
  EXPECT_THROW(parse(bad_magic), MeshError);

  RawMesh bad_index    = unit_tet();
  bad_index.indices[3] = 4;
  EXPECT_THROW(parse(bad_index), MeshError);

  RawMesh bad_centering   = unit_tet();
  bad_centering.centering = 2;
  EXPECT_THROW(parse(bad_centering), MeshError);

  RawMesh truncated    = unit_tet();
  truncated.v_override = 5;
  EXPECT_THROW(parse(truncated), MeshError);
}

TEST(MeshIO, ReportsDegenerateTetIndex)
{
  RawMesh raw = unit_tet();
  // second tet is flat: all four vertices in z = 0
  raw.positions.insert(raw.positions.end(), {1, 1, 0});
  raw.indices.insert(raw.indices.end(), {0, 1, 2, 4});
  raw.field.push_back(4);
  try {
    parse(raw);
    FAIL() << "expected MeshError";
  } catch (const MeshError &e) {
    EXPECT_NE(std::string(e.what()).find("tet 1"), std::string::npos) << e.what();
  }
}

TEST(MeshIO, RejectsNonFiniteValues)
{
  RawMesh nan_field = unit_tet();
  nan_field.field[2] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(parse(nan_field), MeshError);
  RawMesh inf_vertex      = unit_tet();
  inf_vertex.positions[4] = std::numeric_limits<float>::infinity();
  EXPECT_THROW(parse(inf_vertex), MeshError);
}

TEST(MeshIO, RoundTripsGeneratedMeshes)
{
  for (auto field : {AnalyticField::Ramp, AnalyticField::Radial, AnalyticField::Sinusoidal, AnalyticField::Void})
    for (auto centering : {Centering::Vertex, Centering::Cell})
      for (int n : {1, 3, 5}) {
        const TetMesh     m = generate_synthetic(n, field, centering);
        std::stringstream buf;
        write_mesh(buf, m);
        EXPECT_EQ(read_mesh(buf), m) << to_string(field) << " n=" << n;
      }
}

TEST(Generator, SingleCube)
{
  const TetMesh m = generate_synthetic(1, AnalyticField::Ramp, Centering::Vertex);
  EXPECT_EQ(m.vertices.size(), 8u);
  EXPECT_EQ(m.tets.size(), 5u);
  for (double f : m.field) {
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
  EXPECT_THROW(generate_synthetic(0, AnalyticField::Ramp, Centering::Vertex), MeshError);
}

TEST(Generator, TetsTileTheCube)
{
  const TetMesh m     = generate_synthetic(2, AnalyticField::Ramp, Centering::Vertex);
  double        total = 0.0;
  for (std::size_t t = 0; t < m.num_tets(); ++t) total += std::abs(m.tet_signed_volume(t));
  EXPECT_NEAR(total, 8.0, 1e-9);
  EXPECT_EQ(m.bounds, AABB({0, 0, 0}, {2, 2, 2}));
}

TEST(Generator, RadialFieldExtremaMatchSampledPoints)
{
  const int     n = 4;
  const TetMesh m = generate_synthetic(n, AnalyticField::Radial, Centering::Vertex);
  double        lo = 1e9, hi = -1e9;
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) {
        const double f = evaluate_field(AnalyticField::Radial, Vec3(i, j, k) * (1.0 / n));
        lo = std::min(lo, f);
        hi = std::max(hi, f);
      }
  const auto [mlo, mhi] = std::minmax_element(m.field.begin(), m.field.end());
  EXPECT_NEAR(*mlo, lo, 1e-7);
  EXPECT_NEAR(*mhi, hi, 1e-7);
  EXPECT_EQ(*mlo, 0.0); // center vertex
}

TEST(Sampler, CentroidOfUnitTet)
{
  const MeshSampler sampler(parse(unit_tet()));
  const auto        v = sampler.sample({0.25, 0.25, 0.25});
  ASSERT_TRUE(v);
  EXPECT_DOUBLE_EQ(*v, 1.5);
  EXPECT_FALSE(sampler.sample({2, 2, 2}));
  EXPECT_FALSE(sampler.sample({0.9, 0.9, 0.9})); // inside bounds, outside the tet
}

TEST(Sampler, ReproducesLinearField)
{
  const int         n = 6;
  const TetMesh     m = generate_synthetic(n, AnalyticField::Ramp, Centering::Vertex);
  const MeshSampler sampler(m);
  std::mt19937_64   rng(7);
  std::uniform_real_distribution<double> u(0.0, n);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p(u(rng), u(rng), u(rng));
    const auto v = sampler.sample(p);
    ASSERT_TRUE(v) << p;
    EXPECT_NEAR(*v, p.x / n, 1e-6);
  }
}

TEST(Sampler, BarycentricsAreValidPartitionsOfUnity)
{
  const TetMesh     m = generate_synthetic(5, AnalyticField::Sinusoidal, Centering::Vertex);
  const MeshSampler sampler(m);
  std::mt19937_64   rng(11);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const auto loc = sampler.locate({u(rng), u(rng), u(rng)});
    ASSERT_TRUE(loc);
    double sum = 0.0;
    for (double b : loc->bary) {
      EXPECT_GE(b, -kBarycentricTolerance);
      sum += b;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Sampler, AgreesWithBruteForceScan)
{
  for (int n : {1, 3, 8})
    for (auto centering : {Centering::Vertex, Centering::Cell}) {
      const TetMesh     m = generate_synthetic(n, AnalyticField::Sinusoidal, centering);
      const MeshSampler sampler(m);
      std::mt19937_64   rng(100 + n);
      std::uniform_real_distribution<double> u(-0.1 * n, 1.1 * n);
      for (int i = 0; i < 1000; ++i) {
        const Vec3 p(u(rng), u(rng), u(rng));
        const auto fast = sampler.locate(p);
        const auto slow = oracle::locate(m, p);
        ASSERT_EQ(fast.has_value(), slow.has_value()) << p;
        if (!fast) continue;
        EXPECT_EQ(fast->tet, slow->tet) << p;
        const auto v = sampler.sample(p);
        ASSERT_TRUE(v);
        EXPECT_NEAR(*v, slow->value, 1e-9);
      }
    }
}

TEST(Sampler, SharedFaceTieBreaksToLowestTet)
{
  const TetMesh     m = generate_synthetic(1, AnalyticField::Ramp, Centering::Cell);
  const MeshSampler sampler(m);
  // (0.5,0.5,0.5) lies on faces shared by several tets of the cube
  const auto loc  = sampler.locate({0.5, 0.5, 0.5});
  const auto slow = oracle::locate(m, {0.5, 0.5, 0.5});
  ASSERT_TRUE(loc && slow);
  EXPECT_EQ(loc->tet, slow->tet);
}

TEST(Sampler, ConcurrentQueriesMatchSerial)
{
  const TetMesh     m = generate_synthetic(6, AnalyticField::Radial, Centering::Vertex);
  const MeshSampler sampler(m);
  std::vector<Vec3> pts;
  std::mt19937_64   rng(3);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  for (int i = 0; i < 2000; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  std::vector<double> serial;
  for (const Vec3 &p : pts) serial.push_back(sampler.sample(p).value_or(-1));

  auto job = [&] {
    std::vector<double> out;
    for (const Vec3 &p : pts) out.push_back(sampler.sample(p).value_or(-1));
    return out;
  };
  auto a = std::async(std::launch::async, job), b = std::async(std::launch::async, job);
  EXPECT_EQ(a.get(), serial);
  EXPECT_EQ(b.get(), serial);
}
