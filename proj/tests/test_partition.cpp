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
#include "tetvol/partition.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

using namespace tetvol;

namespace {

  bool boxes_touch(const AABB &a, const AABB &b)
  {
    for (int k = 0; k < 3; ++k)
      if (a.hi[k] < b.lo[k] || b.hi[k] < a.lo[k]) return false;
    return true;
  }

  ValueRange brute_range(const TetMesh &m, const std::vector<std::uint32_t> &ids)
  {
    ValueRange r;
    for (std::uint32_t t : ids) {
      if (m.centering == Centering::Cell) {
        r.extend(m.field[t]);
      } else {
        for (std::uint32_t v : m.tets[t]) r.extend(m.field[v]);
      }
    }
    return r;
  }

  struct Case {
    int           n;
    AnalyticField field;
    Centering     centering;
    std::size_t   leaf;
  };

  const Case kCases[] = {
      {1, AnalyticField::Ramp, Centering::Vertex, 1},
      {4, AnalyticField::Radial, Centering::Vertex, 8},
      {6, AnalyticField::Sinusoidal, Centering::Cell, 16},
      {8, AnalyticField::Void, Centering::Vertex, 64},
  };

} // namespace

TEST(Partition, IdsAreSequentialAndElementListsSorted)
{
  for (const Case &c : kCases) {
    const TetMesh m     = generate_synthetic(c.n, c.field, c.centering);
    const auto    parts = build_partitions(m, {c.leaf, 24});
    ASSERT_FALSE(parts.empty());
    for (std::size_t i = 0; i < parts.size(); ++i) {
      EXPECT_EQ(parts[i].id, i);
      EXPECT_FALSE(parts[i].element_ids.empty());
      EXPECT_TRUE(std::is_sorted(parts[i].element_ids.begin(), parts[i].element_ids.end()));
    }
  }
}

TEST(Partition, LeavesTileTheMeshBounds)
{
  for (const Case &c : kCases) {
    const TetMesh m     = generate_synthetic(c.n, c.field, c.centering);
    const auto    parts = build_partitions(m, {c.leaf, 24});
    double        total = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      total += parts[i].leaf_bounds.volume();
      for (std::size_t j = i + 1; j < parts.size(); ++j)
        EXPECT_EQ(overlap_volume(parts[i].leaf_bounds, parts[j].leaf_bounds), 0.0) << i << ' ' << j;
    }
    EXPECT_NEAR(total, m.bounds.volume(), 1e-9 * m.bounds.volume());
  }
}

TEST(Partition, ElementAssignmentMatchesOverlap)
{
  for (const Case &c : kCases) {
    const TetMesh m     = generate_synthetic(c.n, c.field, c.centering);
    const auto    parts = build_partitions(m, {c.leaf, 24});
    std::vector<int> hits(m.num_tets(), 0);
    for (const Partition &p : parts) {
      const std::set<std::uint32_t> listed(p.element_ids.begin(), p.element_ids.end());
      for (std::uint32_t t = 0; t < m.num_tets(); ++t) {
        const AABB box = m.tet_bounds(t);
        if (listed.count(t)) {
          ++hits[t];
          EXPECT_TRUE(boxes_touch(box, p.leaf_bounds)) << "tet " << t << " partition " << p.id;
        } else {
          EXPECT_EQ(overlap_volume(box, p.leaf_bounds), 0.0) << "tet " << t << " partition " << p.id;
        }
      }
    }
    for (std::uint32_t t = 0; t < m.num_tets(); ++t) EXPECT_GE(hits[t], 1) << "tet " << t;
  }
}

TEST(Partition, RefinedBoundsAndValueRanges)
{
  for (const Case &c : kCases) {
    const TetMesh m     = generate_synthetic(c.n, c.field, c.centering);
    const auto    parts = build_partitions(m, {c.leaf, 24});
    for (const Partition &p : parts) {
      AABB fit;
      for (std::uint32_t t : p.element_ids)
        for (const Vec3 &v : m.corners(t)) fit.extend(v);
      AABB expected;
      for (int k = 0; k < 3; ++k) {
        expected.lo[k] = std::max(fit.lo[k], p.leaf_bounds.lo[k]);
        expected.hi[k] = std::min(fit.hi[k], p.leaf_bounds.hi[k]);
      }
      EXPECT_EQ(p.bounds, expected) << p.id;
      const ValueRange r = brute_range(m, p.element_ids);
      EXPECT_EQ(p.value_range.min, r.min);
      EXPECT_EQ(p.value_range.max, r.max);
    }
  }
}

TEST(Partition, EveryInteriorPointIsCoveredByItsTet)
{
  const TetMesh m     = generate_synthetic(6, AnalyticField::Radial, Centering::Vertex);
  const auto    parts = build_partitions(m, {12, 24});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  for (int i = 0; i < 500; ++i) {
    const Vec3 p(u(rng), u(rng), u(rng));
    const auto hit = oracle::locate(m, p);
    ASSERT_TRUE(hit);
    bool found = false;
    for (const Partition &part : parts)
      if (part.bounds.contains(p) &&
          std::binary_search(part.element_ids.begin(), part.element_ids.end(), hit->tet))
        found = true;
    EXPECT_TRUE(found) << p;
  }
}

TEST(Partition, LeafSizeLimitAndDeterminism)
{
  const TetMesh m = generate_synthetic(8, AnalyticField::Sinusoidal, Centering::Vertex);
  const auto    a = build_partitions(m, {16, 24});
  const auto    b = build_partitions(m, {16, 24});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].bounds, b[i].bounds);
    EXPECT_EQ(a[i].element_ids, b[i].element_ids);
  }
  // a regular grid always splits cleanly down to small leaves
  for (const Partition &p : a) EXPECT_LE(p.element_ids.size(), 16u * 2);

  const auto shallow = build_partitions(m, {1, 2});
  EXPECT_LE(shallow.size(), 4u);
  const auto single = build_partitions(m, {m.num_tets(), 24});
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].bounds, m.bounds);
}

TEST(Partition, ConfigValidationAndDefaults)
{
  EXPECT_EQ(KdBuildConfig::defaults_for(1000).max_leaf_elements, 64u);
  EXPECT_EQ(KdBuildConfig::defaults_for(4096 * 100).max_leaf_elements, 100u);
  EXPECT_THROW(KdBuildConfig({0, 24}).validate(), std::invalid_argument);
  EXPECT_THROW(KdBuildConfig({4, 0}).validate(), std::invalid_argument);
  EXPECT_THROW(build_partitions(TetMesh{}, {}), MeshError);
}

TEST(Partition, DumpHasOneLinePerPartition)
{
  const TetMesh     m     = generate_synthetic(3, AnalyticField::Ramp, Centering::Vertex);
  const auto        parts = build_partitions(m, {8, 24});
  std::stringstream out;
  write_partition_dump(out, parts);
  std::string line;
  std::getline(out, line);
  EXPECT_EQ(line[0], '#');
  std::size_t rows = 0;
  while (std::getline(out, line)) {
    std::istringstream row(line);
    std::uint32_t      id;
    double             box[6];
    std::size_t        count;
    row >> id;
    for (double &v : box) row >> v;
    row >> count;
    EXPECT_EQ(id, rows);
    EXPECT_EQ(count, parts[rows].element_ids.size());
    ++rows;
  }
  EXPECT_EQ(rows, parts.size());
}

TEST(Partition, SingleTetMesh)
{
  TetMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  m.tets     = {{0, 1, 2, 3}};
  m.field    = {0, 1, 2, 3};
  validate(m);
  for (KdBuildConfig c : {KdBuildConfig{1, 1}, KdBuildConfig{64, 24}}) {
    const auto parts = build_partitions(m, c);
    ASSERT_EQ(parts.size(), 1u);
    EXPECT_EQ(parts[0].element_ids, std::vector<std::uint32_t>{0});
    EXPECT_EQ(parts[0].value_range.min, 0.0);
    EXPECT_EQ(parts[0].value_range.max, 3.0);
  }
}

TEST(Partition, SmallMeshRespectsLeafLimitOrDepth)
{
  const TetMesh m     = generate_synthetic(2, AnalyticField::Ramp, Centering::Vertex);
  const auto    parts = build_partitions(m, {8, 16});
  std::set<std::uint32_t> all;
  for (const Partition &p : parts) {
    all.insert(p.element_ids.begin(), p.element_ids.end());
    // a leaf is over the limit only if it could not be split further
    if (p.element_ids.size() > 8) {
      const auto deeper = build_partitions(m, {8, 32});
      EXPECT_EQ(deeper.size(), parts.size());
    }
  }
  EXPECT_EQ(all.size(), 40u);
}

TEST(Partition, RefineShrinksAndClamps)
{
  TetMesh m;
  m.vertices = {{1, 1, 1}, {2, 1, 1}, {1, 2, 1}, {1, 1, 2}, {0.5, 0, 0}, {1.5, 0, 0}, {0.5, 1, 0}, {0.5, 0, 1}};
  m.tets     = {{0, 1, 2, 3}, {4, 5, 6, 7}};
  m.field.assign(8, 0.0);
  validate(m);

  Partition inner;
  inner.element_ids = {0};
  EXPECT_EQ(refine_partition_bounds(inner, m, AABB({0, 0, 0}, {10, 10, 10})).bounds, AABB({1, 1, 1}, {2, 2, 2}));

  Partition straddling;
  straddling.element_ids = {1};
  const Partition r      = refine_partition_bounds(straddling, m, AABB({0, 0, 0}, {1, 1, 1}));
  EXPECT_EQ(r.bounds, AABB({0.5, 0, 0}, {1, 1, 1}));
  EXPECT_EQ(r.leaf_bounds, AABB({0, 0, 0}, {1, 1, 1}));
}

TEST(Partition, RefinedBoundsArePairwiseDisjoint)
{
  for (const Case &c : kCases) {
    const TetMesh m     = generate_synthetic(c.n, c.field, c.centering);
    const auto    parts = build_partitions(m, {c.leaf, 24});
    for (std::size_t i = 0; i < parts.size(); ++i)
      for (std::size_t j = i + 1; j < parts.size(); ++j)
        EXPECT_LE(overlap_volume(parts[i].bounds, parts[j].bounds), 1e-12) << i << ' ' << j;
  }
}
