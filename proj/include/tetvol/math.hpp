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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

namespace tetvol {

  struct Vec3 {
    double x = 0, y = 0, z = 0;

    constexpr Vec3() = default;
    constexpr Vec3(double x, double y, double z) : x(x), y(y), z(z) {}

    constexpr double  operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double &operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3 &operator+=(const Vec3 &o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3 &operator-=(const Vec3 &o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3 &operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr bool operator==(const Vec3 &, const Vec3 &) = default;
  };

  constexpr Vec3 operator+(Vec3 a, const Vec3 &b) { return a += b; }
  constexpr Vec3 operator-(Vec3 a, const Vec3 &b) { return a -= b; }
  constexpr Vec3 operator-(const Vec3 &a) { return {-a.x, -a.y, -a.z}; }
  constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }

  constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
  constexpr Vec3 cross(const Vec3 &a, const Vec3 &b)
  {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
  }
  inline double length(const Vec3 &a) { return std::sqrt(dot(a, a)); }
  inline Vec3 normalize(const Vec3 &a) { return a * (1.0 / length(a)); }
  constexpr Vec3 min(const Vec3 &a, const Vec3 &b)
  {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
  }
  constexpr Vec3 max(const Vec3 &a, const Vec3 &b)
  {
    return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
  }

  inline std::ostream &operator<<(std::ostream &o, const Vec3 &v)
  {
    return o << "(" << v.x << "," << v.y << "," << v.z << ")";
  }

  /// Axis-aligned box. The default-constructed box is empty (lo > hi).
  struct AABB {
    Vec3 lo{ std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity()};
    Vec3 hi{-std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

    constexpr AABB() = default;
    constexpr AABB(const Vec3 &lo, const Vec3 &hi) : lo(lo), hi(hi) {}

    constexpr bool empty() const { return lo.x > hi.x || lo.y > hi.y || lo.z > hi.z; }

    constexpr AABB &extend(const Vec3 &p)
    {
      lo = tetvol::min(lo, p);
      hi = tetvol::max(hi, p);
      return *this;
    }
    constexpr AABB &extend(const AABB &b)
    {
      lo = tetvol::min(lo, b.lo);
      hi = tetvol::max(hi, b.hi);
      return *this;
    }

    constexpr Vec3 size() const { return hi - lo; }
    constexpr Vec3 center() const { return (lo + hi) * 0.5; }
    inline double diagonal() const { return empty() ? 0.0 : length(size()); }
    constexpr double volume() const
    {
      if (empty()) return 0.0;
      const Vec3 s = size();
      return s.x * s.y * s.z;
    }
    constexpr int longest_axis() const
    {
      const Vec3 s = size();
      if (s.x >= s.y && s.x >= s.z) return 0;
      return s.y >= s.z ? 1 : 2;
    }
    /// Closed containment test.
    constexpr bool contains(const Vec3 &p) const
    {
      return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
    }
    constexpr bool contains(const AABB &b) const { return contains(b.lo) && contains(b.hi); }

    friend constexpr bool operator==(const AABB &, const AABB &) = default;
  };

  constexpr AABB intersection(const AABB &a, const AABB &b)
  {
    return AABB(max(a.lo, b.lo), min(a.hi, b.hi));
  }

  /// Volume of the overlap; zero when the boxes only share a face.
  constexpr double overlap_volume(const AABB &a, const AABB &b)
  {
    const AABB i = intersection(a, b);
    if (i.empty()) return 0.0;
    return i.volume();
  }

  inline std::ostream &operator<<(std::ostream &o, const AABB &b)
  {
    return o << "[" << b.lo << "," << b.hi << "]";
  }

  /// Closed scalar interval [min, max].
  struct ValueRange {
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();

    constexpr bool empty() const { return min > max; }
    constexpr ValueRange &extend(double v)
    {
      min = std::min(min, v);
      max = std::max(max, v);
      return *this;
    }
    constexpr ValueRange &extend(const ValueRange &r)
    {
      min = std::min(min, r.min);
      max = std::max(max, r.max);
      return *this;
    }
    constexpr bool contains(double v) const { return v >= min && v <= max; }

    friend constexpr bool operator==(const ValueRange &, const ValueRange &) = default;
  };

  /// Parametric ray-box slab intersection. Returns (t_near, t_far) of the infinite line;
  /// the interval is empty when t_near > t_far. Axis-parallel rays are handled without
  /// producing NaNs.
  inline std::array<double, 2> slab_interval(const Vec3 &origin, const Vec3 &direction, const AABB &box)
  {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double t0 = -inf, t1 = inf;
    for (int a = 0; a < 3; ++a) {
      const double o = origin[a], d = direction[a];
      if (d == 0.0) {
        if (o < box.lo[a] || o > box.hi[a]) return {inf, -inf};
        continue;
      }
      const double inv = 1.0 / d;
      double tn = (box.lo[a] - o) * inv;
      double tf = (box.hi[a] - o) * inv;
      if (tn > tf) std::swap(tn, tf);
      t0 = std::max(t0, tn);
      t1 = std::min(t1, tf);
    }
    return {t0, t1};
  }

} // namespace tetvol
