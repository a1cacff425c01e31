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

#include "tetvol/math.hpp"
#include "tetvol/parallel.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tetvol {

  struct TransferFunctionError : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  struct Rgba {
    double r = 0, g = 0, b = 0, a = 0;

    friend constexpr bool operator==(const Rgba &, const Rgba &) = default;
  };

  constexpr Rgba lerp(const Rgba &x, const Rgba &y, double w)
  {
    return {x.r + (y.r - x.r) * w, x.g + (y.g - x.g) * w, x.b + (y.b - x.b) * w, x.a + (y.a - x.a) * w};
  }

  /// Tabulated RGBA map over [lo, hi]. Entry i sits at lo + i/(n-1) * (hi - lo); lookups
  /// interpolate linearly between neighbors and clamp outside the domain.
  class TransferFunction {
  public:
    static constexpr std::size_t kDefaultSize = 256;

    TransferFunction() : TransferFunction(0.0, 1.0, {Rgba{}, Rgba{}}) {}

    TransferFunction(double lo, double hi, std::vector<Rgba> table) : lo_(lo), hi_(hi), table_(std::move(table))
    {
      if (!(lo_ < hi_)) throw TransferFunctionError("transfer function domain must satisfy lo < hi");
      if (table_.size() < 2) throw TransferFunctionError("transfer function needs at least 2 entries");
      for (const Rgba &c : table_)
        for (double v : {c.r, c.g, c.b, c.a})
          if (!(v >= 0.0 && v <= 1.0)) throw TransferFunctionError("transfer function components must lie in [0,1]");
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    std::size_t size() const { return table_.size(); }
    const std::vector<Rgba> &table() const { return table_; }

    double position(std::size_t i) const
    {
      return lo_ + (hi_ - lo_) * (static_cast<double>(i) / static_cast<double>(table_.size() - 1));
    }

    Rgba lookup(double value) const
    {
      const double x = (value - lo_) / (hi_ - lo_);
      if (!(x > 0.0)) return table_.front();
      if (x >= 1.0) return table_.back();
      const double      f = x * static_cast<double>(table_.size() - 1);
      const std::size_t i = std::min(static_cast<std::size_t>(f), table_.size() - 2);
      return lerp(table_[i], table_[i + 1], f - static_cast<double>(i));
    }

    /// Piecewise-linear resampling of (position, color) control points onto `size`
    /// evenly spaced entries. Points must be sorted by position.
    static TransferFunction from_control_points(double lo, double hi, const std::vector<std::pair<double, Rgba>> &points,
                                                std::size_t size = kDefaultSize)
    {
      if (points.empty()) throw TransferFunctionError("no control points");
      if (size < 2) throw TransferFunctionError("transfer function needs at least 2 entries");
      for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].first < points[i - 1].first) throw TransferFunctionError("control points must be sorted");
      std::vector<Rgba> table(size);
      for (std::size_t i = 0; i < size; ++i) {
        const double x = lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(size - 1));
        if (x <= points.front().first) {
          table[i] = points.front().second;
        } else if (x >= points.back().first) {
          table[i] = points.back().second;
        } else {
          std::size_t k = 1;
          while (points[k].first < x) ++k;
          const auto &[x0, c0] = points[k - 1];
          const auto &[x1, c1] = points[k];
          table[i]             = x1 > x0 ? lerp(c0, c1, (x - x0) / (x1 - x0)) : c1;
        }
      }
      return TransferFunction(lo, hi, std::move(table));
    }

    friend bool operator==(const TransferFunction &, const TransferFunction &) = default;

  private:
    double            lo_, hi_;
    std::vector<Rgba> table_;
  };

  inline Rgba tf_lookup(const TransferFunction &tf, double value) { return tf.lookup(value); }

  // ------------------------------------------------------------------
  // JSON: { "domain": [lo, hi], "rgba": [[r,g,b,a], ...] }
  // ------------------------------------------------------------------

  inline TransferFunction transfer_function_from_json(const nlohmann::json &j)
  {
    try {
      const auto &domain = j.at("domain");
      if (!domain.is_array() || domain.size() != 2) throw TransferFunctionError("'domain' must be [lo, hi]");
      std::vector<Rgba> table;
      for (const auto &e : j.at("rgba")) {
        if (!e.is_array() || e.size() != 4) throw TransferFunctionError("each rgba entry must have 4 components");
        table.push_back({e[0].get<double>(), e[1].get<double>(), e[2].get<double>(), e[3].get<double>()});
      }
      return TransferFunction(domain[0].get<double>(), domain[1].get<double>(), std::move(table));
    } catch (const nlohmann::json::exception &e) {
      throw TransferFunctionError(std::string("malformed transfer function: ") + e.what());
    }
  }

  inline nlohmann::json to_json(const TransferFunction &tf)
  {
    nlohmann::json rgba = nlohmann::json::array();
    for (const Rgba &c : tf.table()) rgba.push_back({c.r, c.g, c.b, c.a});
    return {{"domain", {tf.lo(), tf.hi()}}, {"rgba", std::move(rgba)}};
  }

  inline TransferFunction load_transfer_function(const std::filesystem::path &path)
  {
    std::ifstream in(path);
    if (!in) throw TransferFunctionError("cannot open transfer function " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception &e) {
      throw TransferFunctionError(path.string() + ": " + e.what());
    }
    return transfer_function_from_json(j);
  }

  // ------------------------------------------------------------------
  // per-partition metadata
  // ------------------------------------------------------------------

  struct PartitionMeta {
    double max_opacity         = 0.0;
    double raw_variance        = 0.0;
    double normalized_variance = 1.0;
    bool   active              = false;

    friend constexpr bool operator==(const PartitionMeta &, const PartitionMeta &) = default;
  };

  /// Visits the TF colors covering [range.min, range.max]: the interpolated colors at both
  /// ends plus every table entry strictly between them.
  template <typename Visit>
  void for_each_covered_entry(const TransferFunction &tf, const ValueRange &range, Visit &&visit)
  {
    visit(tf.lookup(range.min));
    for (std::size_t i = 0; i < tf.size(); ++i) {
      const double x = tf.position(i);
      if (x > range.min && x < range.max) visit(tf.table()[i]);
    }
    if (range.max > range.min) visit(tf.lookup(range.max));
  }

  /// Max opacity and the variance of opacity-weighted color over the covered TF entries.
  /// Cost is linear in the table size and independent of how many elements produced the
  /// range. The returned normalized_variance is a placeholder until normalize_variances().
  inline PartitionMeta compute_partition_meta(const TransferFunction &tf, const ValueRange &range)
  {
    PartitionMeta meta;
    std::size_t   n = 0;
    Vec3          sum;
    for_each_covered_entry(tf, range, [&](const Rgba &c) {
      meta.max_opacity = std::max(meta.max_opacity, c.a);
      sum += Vec3(c.a * c.r, c.a * c.g, c.a * c.b);
      ++n;
    });
    const Vec3 mean = sum * (1.0 / static_cast<double>(n));
    double     acc  = 0.0;
    for_each_covered_entry(tf, range, [&](const Rgba &c) {
      const Vec3 d = Vec3(c.a * c.r, c.a * c.g, c.a * c.b) - mean;
      acc += dot(d, d);
    });
    meta.raw_variance = acc / static_cast<double>(n);
    meta.active       = meta.max_opacity > 0.0;
    return meta;
  }

  /// Rescales raw variances to [0,1] by the min/max over all partitions. When every raw
  /// variance is equal the result is 1 everywhere (finest sampling).
  inline void normalize_variances(std::span<PartitionMeta> metas)
  {
    if (metas.empty()) return;
    double lo = metas[0].raw_variance, hi = lo;
    for (const auto &m : metas) {
      lo = std::min(lo, m.raw_variance);
      hi = std::max(hi, m.raw_variance);
    }
    const double span = hi - lo;
    for (auto &m : metas) m.normalized_variance = span > 0.0 ? (m.raw_variance - lo) / span : 1.0;
  }

  /// Full metadata pass: per-partition statistics (in parallel) followed by normalization.
  /// Takes only the stored value ranges, never element data.
  inline std::vector<PartitionMeta> compute_metas(const TransferFunction &tf, std::span<const ValueRange> ranges,
                                                  unsigned threads = 0)
  {
    std::vector<PartitionMeta> metas(ranges.size());
    parallel_for(ranges.size(), threads, [&](std::size_t i) { metas[i] = compute_partition_meta(tf, ranges[i]); });
    normalize_variances(metas);
    return metas;
  }

} // namespace tetvol
