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
#include "tetvol/metrics.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace tetvol;

namespace {

  Image8 noise_image(std::mt19937_64 &rng, int w, int h)
  {
    Image8 img{w, h, std::vector<std::uint8_t>(std::size_t(3) * w * h)};
    std::uniform_int_distribution<int> u(0, 255);
    for (auto &c : img.rgb) c = static_cast<std::uint8_t>(u(rng));
    return img;
  }

  Image8 gradient_image(int w, int h)
  {
    Image8 img{w, h, std::vector<std::uint8_t>(std::size_t(3) * w * h)};
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < 3; ++c) img.rgb[3 * (std::size_t(y) * w + x) + c] = static_cast<std::uint8_t>((x * 7 + y * 3 + c * 40) % 256);
    return img;
  }

} // namespace

TEST(Ssim, IdenticalImagesScoreOne)
{
  const Image8 img = gradient_image(40, 30);
  EXPECT_DOUBLE_EQ(ssim(img, img), 1.0);
}

TEST(Ssim, MatchesDirectWindowedComputation)
{
  std::mt19937_64 rng(17);
  for (int i = 0; i < 5; ++i) {
    const Image8 a = gradient_image(24 + i, 19 + 2 * i);
    Image8       b = a;
    if (i % 2) {
      b = noise_image(rng, a.width, a.height);
    } else {
      std::uniform_int_distribution<int> d(-20, 20);
      for (auto &c : b.rgb) c = static_cast<std::uint8_t>(std::clamp(int(c) + d(rng), 0, 255));
    }
    EXPECT_NEAR(ssim(a, b), oracle::ssim_direct(a, b), 1e-9);
  }
}

TEST(Ssim, ConstantImagesMatchClosedForm)
{
  Image8 a{16, 12, std::vector<std::uint8_t>(3 * 16 * 12, 100)};
  Image8 b{16, 12, std::vector<std::uint8_t>(3 * 16 * 12, 101)};
  // zero variance and covariance leave only the luminance term
  const double c1       = (0.01 * 255) * (0.01 * 255);
  const double expected = (2.0 * 100 * 101 + c1) / (100.0 * 100 + 101.0 * 101 + c1);
  EXPECT_NEAR(ssim(a, b), expected, 1e-12);
}

TEST(Ssim, RejectsSmallOrMismatchedImages)
{
  EXPECT_THROW(ssim(gradient_image(10, 20), gradient_image(10, 20)), ImageError);
  EXPECT_THROW(ssim(gradient_image(20, 20), gradient_image(21, 20)), ImageError);
}

TEST(Image, QuantizeAndPpmRoundTrip)
{
  EXPECT_EQ(quantize(0.0), 0);
  EXPECT_EQ(quantize(1.0), 255);
  EXPECT_EQ(quantize(-3.0), 0);
  EXPECT_EQ(quantize(7.0), 255);
  EXPECT_EQ(quantize(0.5), 128);

  const Image8      img = gradient_image(13, 7);
  std::stringstream buf;
  write_ppm(buf, img);
  EXPECT_EQ(buf.str().substr(0, 2), "P6");
  const Image8 back = read_ppm(buf);
  EXPECT_EQ(back.width, 13);
  EXPECT_EQ(back.height, 7);
  EXPECT_EQ(back.rgb, img.rgb);

  std::istringstream junk("P3\n1 1\n255\n0 0 0\n");
  EXPECT_THROW(read_ppm(junk), ImageError);
}

TEST(Image, HeatmapUsesColormapEnds)
{
  const Image8 img = heatmap_image({0, 5, 10}, 3, 1);
  EXPECT_EQ(img.rgb[0], kViridis[0][0]);
  EXPECT_EQ(img.rgb[6], kViridis[255][0]);
  EXPECT_EQ(img.rgb[8], kViridis[255][2]);
}

TEST(Sweep, RowsAreSortedAndCsvFormatted)
{
  const Scene scene(generate_synthetic(5, AnalyticField::Radial, Centering::Vertex), {8, 24},
                    TransferFunction::from_control_points(0.0, 0.9, {{0.0, {1, 1, 1, 0.4}}, {0.5, {0.2, 0.4, 0.9, 0.05}}}));
  Camera cam;
  cam.position = {12, 9, -5};
  cam.look_at  = {2.5, 2.5, 2.5};
  cam.width = cam.height = 24;
  SweepOptions opts;
  opts.warmup_frames = 0;
  opts.timing_frames = 1;
  const SweepResult r = run_sweep(scene, cam, AdaptiveParams{0.05, 0.05, 2.0}, {0.4, 0.05, 0.2}, opts);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_DOUBLE_EQ(r.rows[0].s2, 0.05);
  EXPECT_DOUBLE_EQ(r.rows[2].s2, 0.4);
  EXPECT_GE(r.rows[0].samples, r.rows[2].samples);

  RenderOptions skip;
  skip.mode   = RenderMode::SkipOnly;
  skip.params = {0.05, 0.05, 2.0};
  RenderStats skip_stats;
  render(scene, cam, skip, &skip_stats);
  EXPECT_EQ(r.rows[0].samples, skip_stats.total_samples);
  for (const auto &row : r.rows) {
    EXPECT_GT(row.ssim, 0.5);
    EXPECT_LE(row.ssim, 1.0 + 1e-12);
  }

  std::stringstream csv;
  write_sweep_csv(csv, r);
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "s2,fps,samples,ssim");
  int rows = 0;
  while (std::getline(csv, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 3);
    ++rows;
  }
  EXPECT_EQ(rows, 3);
  EXPECT_EQ(format_row({0.25, 12.5, 1000, 0.98765432}), "0.25,12.500,1000,0.987654");
}
