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

#include "tetvol/metrics.hpp"
#include "tetvol/scene_config.hpp"
#include "tetvol/viewer/server.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

using namespace tetvol;

namespace {

  constexpr int kExitBadInput    = 1;
  constexpr int kExitRenderError = 2;

  /// Command-line values that override scene config fields when given.
  struct Overrides {
    std::optional<std::string> mode;
    std::optional<double>      s1, s2, p, termination, epsilon;
    std::optional<int>         width, height;
    bool                       jitter  = false;
    unsigned                   threads = 0;

    void add_to(CLI::App &app)
    {
      app.add_option("--mode", mode, "reference | skip | skip-adaptive");
      app.add_option("--s1", s1, "minimum step (world units)");
      app.add_option("--s2", s2, "maximum step (world units)");
      app.add_option("--p", p, "adaptive power (>= 1)");
      app.add_option("--termination", termination, "early termination opacity");
      app.add_option("--epsilon", epsilon, "traversal epsilon (world units)");
      app.add_option("--width", width);
      app.add_option("--height", height);
      app.add_flag("--jitter", jitter, "jitter sample positions per pixel");
      app.add_option("--threads", threads, "worker threads (0 = all cores)");
    }

    void apply(SceneConfig &c) const
    {
      if (mode) c.mode = parse_mode(*mode);
      if (s1) c.params.s1 = *s1;
      if (s2) c.params.s2 = *s2;
      if (p) c.params.p = *p;
      if (termination) c.params.termination_opacity = *termination;
      if (epsilon) c.epsilon = *epsilon;
      if (width) c.camera.width = *width;
      if (height) c.camera.height = *height;
      if (jitter) c.params.jitter = true;
      // s2 defaults up to s1 when only s1 is given on the command line
      if (s1 && !s2 && c.params.s2 < c.params.s1) c.params.s2 = c.params.s1;
    }
  };

  std::vector<double> parse_sweep(const std::string &spec)
  {
    const auto a = spec.find(':'), b = spec.rfind(':');
    if (a == std::string::npos || a == b) throw std::invalid_argument("--sweep-s2 expects lo:hi:count");
    const double lo    = std::stod(spec.substr(0, a));
    const double hi    = std::stod(spec.substr(a + 1, b - a - 1));
    const int    count = std::stoi(spec.substr(b + 1));
    if (count < 1 || hi < lo) throw std::invalid_argument("--sweep-s2 needs lo <= hi and count >= 1");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
    return out;
  }

  int cmd_generate(int n, const std::string &field, const std::string &centering, const std::string &out)
  {
    try {
      if (centering != "vertex" && centering != "cell") throw MeshError("unknown centering '" + centering + "'");
      const TetMesh mesh =
          generate_synthetic(n, parse_field(field), centering == "cell" ? Centering::Cell : Centering::Vertex);
      save_mesh(out, mesh);
      std::cout << "wrote " << out << ": " << mesh.vertices.size() << " vertices, " << mesh.tets.size() << " tets\n";
      return 0;
    } catch (const std::exception &e) {
      std::cerr << "generate: " << e.what() << "\n";
      return kExitBadInput;
    }
  }

  struct RenderArgs {
    std::string scene, out = "out.ppm", heatmap, stats, dump_partitions;
    Overrides   overrides;
  };

  int cmd_render(const RenderArgs &args)
  {
    SceneConfig config;
    Scene       scene;
    try {
      config = load_scene_config(args.scene);
      args.overrides.apply(config);
      config.params.validate();
      config.camera.validate();
      scene = config.build_scene(args.overrides.threads);
    } catch (const std::exception &e) {
      std::cerr << "render: " << e.what() << "\n";
      return kExitBadInput;
    }

    Framebuffer fb;
    RenderStats stats;
    try {
      fb = render(scene, config.camera, config.render_options(args.overrides.threads), &stats);
    } catch (const std::exception &e) {
      std::cerr << "render failed: " << e.what() << "\n";
      return kExitRenderError;
    }

    try {
      write_ppm(std::filesystem::path(args.out), to_image(fb));
      if (!args.heatmap.empty())
        write_ppm(std::filesystem::path(args.heatmap), heatmap_image(fb.samples, fb.width, fb.height));
      if (!args.stats.empty()) {
        const nlohmann::json j = {{"total_samples", stats.total_samples},
                                  {"partitions", stats.partitions},
                                  {"partitions_visited_mean", stats.partitions_visited_mean(fb.rgba.size())},
                                  {"ms_per_frame", stats.ms}};
        std::ofstream out(args.stats);
        if (!(out << j.dump(2) << "\n")) throw ImageError("cannot write " + args.stats);
      }
      if (!args.dump_partitions.empty()) {
        std::ofstream out(args.dump_partitions);
        write_partition_dump(out, scene.partitions());
        if (!out) throw ImageError("cannot write " + args.dump_partitions);
      }
    } catch (const std::exception &e) {
      std::cerr << "render: " << e.what() << "\n";
      return kExitBadInput;
    }
    std::cout << to_string(config.mode) << ": " << stats.total_samples << " samples, " << stats.ms << " ms\n";
    return 0;
  }

  struct BenchArgs {
    std::string scene, sweep = "", csv;
    int         frames = 5, warmup = 1;
    Overrides   overrides;
  };

  int cmd_bench(const BenchArgs &args)
  {
    SceneConfig         config;
    Scene               scene;
    std::vector<double> s2_values;
    try {
      config = load_scene_config(args.scene);
      args.overrides.apply(config);
      config.params.validate();
      config.camera.validate();
      s2_values = args.sweep.empty() ? std::vector<double>{config.params.s2} : parse_sweep(args.sweep);
      for (double s2 : s2_values)
        if (s2 < config.params.s1) throw std::invalid_argument("sweep values must be >= s1");
      scene = config.build_scene(args.overrides.threads);
    } catch (const std::exception &e) {
      std::cerr << "bench: " << e.what() << "\n";
      return kExitBadInput;
    }

    SweepResult result;
    try {
      SweepOptions opts;
      opts.warmup_frames = args.warmup;
      opts.timing_frames = args.frames;
      opts.background    = config.background;
      opts.threads       = args.overrides.threads;
      result             = run_sweep(scene, config.camera, config.params, s2_values, opts);
    } catch (const std::exception &e) {
      std::cerr << "bench failed: " << e.what() << "\n";
      return kExitRenderError;
    }

    if (args.csv.empty()) {
      write_sweep_csv(std::cout, result);
    } else {
      std::ofstream out(args.csv);
      write_sweep_csv(out, result);
      if (!out) {
        std::cerr << "bench: cannot write " << args.csv << "\n";
        return kExitBadInput;
      }
    }
    std::cerr << "reference: " << result.reference_samples << " samples, " << result.reference_fps << " fps\n";
    return 0;
  }

  std::function<void()> g_shutdown;

  int cmd_serve(const std::string &scene_path, const std::string &bind, unsigned threads)
  {
    try {
      const auto colon = bind.rfind(':');
      if (colon == std::string::npos) throw std::invalid_argument("--bind expects host:port");
      const std::string host = bind.substr(0, colon);
      const auto        port = static_cast<unsigned short>(std::stoi(bind.substr(colon + 1)));

      const SceneConfig config = load_scene_config(scene_path);
      viewer::ViewerSession session(config.build_scene(threads), config.camera, config.render_options(threads));
      viewer::ViewerServer  server(std::move(session), host, port);
      server.start();
      std::cout << "serving on ws://" << host << ":" << server.port() << "\n" << std::flush;
      g_shutdown = [&server] { server.stop(); };
      std::signal(SIGINT, [](int) { std::thread([] { g_shutdown(); }).detach(); });
      server.wait();
      return 0;
    } catch (const std::exception &e) {
      std::cerr << "serve: " << e.what() << "\n";
      return kExitBadInput;
    }
  }

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"tetvol: direct volume rendering of tetrahedral meshes with empty space skipping and adaptive sampling"};
  app.require_subcommand(1);

  int         gen_n = 0;
  std::string gen_field = "radial", gen_centering = "vertex", gen_out;
  auto       *gen = app.add_subcommand("generate", "write a synthetic TET1 mesh");
  gen->add_option("--n", gen_n, "cubes per axis")->required();
  gen->add_option("--field", gen_field, "ramp | radial | sinusoidal | void");
  gen->add_option("--centering", gen_centering, "vertex | cell");
  gen->add_option("--out", gen_out, "output .tet path")->required();

  RenderArgs rargs;
  auto      *ren = app.add_subcommand("render", "render a still image");
  ren->add_option("--scene", rargs.scene, "scene JSON")->required();
  ren->add_option("--out", rargs.out, "output PPM");
  ren->add_option("--heatmap", rargs.heatmap, "per-pixel sample heatmap PPM");
  ren->add_option("--stats", rargs.stats, "stats JSON");
  ren->add_option("--dump-partitions", rargs.dump_partitions, "partition dump (text)");
  rargs.overrides.add_to(*ren);

  BenchArgs bargs;
  auto     *bench = app.add_subcommand("bench", "Reference vs SkipAdaptive sweep over s2, CSV output");
  bench->add_option("--scene", bargs.scene, "scene JSON")->required();
  bench->add_option("--sweep-s2", bargs.sweep, "lo:hi:count");
  bench->add_option("--csv", bargs.csv, "output CSV (default stdout)");
  bench->add_option("--frames", bargs.frames, "timed frames per point");
  bench->add_option("--warmup", bargs.warmup, "warm-up frames per point");
  bargs.overrides.add_to(*bench);

  std::string serve_scene, serve_bind = "127.0.0.1:7878";
  unsigned    serve_threads = 0;
  auto       *serve = app.add_subcommand("serve", "interactive viewer service over WebSocket");
  serve->add_option("--scene", serve_scene, "scene JSON")->required();
  serve->add_option("--bind", serve_bind, "host:port");
  serve->add_option("--threads", serve_threads, "render threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitBadInput;
  }

  if (*gen) return cmd_generate(gen_n, gen_field, gen_centering, gen_out);
  if (*ren) return cmd_render(rargs);
  if (*bench) return cmd_bench(bargs);
  if (*serve) return cmd_serve(serve_scene, serve_bind, serve_threads);
  return kExitBadInput;
}
