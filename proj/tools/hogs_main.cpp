// hogs: train, render and evaluate Gaussian splatting scenes on the CPU.

#include "hogs/config.hpp"
#include "hogs/convergence.hpp"
#include "hogs/eval.hpp"
#include "hogs/fixtures.hpp"
#include "hogs/io.hpp"
#include "hogs/parallel.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace fs = std::filesystem;
using namespace hogs;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct TrainArgs {
  std::string manifest;
  std::string out = "hogs_out";
  std::string config;
  std::string parametrization;
  std::string resume;
  std::string w_init;
  std::optional<int> iterations;
  std::optional<double> lr_w_multiplier;
  std::optional<uint64_t> seed;
  size_t test_every = 8;
  std::vector<std::string> overrides;
};

TrainConfig build_config(const TrainArgs& a) {
  const Parametrization p = a.parametrization.empty() ? Parametrization::Homogeneous
                                                      : parse_parametrization(a.parametrization);
  TrainConfig cfg = TrainConfig::defaults_for(p);
  if (!a.config.empty()) cfg = load_config_file(a.config, cfg);
  if (!a.parametrization.empty()) apply_override(cfg, "parametrization=" + a.parametrization);
  if (a.iterations) cfg.iterations = *a.iterations;
  if (a.lr_w_multiplier) cfg.lr_w_multiplier = *a.lr_w_multiplier;
  if (a.seed) cfg.seed = *a.seed;
  if (!a.w_init.empty()) cfg.w_init = a.w_init;
  for (const auto& o : a.overrides) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

std::vector<TrainView> load_views(const LoadedScene& scene, const std::vector<size_t>& idx) {
  std::vector<TrainView> views;
  for (size_t i : idx) {
    views.push_back({scene.manifest.views[i].camera, scene.images[i], scene.manifest.views[i].name});
  }
  return views;
}

void print_warnings(const LoadedScene& s) {
  for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
}

int run_train(const TrainArgs& a) {
  TrainState state;
  std::string manifest = a.manifest;
  if (!a.resume.empty()) {
    Checkpoint ck = load_checkpoint(a.resume);
    state = std::move(ck.state);
    if (manifest.empty()) manifest = ck.manifest_path;
    if (a.iterations) state.config.iterations = *a.iterations;
    for (const auto& o : a.overrides) apply_override(state.config, o);
  }
  if (manifest.empty()) throw std::invalid_argument("train needs a manifest");
  const LoadedScene scene = load_manifest(manifest, a.resume.empty());
  print_warnings(scene);
  const TrainTestSplit split = split_train_test(scene.images.size(), a.test_every);
  if (split.warning) std::cerr << "warning: fewer views than the split period\n";
  if (split.train.empty()) throw DataError("no training views after the train/test split");
  const auto views = load_views(scene, split.train);

  if (a.resume.empty()) {
    const TrainConfig cfg = build_config(a);
    InitConfig init;
    init.max_sh_degree = cfg.max_sh_degree;
    init.initial_opacity = cfg.initial_opacity;
    init.seed = cfg.seed;
    parse_weight_init(cfg.w_init, init);
    GaussianSet set = init_from_points(scene.points, cfg.parametrization, init);
    if (cfg.skybox_count > 0) {
      SkyboxConfig sky;
      sky.count = cfg.skybox_count;
      sky.radius = cfg.skybox_radius;
      sky.up = cfg.skybox_up;
      sky.seed = cfg.seed + 1;
      add_skybox(set, sky, init);
    }
    std::vector<Camera> cams;
    for (const auto& v : views) cams.push_back(v.camera);
    state = make_train_state(std::move(set), cams, cfg);
  }

  fs::create_directories(a.out);
  const auto out = [&](const std::string& name) { return (fs::path(a.out) / name).string(); };
  const std::string abs_manifest = fs::absolute(manifest).string();
  {
    std::ofstream cfg_out(out("config.json"));
    cfg_out << config_to_json(state.config).dump(2) << '\n';
  }
  const bool append = !a.resume.empty();
  std::ofstream loss(out("loss.csv"), append ? std::ios::app : std::ios::trunc);
  std::ofstream telemetry(out("telemetry.csv"), append ? std::ios::app : std::ios::trunc);
  if (!append) {
    loss << "iter,view,loss,l1,ssim,psnr,count\n";
    write_telemetry_header(telemetry);
  }
  loss << std::setprecision(10);
  const TrainConfig& cfg = state.config;
  while (state.iteration < cfg.iterations) {
    const StepStats s = train_step(state, views);
    loss << s.iteration << ',' << views[s.view].name << ',' << s.loss << ',' << s.l1 << ','
         << s.ssim << ',' << s.psnr << ',' << s.count << '\n';
    if (cfg.telemetry_interval > 0 && s.iteration % cfg.telemetry_interval == 0) {
      write_telemetry_row(telemetry_snapshot(state.set, s.iteration), telemetry);
      telemetry.flush();
    }
    if (cfg.checkpoint_interval > 0 && s.iteration % cfg.checkpoint_interval == 0) {
      save_checkpoint(state, abs_manifest, out("checkpoint_" + std::to_string(s.iteration) + ".hgsc"));
    }
  }
  save_checkpoint(state, abs_manifest, out("checkpoint_final.hgsc"));
  const TelemetrySnapshot snap = telemetry_snapshot(state.set, state.iteration);
  if (state.set.parametrization == Parametrization::Homogeneous) {
    std::ofstream hist(out("w_histogram.csv"));
    write_weight_histogram(snap, hist);
  }
  std::cout << "trained " << state.iteration << " iterations, " << state.set.size()
            << " Gaussians -> " << out("checkpoint_final.hgsc") << '\n';
  return kOk;
}

struct RenderArgs {
  std::string checkpoint;
  std::string manifest;
  std::string out = "renders";
  std::optional<size_t> view;
  bool all_test = false;
  bool depth = false;
  size_t test_every = 8;
};

RenderConfig render_config(const TrainConfig& cfg) {
  RenderConfig rc;
  rc.near_clip = cfg.near_clip;
  rc.background = cfg.background;
  return rc;
}

int run_render(const RenderArgs& a) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const std::string manifest_path = a.manifest.empty() ? ck.manifest_path : a.manifest;
  std::vector<std::string> warnings;
  const SceneManifest m = read_manifest(manifest_path, &warnings);
  std::vector<size_t> which;
  if (a.all_test || !a.view) {
    which = split_train_test(m.views.size(), a.test_every).test;
  } else {
    if (*a.view >= m.views.size()) throw std::invalid_argument("view index out of range");
    which = {*a.view};
  }
  fs::create_directories(a.out);
  const RenderConfig rc = render_config(ck.state.config);
  for (size_t i : which) {
    const auto& v = m.views[i];
    const RenderOutput r = render(ck.state.set, v.camera, rc);
    write_png(r.radiance, (fs::path(a.out) / (v.name + ".png")).string());
    if (a.depth) write_pfm(r.depth_expected, (fs::path(a.out) / (v.name + "_depth.pfm")).string());
  }
  std::cout << "rendered " << which.size() << " view(s) to " << a.out << '\n';
  return kOk;
}

struct EvalArgs {
  std::string checkpoint;
  std::string manifest;
  std::string out;
  double far_percentile = 95.0;
  size_t test_every = 8;
};

int run_eval(const EvalArgs& a) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const std::string manifest_path = a.manifest.empty() ? ck.manifest_path : a.manifest;
  const LoadedScene scene = load_manifest(manifest_path, false);
  const auto test = split_train_test(scene.images.size(), a.test_every).test;
  bool have_depth = true;
  std::vector<Image> depths;
  for (size_t i : test) {
    if (!scene.depths[i]) have_depth = false;
    else depths.push_back(*scene.depths[i]);
  }
  std::vector<DepthMask> masks;
  if (have_depth && !test.empty()) masks = compute_far_masks(depths, a.far_percentile);
  else std::cerr << "warning: depth maps missing; near/far columns unavailable\n";

  const RenderConfig rc = render_config(ck.state.config);
  MetricReport report;
  for (size_t k = 0; k < test.size(); ++k) {
    const size_t i = test[k];
    const RenderOutput r = render(ck.state.set, scene.manifest.views[i].camera, rc);
    ViewMetrics vm = evaluate_view(r.radiance, scene.images[i], masks.empty() ? nullptr : &masks[k]);
    vm.view_id = scene.manifest.views[i].name;
    vm.split = "test";
    report.views.push_back(vm);
  }
  if (a.out.empty()) {
    write_metric_csv(report, std::cout);
  } else {
    std::ofstream f(a.out);
    if (!f) throw DataError("cannot write " + a.out);
    write_metric_csv(report, f);
  }
  return kOk;
}

struct SimArgs {
  Sim1DConfig cfg;
  std::string out;
  std::string optimizer = "adam";
  std::string weight = "exp";
  bool fixed_w = false;
};

int run_simulate(SimArgs a) {
  if (a.optimizer == "adam") a.cfg.optimizer = Sim1DOptimizer::Adam;
  else if (a.optimizer == "gd") a.cfg.optimizer = Sim1DOptimizer::GradientDescent;
  else throw std::invalid_argument("optimizer must be 'adam' or 'gd'");
  if (a.weight == "exp") a.cfg.weight = Sim1DWeight::Exponential;
  else if (a.weight == "linear") a.cfg.weight = Sim1DWeight::Linear;
  else throw std::invalid_argument("weight activation must be 'exp' or 'linear'");
  a.cfg.optimize_weight = !a.fixed_w;
  a.cfg.validate();
  std::vector<SimTrace> traces = simulate_1d(a.cfg, Sim1DRep::Cartesian);
  for (auto& t : simulate_1d(a.cfg, Sim1DRep::Homogeneous)) traces.push_back(std::move(t));
  std::cout << "representation,target,iterations_to_tol\n";
  for (const auto& t : traces) {
    std::cout << to_string(t.rep) << ',' << t.target << ',';
    if (t.iterations_to_tol) std::cout << *t.iterations_to_tol;
    else std::cout << "not-converged";
    std::cout << '\n';
  }
  if (!a.out.empty()) {
    std::ofstream f(a.out);
    if (!f) throw DataError("cannot write " + a.out);
    emit_convergence_csv(traces, f);
  }
  return kOk;
}

int run_export(const std::string& checkpoint, const std::string& out) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  export_3dgs_ply(ck.state.set, out);
  std::cout << "exported " << ck.state.set.size() << " Gaussians to " << out << '\n';
  return kOk;
}

int run_inspect(const std::string& checkpoint, const std::string& histogram) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  const TrainState& st = ck.state;
  const TelemetrySnapshot snap = telemetry_snapshot(st.set, st.iteration);
  std::cout << std::setprecision(10);
  std::cout << "parametrization: " << to_string(st.set.parametrization) << '\n'
            << "iteration: " << st.iteration << '\n'
            << "count: " << st.set.size() << '\n'
            << "active_sh_degree: " << st.set.active_sh_degree << '\n'
            << "extent: " << st.extent << '\n'
            << "mean_dist_farthest_10pct: " << snap.mean_dist_farthest_10pct << '\n';
  if (st.set.parametrization == Parametrization::Homogeneous) {
    std::cout << "w_distance_spearman: " << weight_distance_correlation(snap) << '\n';
    if (!histogram.empty()) {
      std::ofstream f(histogram);
      if (!f) throw DataError("cannot write " + histogram);
      write_weight_histogram(snap, f);
      std::cout << "w_histogram: " << histogram << '\n';
    }
  } else if (!histogram.empty()) {
    std::cout << "w_histogram: not available for " << to_string(st.set.parametrization) << '\n';
  }
  return kOk;
}

int run_make_fixture(const std::string& out, uint64_t seed, bool small) {
  SyntheticSceneSpec spec = small ? SyntheticSceneSpec::small(seed) : SyntheticSceneSpec{};
  spec.seed = seed;
  const SyntheticScene scene = generate_scene(spec);
  const std::string path = write_scene(scene, out);
  std::cout << path << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CPU Gaussian splatting with Cartesian, homogeneous and inverted-spherical "
               "parametrizations"};
  app.require_subcommand(1);
  std::optional<int> threads;
  app.add_option("--threads", threads, "Worker threads (default: HOGS_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Optimize a Gaussian scene from a manifest");
  train->add_option("manifest", ta.manifest, "Scene manifest (JSON)");
  train->add_option("--out", ta.out, "Output directory")->capture_default_str();
  train->add_option("--config", ta.config, "TrainConfig JSON file");
  train->add_option("--parametrization", ta.parametrization,
                    "cartesian | homogeneous | inverted-spherical (default homogeneous)")
      ->check(CLI::IsMember({"cartesian", "homogeneous", "inverted-spherical"}));
  train->add_option("--iterations", ta.iterations, "Iteration count");
  train->add_option("--w-init", ta.w_init, "Initial w: 1/d, random or a positive number");
  train->add_option("--lr-w-multiplier", ta.lr_w_multiplier, "Multiplier on the w learning rate");
  train->add_option("--seed", ta.seed, "Random seed");
  train->add_option("--resume", ta.resume, "Continue from a checkpoint");
  train->add_option("--test-every", ta.test_every, "Hold out every n-th view")
      ->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--set", ta.overrides, "Config override key=value (repeatable)");

  RenderArgs ra;
  auto* rend = app.add_subcommand("render", "Render views from a checkpoint");
  rend->add_option("checkpoint", ra.checkpoint, "Checkpoint file")->required();
  rend->add_option("--manifest", ra.manifest, "Manifest (default: the one used for training)");
  rend->add_option("--out", ra.out, "Output directory")->capture_default_str();
  auto* view_opt = rend->add_option("--view", ra.view, "Render a single view index");
  rend->add_flag("--all-test", ra.all_test, "Render every test view (default)")->excludes(view_opt);
  rend->add_flag("--depth", ra.depth, "Also write expected depth as PFM");
  rend->add_option("--test-every", ra.test_every, "Hold out every n-th view")
      ->capture_default_str()->check(CLI::PositiveNumber);

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "PSNR/SSIM on test views with near/far masks");
  ev->add_option("checkpoint", ea.checkpoint, "Checkpoint file")->required();
  ev->add_option("--manifest", ea.manifest, "Manifest (default: the one used for training)");
  ev->add_option("--far-percentile", ea.far_percentile, "Depth percentile marking far pixels")
      ->capture_default_str()->check(CLI::Range(0.0, 100.0));
  ev->add_option("--out", ea.out, "CSV report path (default stdout)");
  ev->add_option("--test-every", ea.test_every, "Hold out every n-th view")
      ->capture_default_str()->check(CLI::PositiveNumber);

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate-1d", "1D convergence study, Cartesian vs homogeneous");
  sim->add_option("--lr", sa.cfg.lr, "Learning rate")->capture_default_str();
  sim->add_option("--targets", sa.cfg.targets, "Target positions")->delimiter(',')
      ->capture_default_str();
  sim->add_option("--x0", sa.cfg.x0, "Initial position")->capture_default_str();
  sim->add_option("--w0", sa.cfg.w0, "Initial weight")->capture_default_str();
  sim->add_option("--max-iters", sa.cfg.max_iters, "Iteration cap")->capture_default_str();
  sim->add_option("--tol", sa.cfg.tol, "Convergence tolerance")->capture_default_str();
  sim->add_option("--optimizer", sa.optimizer, "adam | gd")->capture_default_str();
  sim->add_option("--weight", sa.weight, "w activation: exp | linear")->capture_default_str();
  sim->add_flag("--fixed-w", sa.fixed_w, "Optimize x~ only");
  sim->add_option("--out", sa.out, "Trace CSV path");

  std::string export_ck, export_out = "export.ply";
  auto* exp = app.add_subcommand("export", "Write a 3DGS-compatible PLY");
  exp->add_option("checkpoint", export_ck, "Checkpoint file")->required();
  exp->add_option("--out", export_out, "PLY path")->capture_default_str();

  std::string inspect_ck, inspect_hist;
  auto* insp = app.add_subcommand("inspect", "Summarize a checkpoint");
  insp->add_option("checkpoint", inspect_ck, "Checkpoint file")->required();
  insp->add_option("--histogram", inspect_hist, "Write the w histogram CSV here");

  std::string fixture_out = "fixture";
  uint64_t fixture_seed = 7;
  bool fixture_small = false;
  auto* fix = app.add_subcommand("make-fixture", "Write the synthetic near/far scene");
  fix->add_option("--out", fixture_out, "Output directory")->capture_default_str();
  fix->add_option("--seed", fixture_seed, "Random seed")->capture_default_str();
  fix->add_flag("--small", fixture_small, "32x32, fewer Gaussians and views");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (threads) set_thread_count(*threads);
    if (train->parsed()) return run_train(ta);
    if (rend->parsed()) return run_render(ra);
    if (ev->parsed()) return run_eval(ea);
    if (sim->parsed()) return run_simulate(sa);
    if (exp->parsed()) return run_export(export_ck, export_out);
    if (insp->parsed()) return run_inspect(inspect_ck, inspect_hist);
    if (fix->parsed()) return run_make_fixture(fixture_out, fixture_seed, fixture_small);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
