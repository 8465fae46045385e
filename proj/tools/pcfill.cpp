// Command-line front end: projection, completion, benchmark protocol,
// evaluation, weight management, and the self-check suite.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pcfill/cloud_io.h"
#include "pcfill/errors.h"
#include "pcfill/metrics.h"
#include "pcfill/parallel.h"
#include "pcfill/pipeline.h"
#include "pcfill/selfcheck.h"

namespace {

using namespace pcfill;

struct ProfileArgs {
  std::string profile = "pcn";
  std::string config_file;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool seed_given = false;

  Profile resolve() const {
    Profile p = Profile::preset(profile);
    if (!config_file.empty()) apply_config_file(p, config_file);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw InvalidArgument("--set expects key=value, got \"" + kv + "\"");
      }
      apply_config_kv(p, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed_given) p.seed = seed;
    p.validate();
    return p;
  }
};

void add_profile_flags(CLI::App* cmd, ProfileArgs& args) {
  cmd->add_option("--profile", args.profile, "Profile preset: pcn, snet55, tiny-test")
      ->default_val("pcn");
  cmd->add_option("--config", args.config_file, "key = value config file overriding the preset");
  cmd->add_option("--set", args.sets, "Inline override, e.g. --set channels=64 (repeatable)");
  cmd->add_option("--seed", args.seed, "Initialization seed")->each([&](const std::string&) {
    args.seed_given = true;
  });
}

void print_metric(const char* name, double value) {
  std::printf("%s = %.9g\n", name, value);
}

int cmd_project(const std::string& in, const std::string& out_dir, const ProfileArgs& pargs,
                int views_override) {
  const Profile profile = pargs.resolve();
  const PointCloud cloud = read_cloud(in);
  ProjectionParams params;
  params.resolution = profile.resolution;
  params.camera_distance = profile.camera_distance;
  params.densify_radius = profile.densify_radius;
  params.fov_degrees = profile.fov_degrees;
  const int n_views = views_override > 0 ? views_override : profile.n_views;
  const auto vps = projection_viewpoints(n_views, profile.camera_distance);

  std::filesystem::create_directories(out_dir);
  for (std::size_t i = 0; i < vps.size(); ++i) {
    const DepthMap dm = project_depth(cloud, vps[i], params);
    const std::string stem = "view_" + std::to_string(i);
    write_depth_dmb(std::filesystem::path(out_dir) / (stem + ".dmb"), dm);
    write_depth_pgm(std::filesystem::path(out_dir) / (stem + ".pgm"), dm);
  }
  std::printf("wrote %zu depth maps to %s\n", vps.size(), out_dir.c_str());
  return 0;
}

int cmd_complete(const std::string& in, const std::string& weights_path, const std::string& out,
                 const std::string& trace_dir, const ProfileArgs& pargs,
                 const PipelineOptions& opts) {
  const Profile profile = pargs.resolve();
  const PointCloud cloud = read_cloud(in);
  const WeightStore weights = load_weights(weights_path);
  validate_weights(weights, profile);
  const CompletionTrace trace = complete_cloud(cloud, profile, weights, opts);
  write_cloud(out, trace.p_2);
  if (!trace_dir.empty()) write_trace(trace_dir, trace);
  std::printf("completed %zu -> %zu points\n", cloud.size(), trace.p_2.size());
  return 0;
}

int cmd_backproject(const std::string& in, const std::string& out, double sigma,
                    std::uint64_t seed, const ProfileArgs& pargs) {
  const Profile profile = pargs.resolve();
  const DepthMap dm = read_depth_dmb(in);
  ProjectionParams params;
  params.resolution = dm.width;
  params.camera_distance = profile.camera_distance;
  params.densify_radius = profile.densify_radius;
  params.fov_degrees = profile.fov_degrees;
  Rng rng(seed);
  const PointCloud cloud = backproject(dm, params, sigma, sigma > 0.0 ? &rng : nullptr);
  write_cloud(out, cloud);
  std::printf("backprojected %zu points\n", cloud.size());
  return 0;
}

int cmd_protocol(const std::string& in, int viewpoint_index, int missing,
                 const std::string& out_partial, const std::string& out_missing) {
  if (viewpoint_index < 0 || viewpoint_index > 7) {
    throw InvalidArgument("protocol: viewpoint index must be in [0, 7]");
  }
  if (missing != 2048 && missing != 4096 && missing != 6144) {
    throw InvalidArgument("protocol: missing must be 2048, 4096, or 6144");
  }
  const PointCloud gt = read_cloud(in);
  const int n_keep = 2048;
  if (static_cast<int>(gt.size()) < missing + n_keep) {
    throw InvalidArgument("protocol: ground truth needs at least " +
                          std::to_string(missing + n_keep) + " points, got " +
                          std::to_string(gt.size()));
  }
  const auto vp = fixed_test_viewpoints()[viewpoint_index];
  const auto res = viewpoint_crop(gt, vp, missing, n_keep);
  write_cloud(out_partial, res.partial);
  write_cloud(out_missing, res.missing);
  std::printf("partial %zu points, missing %zu points\n", res.partial.size(), res.missing.size());
  return 0;
}

struct MetricSelection {
  bool cd_l1 = false, cd_l2 = false, dcd = false, f1 = false;
};

MetricSelection parse_metric_list(const std::string& list) {
  MetricSelection sel;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "cd_l1") sel.cd_l1 = true;
    else if (item == "cd_l2") sel.cd_l2 = true;
    else if (item == "dcd") sel.dcd = true;
    else if (item == "f1") sel.f1 = true;
    else if (item == "all") sel = {true, true, true, true};
    else throw InvalidArgument("eval: unknown metric \"" + item + "\"");
  }
  return sel;
}

void print_report(const MetricReport& rep, const MetricSelection& sel) {
  if (sel.cd_l1) {
    print_metric("cd_l1", rep.cd_l1);
    print_metric("cd_l1_pred_to_gt", rep.cd_l1_pred_to_gt);
    print_metric("cd_l1_gt_to_pred", rep.cd_l1_gt_to_pred);
  }
  if (sel.cd_l2) {
    print_metric("cd_l2", rep.cd_l2);
    print_metric("cd_l2_pred_to_gt", rep.cd_l2_pred_to_gt);
    print_metric("cd_l2_gt_to_pred", rep.cd_l2_gt_to_pred);
  }
  if (sel.dcd) print_metric("dcd", rep.dcd);
  if (sel.f1) print_metric("f1", rep.f1);
}

int cmd_eval(const std::string& pred, const std::string& gt, const std::string& pairs_file,
             const std::string& metrics_list, double tau, double alpha,
             const std::string& csv_path) {
  const MetricSelection sel = parse_metric_list(metrics_list);

  std::vector<std::pair<std::string, std::string>> pairs;
  if (!pairs_file.empty()) {
    std::ifstream f(pairs_file);
    if (!f) throw InvalidArgument("cannot open pairs file: " + pairs_file);
    std::string line;
    while (std::getline(f, line)) {
      std::istringstream ss(line);
      std::string a, b;
      if (!(ss >> a >> b)) {
        if (a.empty()) continue;  // blank line
        throw InvalidArgument("pairs file: expected \"pred gt\" per line");
      }
      pairs.emplace_back(a, b);
    }
    if (pairs.empty()) throw InvalidArgument("pairs file has no entries");
  } else {
    if (pred.empty() || gt.empty()) {
      throw InvalidArgument("eval: need --pred and --gt (or --pairs)");
    }
    pairs.emplace_back(pred, gt);
  }

  std::ofstream csv;
  if (!csv_path.empty()) {
    csv.open(csv_path);
    if (!csv) throw InvalidArgument("cannot open for writing: " + csv_path);
    csv << "pred,gt";
    if (sel.cd_l1) csv << ",cd_l1";
    if (sel.cd_l2) csv << ",cd_l2";
    if (sel.dcd) csv << ",dcd";
    if (sel.f1) csv << ",f1";
    csv << "\n";
  }

  MetricReport mean;
  mean.cd_l1 = mean.cd_l2 = mean.dcd = mean.f1 = 0.0;
  for (const auto& [pred_path, gt_path] : pairs) {
    const PointCloud a = read_cloud(pred_path);
    const PointCloud b = read_cloud(gt_path);
    const MetricReport rep = evaluate_pair(a, b, sel.cd_l1, sel.cd_l2, sel.dcd, sel.f1, tau, alpha);
    if (pairs.size() == 1) {
      print_report(rep, sel);
    }
    if (csv.is_open()) {
      csv << pred_path << ',' << gt_path;
      char buf[64];
      auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), ",%.9g", v);
        csv << buf;
      };
      if (sel.cd_l1) put(rep.cd_l1);
      if (sel.cd_l2) put(rep.cd_l2);
      if (sel.dcd) put(rep.dcd);
      if (sel.f1) put(rep.f1);
      csv << "\n";
    }
    mean.cd_l1 += rep.cd_l1;
    mean.cd_l2 += rep.cd_l2;
    mean.dcd += rep.dcd;
    mean.f1 += rep.f1;
  }
  if (pairs.size() > 1) {
    const double n = static_cast<double>(pairs.size());
    if (sel.cd_l1) print_metric("mean_cd_l1", mean.cd_l1 / n);
    if (sel.cd_l2) print_metric("mean_cd_l2", mean.cd_l2 / n);
    if (sel.dcd) print_metric("mean_dcd", mean.dcd / n);
    if (sel.f1) print_metric("mean_f1", mean.f1 / n);
  }
  return 0;
}

int cmd_init_weights(const ProfileArgs& pargs, const std::string& out) {
  const Profile profile = pargs.resolve();
  const WeightStore w = init_weights(profile);
  save_weights(w, out);
  std::printf("wrote %zu tensors for profile %s (seed %llu) to %s\n", w.size(),
              profile.name.c_str(), static_cast<unsigned long long>(profile.seed), out.c_str());
  return 0;
}

int cmd_fit_demo(int points, int steps, double lr, std::uint64_t seed, const std::string& out) {
  const FitDemoSetup demo = fit_demo_setup(points, seed);
  const FitResult fit = toy_fit(demo.start, demo.target, steps, lr);

  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw InvalidArgument("cannot open for writing: " + out);
    f << "step,loss\n";
    char buf[64];
    for (std::size_t i = 0; i < fit.loss_curve.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%.9g\n", i, fit.loss_curve[i]);
      f << buf;
    }
  }
  const double initial = fit.loss_curve.front();
  const double final_loss = fit.loss_curve.back();
  print_metric("initial_loss", initial);
  print_metric("final_loss", final_loss);
  print_metric("ratio", final_loss / initial);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"point cloud completion toolkit"};
  app.require_subcommand(1);

  int threads = 1;
  app.add_option("--threads", threads, "Worker threads (results are thread-count independent)")
      ->default_val(1);

  // project
  auto* project = app.add_subcommand("project", "Render a cloud into multi-view depth maps");
  std::string prj_in, prj_out;
  int prj_views = 0;
  ProfileArgs prj_profile;
  project->add_option("--in", prj_in, "Input cloud (.pcb binary or x-y-z text)")->required();
  project->add_option("--out-dir", prj_out, "Output directory")->required();
  project->add_option("--views", prj_views, "View count override: 1, 3, or 6");
  add_profile_flags(project, prj_profile);

  // complete
  auto* complete = app.add_subcommand("complete", "Run the completion pipeline");
  std::string cmp_in, cmp_weights, cmp_out, cmp_trace;
  ProfileArgs cmp_profile;
  PipelineOptions cmp_opts;
  double fixed_alpha = -1.0;
  complete->add_option("--in", cmp_in, "Partial input cloud")->required();
  complete->add_option("--weights", cmp_weights, "PSW1 weight container")->required();
  complete->add_option("--out", cmp_out, "Output cloud path")->required();
  complete->add_option("--trace", cmp_trace, "Directory for the full coarse-to-fine trace");
  complete->add_flag("--no-projection", cmp_opts.no_projection,
                     "Skip the depth branch (shape descriptor from points alone)");
  complete->add_flag("--no-incompleteness", cmp_opts.no_incompleteness,
                     "Zero the incompleteness embedding");
  complete->add_flag("--no-alignment", cmp_opts.no_alignment, "Disable the alignment path");
  complete->add_flag("--no-analysis", cmp_opts.no_analysis, "Use the alignment path only");
  complete->add_option("--fixed-alpha", fixed_alpha, "Bypass the gate with a constant in (0, 1)");
  add_profile_flags(complete, cmp_profile);

  // backproject
  auto* backprj = app.add_subcommand("backproject", "Lift a depth map back to a point cloud");
  std::string bp_in, bp_out;
  double bp_sigma = 0.0;
  std::uint64_t bp_seed = 0;
  ProfileArgs bp_profile;
  backprj->add_option("--in", bp_in, "DMB1 depth map")->required();
  backprj->add_option("--out", bp_out, "Output cloud path")->required();
  backprj->add_option("--sigma", bp_sigma, "Gaussian noise standard deviation")->default_val(0.0);
  backprj->add_option("--noise-seed", bp_seed, "Seed for the noise stream")->default_val(0);
  add_profile_flags(backprj, bp_profile);

  // protocol
  auto* protocol = app.add_subcommand("protocol", "Viewpoint-crop benchmark protocol");
  std::string prt_in, prt_partial, prt_missing_path;
  int prt_vp = 0, prt_missing = 2048;
  protocol->add_option("--in", prt_in, "Ground-truth cloud")->required();
  protocol->add_option("--viewpoint", prt_vp, "Fixed viewpoint index, 0-7")->required();
  protocol->add_option("--missing", prt_missing, "Points to remove: 2048, 4096, or 6144")
      ->required();
  protocol->add_option("--out-partial", prt_partial, "Partial output path")->required();
  protocol->add_option("--out-missing", prt_missing_path, "Missing output path")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate prediction(s) against ground truth");
  std::string ev_pred, ev_gt, ev_pairs, ev_metrics = "all", ev_csv;
  double ev_tau = 0.01, ev_alpha = 1000.0;
  eval->add_option("--pred", ev_pred, "Predicted cloud");
  eval->add_option("--gt", ev_gt, "Ground-truth cloud");
  eval->add_option("--pairs", ev_pairs, "Batch file with \"pred gt\" per line");
  eval->add_option("--metrics", ev_metrics, "Comma list of cd_l1,cd_l2,dcd,f1 (default all)");
  eval->add_option("--tau", ev_tau, "F-score distance threshold")->default_val(0.01);
  eval->add_option("--alpha", ev_alpha, "Density-aware chamfer sharpness")->default_val(1000.0);
  eval->add_option("--csv", ev_csv, "Write one CSV row per evaluated pair");

  // selfcheck
  auto* selfcheck = app.add_subcommand("selfcheck", "Run the invariant and oracle suite");

  // init-weights
  auto* initw = app.add_subcommand("init-weights", "Deterministically initialize weights");
  std::string iw_out;
  ProfileArgs iw_profile;
  initw->add_option("--out", iw_out, "Output PSW1 path")->required();
  add_profile_flags(initw, iw_profile);

  // fit-demo
  auto* fit = app.add_subcommand("fit-demo", "Gradient-descent demo on the chamfer objective");
  int fd_points = 128, fd_steps = 500;
  double fd_lr = 0.05;
  std::uint64_t fd_seed = 7;
  std::string fd_out;
  fit->add_option("--points", fd_points, "Point count")->default_val(128);
  fit->add_option("--steps", fd_steps, "Descent steps")->default_val(500);
  fit->add_option("--lr", fd_lr, "Learning rate")->default_val(0.05);
  fit->add_option("--seed", fd_seed, "Seed for the start cloud")->default_val(7);
  fit->add_option("--out", fd_out, "Loss-curve CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  pcfill::set_num_threads(threads);

  try {
    if (*project) return cmd_project(prj_in, prj_out, prj_profile, prj_views);
    if (*complete) {
      if (fixed_alpha >= 0.0) {
        if (fixed_alpha <= 0.0 || fixed_alpha >= 1.0) {
          throw InvalidArgument("--fixed-alpha must be strictly inside (0, 1)");
        }
        cmp_opts.fixed_alpha = fixed_alpha;
      }
      return cmd_complete(cmp_in, cmp_weights, cmp_out, cmp_trace, cmp_profile, cmp_opts);
    }
    if (*backprj) return cmd_backproject(bp_in, bp_out, bp_sigma, bp_seed, bp_profile);
    if (*protocol) return cmd_protocol(prt_in, prt_vp, prt_missing, prt_partial, prt_missing_path);
    if (*eval) return cmd_eval(ev_pred, ev_gt, ev_pairs, ev_metrics, ev_tau, ev_alpha, ev_csv);
    if (*selfcheck) return run_selfcheck(std::cout) == 0 ? 0 : 4;
    if (*initw) return cmd_init_weights(iw_profile, iw_out);
    if (*fit) return cmd_fit_demo(fd_points, fd_steps, fd_lr, fd_seed, fd_out);
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const InvariantViolation& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  }
  return 0;
}
