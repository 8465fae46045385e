// Acceptance suite: runs every contract criterion end to end and prints
// one pass/fail line per criterion. Usage: pcfill_acceptance <cli-binary>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "pcfill/cloud_io.h"
#include "pcfill/errors.h"
#include "pcfill/pipeline.h"
#include "pcfill/weights.h"
#include "test_support.h"

using namespace pcfill;
using namespace testsupport;

namespace {

std::string g_cli;
std::filesystem::path g_dir;

struct Criterion {
  int number;
  std::string title;
  std::function<void(std::ostringstream&)> body;  // throws on failure
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void require(bool cond, const std::string& what) {
  if (!cond) throw std::runtime_error(what);
}

int run_cli(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  require(status != -1, "failed to spawn CLI");
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  require(f.good(), "cannot read " + p.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// Full-size profiles with feature widths reduced through the config
// mechanism; every point-count contract stays at the paper values.
Profile reduced(const std::string& preset) {
  Profile p = Profile::preset(preset);
  for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{
           {"channels", "48"},
           {"point_feat", "32"},
           {"sdg_dim1", "64"},
           {"sdg_dim2", "48"},
           {"ec1_out", "16"},
           {"ec2_out", "32"}}) {
    apply_config_kv(p, k, v);
  }
  p.validate();
  return p;
}

std::filesystem::path write_reduced_config() {
  const auto path = g_dir / "reduced.cfg";
  std::ofstream f(path);
  f << "# reduced widths for acceptance runs\n"
    << "channels = 48\npoint_feat = 32\nsdg_dim1 = 64\nsdg_dim2 = 48\n"
    << "ec1_out = 16\nec2_out = 32\n";
  return path;
}

void check_shape_contract(const std::string& preset, int want_pc, int want_p0, int want_p1,
                          int want_p2, std::ostringstream& note) {
  Profile p = reduced(preset);
  p.seed = 7;
  const auto w = init_weights(p);
  Rng rng(1234);
  const auto cloud = random_cloud(rng, p.n_input, preset == "pcn" ? 0.5 : 0.9);
  const auto t0 = std::chrono::steady_clock::now();
  const auto trace = complete_cloud(cloud, p, w);
  const double dt = seconds_since(t0);
  require(static_cast<int>(trace.p_c.size()) == want_pc, preset + ": |P_c| wrong");
  require(static_cast<int>(trace.p_0.size()) == want_p0, preset + ": |P_0| wrong");
  require(static_cast<int>(trace.p_1.size()) == want_p1, preset + ": |P_1| wrong");
  require(static_cast<int>(trace.p_2.size()) == want_p2, preset + ": |P_2| wrong");
  require(dt < 30.0, preset + ": run took " + std::to_string(dt) + " s (budget 30 s)");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s %d/%d/%d/%d in %.1f s; ", preset.c_str(), want_pc, want_p0,
                want_p1, want_p2, dt);
  note << buf;
}

void criterion_shapes(std::ostringstream& note) {
  check_shape_contract("pcn", 512, 512, 2048, 16384, note);
  check_shape_contract("snet55", 1024, 1024, 2048, 8192, note);
}

void criterion_kernel_oracles(std::ostringstream& note) {
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed * 101);
    const auto ref = random_cloud(rng, 512);
    const auto query = random_cloud(rng, 64);

    const auto kn = knn(query, ref, 8);
    for (std::size_t qi = 0; qi < query.size(); ++qi) {
      require(kn[qi] == knn_bruteforce(query, ref, qi, 8), "knn oracle mismatch");
    }
    require(fps(ref, 48) == fps_bruteforce(ref, 48), "fps oracle mismatch");

    const Viewpoint vp{{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)}};
    const auto crop = viewpoint_crop(ref, vp, 128, 256);
    std::vector<std::pair<double, std::uint32_t>> order;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      order.emplace_back(distance(ref[i], vp.position), static_cast<std::uint32_t>(i));
    }
    std::stable_sort(order.begin(), order.end());
    IndexSet miss;
    for (std::size_t i = ref.size() - 128; i < ref.size(); ++i) miss.push_back(order[i].second);
    std::sort(miss.begin(), miss.end());
    require(crop.missing == gather(ref, miss), "viewpoint_crop oracle mismatch");
    require(crop.partial.size() == 256 && crop.missing.size() == 128, "crop sizes");

    const auto dists = nearest_distance_field(query, ref);
    const auto want = ndf_bruteforce(query, ref);
    for (std::size_t i = 0; i < want.size(); ++i) {
      require(std::abs(dists[i] - want[i]) <= 1e-10, "distance field oracle mismatch");
    }

    const auto x = random_cloud(rng, 384);
    const auto y = random_cloud(rng, 384);
    for (auto v : {ChamferVariant::Eq5, ChamferVariant::L1Half, ChamferVariant::L2Squared}) {
      require(std::abs(chamfer(x, y, v) - chamfer_bruteforce(x, y, v)) <= 1e-10,
              "chamfer oracle mismatch");
    }
    require(std::abs(dcd(x, y) - dcd_bruteforce(x, y, 1000.0)) <= 1e-10, "dcd oracle mismatch");

    std::vector<PointCloud> gallery;
    for (int g = 0; g < 10; ++g) gallery.push_back(random_cloud(rng, 96));
    const auto hit = mmd(x, gallery);
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      const double v = chamfer_bruteforce(x, gallery[g], ChamferVariant::L2Squared);
      if (v < best) {
        best = v;
        arg = g;
      }
    }
    require(std::abs(hit.value - best) <= 1e-10 && hit.best_index == arg, "mmd oracle mismatch");
  }
  const double dt = seconds_since(t0);
  require(dt < 60.0, "kernel suite exceeded 60 s");
  note << "20 seeded instances per kernel in " << static_cast<int>(dt * 1000) << " ms";
}

void criterion_eq1(std::ostringstream& note) {
  Profile p = Profile::preset("tiny-test");
  p.seed = 31;
  const auto w = init_weights(p);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed * 7);
    const auto x = random_features(rng, 16, 32);
    const FeatureMatrix zeros(16, 32);
    const auto a = ia_self_attention(x, zeros, "sdg.i1.ia", w);
    const auto b = self_attention(x, "sdg.i1.ia", w, /*scaled=*/false);
    worst = std::max(worst, max_abs_diff(a, b));
  }
  require(worst <= 1e-12, "reduction differs by " + std::to_string(worst));
  note << "max |diff| = " << worst << " over 10 instances";
}

void criterion_eq2(std::ostringstream& note) {
  Rng rng(32);
  const auto p_in = random_cloud(rng, 128);
  const auto zero_field = incompleteness_embed(p_in, p_in, 0.2, 32);
  for (std::size_t i = 0; i < p_in.size(); ++i) {
    require(zero_field.d[i] == 0.0, "self distance not zero");
    for (int k = 0; k < 16; ++k) {
      require(zero_field.h(static_cast<int>(i), 2 * k) == 0.0, "sin(0) channel not 0");
      require(zero_field.h(static_cast<int>(i), 2 * k + 1) == 1.0, "cos(0) channel not 1");
    }
  }
  // gamma = 0.2 scaling against a manual evaluation of the embedding.
  const auto probe = random_cloud(rng, 64);
  const auto field = incompleteness_embed(probe, p_in, 0.2, 32);
  const auto d = ndf_bruteforce(probe, p_in);
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double t = d[i] / 0.2;
    for (int k = 0; k < 16; ++k) {
      const double freq = 1.0 / std::pow(10000.0, (2.0 * k) / 32.0);
      worst = std::max(worst, std::abs(field.h(static_cast<int>(i), 2 * k) - std::sin(t * freq)));
      worst = std::max(worst,
                       std::abs(field.h(static_cast<int>(i), 2 * k + 1) - std::cos(t * freq)));
    }
  }
  require(worst <= 1e-12, "gamma scaling differs by " + std::to_string(worst));
  note << "zero case exact, scaling max |diff| = " << worst;
}

void criterion_eq3(std::ostringstream& note) {
  Profile p = Profile::preset("tiny-test");
  p.seed = 33;
  const auto w = init_weights(p);
  Rng rng(34);
  const int n = 24, d = 32;
  const auto f_q = random_features(rng, n, d);
  const auto f_qp = random_features(rng, n, d, 3.0);
  const auto f_hp = random_features(rng, n, d, 3.0);

  const auto sel = path_select(f_qp, f_hp, f_q, nullptr, 0, w);
  for (double a : sel.gate.alpha) require(a > 0.0 && a < 1.0, "alpha escaped (0, 1)");

  WeightStore wz;
  for (const auto& name : w.names()) {
    auto t = w.get(name);
    if (name.rfind("sdg.i1.gate", 0) == 0) std::fill(t.data.begin(), t.data.end(), 0.0f);
    wz.add(name, t.shape, t.data);
  }
  const auto half = path_select(f_qp, f_hp, f_q, nullptr, 0, wz);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    require(half.gate.alpha[i] == 0.5, "zero logit did not produce alpha = 0.5");
    for (int c = 0; c < d; ++c) {
      worst = std::max(worst,
                       std::abs(half.f_l_prime(i, c) - 0.5 * (f_qp(i, c) + f_hp(i, c))));
    }
  }
  require(worst <= 1e-12, "0.5 blend off by " + std::to_string(worst));

  const auto equal_a = path_select(f_qp, f_qp, f_q, nullptr, 0, w);
  const auto equal_b = path_select(f_qp, f_qp, f_q, nullptr, 0, wz);
  const double indep = std::max(max_abs_diff(equal_a.f_l_prime, f_qp),
                                max_abs_diff(equal_b.f_l_prime, f_qp));
  require(indep <= 1e-12, "equal-path output depends on alpha");
  note << "alpha in (0,1); exact 0.5 blend; alpha-independence diff = " << indep;
}

void criterion_gradcheck(std::ostringstream& note) {
  const auto t0 = std::chrono::steady_clock::now();
  const double step = 1e-5;
  int instances = 0;
  std::uint64_t seed = 1;
  double worst = 0.0;
  while (instances < 20) {
    Rng rng(seed++ * 37);
    PointCloud x = random_cloud(rng, 64);
    const auto y = random_cloud(rng, 48);
    if (min_nn_margin(x, y) < 1e-3) continue;
    ++instances;
    for (auto v : {ChamferVariant::Eq5, ChamferVariant::L1Half, ChamferVariant::L2Squared}) {
      const auto grad = chamfer_grad(x, y, v);
      for (std::size_t i = 0; i < x.size(); i += 7) {
        for (int axis = 0; axis < 3; ++axis) {
          auto bump = [&](double delta) {
            PointCloud xx = x;
            double* c = axis == 0 ? &xx[i].x : axis == 1 ? &xx[i].y : &xx[i].z;
            *c += delta;
            return chamfer(xx, y, v);
          };
          const double fd = (bump(step) - bump(-step)) / (2.0 * step);
          const double an = axis == 0 ? grad[i].x : axis == 1 ? grad[i].y : grad[i].z;
          const double rel = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
          worst = std::max(worst, rel);
          require(rel <= 1e-4, "finite-difference mismatch " + std::to_string(rel));
        }
      }
    }
  }
  const double dt = seconds_since(t0);
  require(dt < 30.0, "gradient check exceeded 30 s");
  note << "20 instances, worst relative error " << worst;
}

void criterion_toy_descent(std::ostringstream& note) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto demo = fit_demo_setup(128, 7);
  const auto fit = toy_fit(demo.start, demo.target, 500, 0.05);
  const double dt = seconds_since(t0);
  const double ratio = fit.loss_curve.back() / fit.loss_curve.front();
  require(dt < 10.0, "descent exceeded 10 s");
  note << "final/initial = " << ratio << " after 500 steps at lr 0.05 in " << dt
       << " s (require < 0.10)";
  require(ratio < 0.10, "final loss is " + std::to_string(100.0 * ratio) + "% of initial");
}

void criterion_metric_identities(std::ostringstream& note) {
  Rng rng(41);
  const auto x = random_cloud(rng, 128);
  require(chamfer(x, x, ChamferVariant::Eq5) == 0.0, "cd(X,X) != 0");
  require(chamfer(x, x, ChamferVariant::L1Half) == 0.0, "cd_l1(X,X) != 0");
  require(chamfer(x, x, ChamferVariant::L2Squared) == 0.0, "cd_l2(X,X) != 0");
  require(f1_score(x, x) == 1.0, "f1(X,X) != 1");
  require(dcd(x, x) == 0.0, "dcd(X,X) != 0");

  const auto y = random_cloud(rng, 112);
  const double angle = 1.234;
  const Vec3 t{0.5, -0.25, 0.75};
  auto rigid = [&](const PointCloud& c) {
    PointCloud out;
    for (const auto& p : c) {
      out.push_back({std::cos(angle) * p.x - std::sin(angle) * p.y + t.x,
                     std::sin(angle) * p.x + std::cos(angle) * p.y + t.y, p.z + t.z});
    }
    return out;
  };
  double worst = 0.0;
  for (auto v : {ChamferVariant::Eq5, ChamferVariant::L1Half, ChamferVariant::L2Squared}) {
    worst = std::max(worst, std::abs(chamfer(x, y, v) - chamfer(rigid(x), rigid(y), v)));
  }
  worst = std::max(worst, std::abs(dcd(x, y) - dcd(rigid(x), rigid(y))));
  worst = std::max(worst, std::abs(f1_score(x, y) - f1_score(rigid(x), rigid(y))));
  require(worst <= 1e-9, "rigid-motion drift " + std::to_string(worst));

  const double s = 1.618;
  PointCloud xs, ys;
  for (const auto& p : x) xs.push_back(p * s);
  for (const auto& p : y) ys.push_back(p * s);
  const double e1 = std::abs(chamfer(xs, ys, ChamferVariant::Eq5) -
                             s * chamfer(x, y, ChamferVariant::Eq5));
  const double e2 = std::abs(chamfer(xs, ys, ChamferVariant::L2Squared) -
                             s * s * chamfer(x, y, ChamferVariant::L2Squared));
  require(std::max(e1, e2) <= 1e-9, "scale covariance drift");
  note << "identities exact; rigid drift " << worst << "; scale drift " << std::max(e1, e2);
}

void criterion_projection_roundtrip(std::ostringstream& note) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int res : {64, 224}) {
    Rng rng(42);
    const auto cloud = random_cloud(rng, 1024, 0.5);
    ProjectionParams params;
    params.resolution = res;
    params.camera_distance = 0.7;
    params.densify_radius = 0;
    const double bound = params.camera_distance *
                         std::tan(params.fov_degrees * 3.14159265358979323846 / 360.0) * 2.0 /
                         res * std::sqrt(2.0);
    for (const auto& vp : orthogonal_viewpoints(params.camera_distance)) {
      const auto rec = backproject(project_depth(cloud, vp, params), params);
      for (const auto& p : rec) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : cloud) best = std::min(best, distance(p, q));
        require(best <= bound, "round-trip point beyond the pixel-footprint bound");
      }
    }
  }
  const double dt = seconds_since(t0);
  require(dt < 10.0, "round trip exceeded 10 s");
  note << "64^2 and 224^2 within the analytic bound in " << dt << " s";
}

void criterion_cli_determinism(std::ostringstream& note) {
  const auto cfg = write_reduced_config();
  (void)cfg;
  // init-weights twice.
  const auto w1 = g_dir / "w1.psw";
  const auto w2 = g_dir / "w2.psw";
  require(run_cli("init-weights --profile tiny-test --seed 5 --out " + w1.string()) == 0,
          "init-weights failed");
  require(run_cli("init-weights --profile tiny-test --seed 5 --out " + w2.string()) == 0,
          "init-weights failed");
  require(slurp(w1) == slurp(w2), "init-weights outputs differ");

  // complete twice plus a different thread count.
  Rng rng(43);
  const auto input = g_dir / "in.pcb";
  write_cloud_pcb(input, random_cloud(rng, 256, 0.9));
  const auto o1 = g_dir / "o1.pcb";
  const auto o2 = g_dir / "o2.pcb";
  const auto o3 = g_dir / "o3.pcb";
  const std::string base = "complete --profile tiny-test --in " + input.string() + " --weights " +
                           w1.string() + " --out ";
  require(run_cli(base + o1.string()) == 0, "complete failed");
  require(run_cli(base + o2.string()) == 0, "complete failed");
  require(run_cli("--threads 4 " + base + o3.string()) == 0, "complete --threads failed");
  require(slurp(o1) == slurp(o2), "complete outputs differ between runs");
  require(slurp(o1) == slurp(o3), "complete output differs across thread counts");

  // protocol twice.
  const auto gt = g_dir / "gt.pcb";
  write_cloud_pcb(gt, random_cloud(rng, 8192, 1.0));
  const auto pa = g_dir / "pa.pcb";
  const auto ma = g_dir / "ma.pcb";
  const auto pb = g_dir / "pb.pcb";
  const auto mb = g_dir / "mb.pcb";
  require(run_cli("protocol --in " + gt.string() + " --viewpoint 2 --missing 4096 --out-partial " +
                  pa.string() + " --out-missing " + ma.string()) == 0,
          "protocol failed");
  require(run_cli("protocol --in " + gt.string() + " --viewpoint 2 --missing 4096 --out-partial " +
                  pb.string() + " --out-missing " + mb.string()) == 0,
          "protocol failed");
  require(slurp(pa) == slurp(pb) && slurp(ma) == slurp(mb), "protocol outputs differ");
  require(read_cloud_pcb(pa).size() == 2048, "protocol partial size wrong");
  note << "complete/init-weights/protocol byte-identical across runs and thread counts";
}

void criterion_ablations(std::ostringstream& note) {
  Profile p = reduced("pcn");
  p.seed = 44;
  const auto w = init_weights(p);
  Rng rng(45);
  const auto cloud = random_cloud(rng, p.n_input, 0.5);
  const char* names[] = {"A", "G", "H", "I", "J"};
  std::vector<PipelineOptions> variants(5);
  variants[0].no_projection = true;
  variants[1].no_incompleteness = true;
  variants[2].no_alignment = true;
  variants[3].no_analysis = true;
  variants[4].fixed_alpha = 0.5;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const auto trace = complete_cloud(cloud, p, w, variants[i]);
    require(trace.p_c.size() == 512 && trace.p_0.size() == 512 && trace.p_1.size() == 2048 &&
                trace.p_2.size() == 16384,
            std::string("variant ") + names[i] + " broke the shape contract");
    note << names[i] << " ";
  }
  note << "all satisfy 512/512/2048/16384";
}

void criterion_formats(std::ostringstream& note) {
  // PCB1 byte-stable round trip.
  Rng rng(46);
  const auto c1 = g_dir / "fmt_a.pcb";
  const auto c2 = g_dir / "fmt_b.pcb";
  write_cloud_pcb(c1, random_cloud(rng, 123, 0.8));
  write_cloud_pcb(c2, read_cloud_pcb(c1));
  require(slurp(c1) == slurp(c2), "PCB1 round trip not bitwise");

  // DMB1 byte-stable round trip.
  ProjectionParams params;
  params.resolution = 64;
  params.camera_distance = 1.5;
  const auto dm = project_depth(random_cloud(rng, 256, 0.9), Viewpoint{{0, 0, 1.5}}, params);
  const auto d1 = g_dir / "fmt_a.dmb";
  const auto d2 = g_dir / "fmt_b.dmb";
  write_depth_dmb(d1, dm);
  write_depth_dmb(d2, read_depth_dmb(d1));
  require(slurp(d1) == slurp(d2), "DMB1 round trip not bitwise");

  // PSW1 byte-stable round trip.
  Profile p = Profile::preset("tiny-test");
  p.seed = 47;
  const auto w = init_weights(p);
  const auto s1 = g_dir / "fmt_a.psw";
  const auto s2 = g_dir / "fmt_b.psw";
  save_weights(w, s1);
  save_weights(load_weights(s1), s2);
  require(slurp(s1) == slurp(s2), "PSW1 round trip not bitwise");

  // Corrupted magics must exit with code 3 through the CLI.
  auto corrupt_magic = [&](const std::filesystem::path& src, const std::filesystem::path& dst) {
    auto bytes = slurp(src);
    bytes[0] ^= 0x7f;
    std::ofstream f(dst, std::ios::binary);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  };
  const auto bad_pcb = g_dir / "bad.pcb";
  const auto bad_dmb = g_dir / "bad.dmb";
  const auto bad_psw = g_dir / "bad.psw";
  corrupt_magic(c1, bad_pcb);
  corrupt_magic(d1, bad_dmb);
  corrupt_magic(s1, bad_psw);

  int code = run_cli("eval --pred " + bad_pcb.string() + " --gt " + c1.string());
  require(code == 3, "corrupt PCB1 exited " + std::to_string(code) + ", want 3");
  code = run_cli("backproject --in " + bad_dmb.string() + " --out " + (g_dir / "x.pcb").string());
  require(code == 3, "corrupt DMB1 exited " + std::to_string(code) + ", want 3");
  code = run_cli("complete --profile tiny-test --in " + c1.string() + " --weights " +
                 bad_psw.string() + " --out " + (g_dir / "y.pcb").string());
  require(code == 3, "corrupt PSW1 exited " + std::to_string(code) + ", want 3");
  note << "PCB1/DMB1/PSW1 bitwise round trips; corrupt magic exits 3";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: pcfill_acceptance <path-to-pcfill-cli>\n");
    return 64;
  }
  g_cli = argv[1];
  g_dir = std::filesystem::temp_directory_path() / "pcfill_acceptance";
  std::filesystem::remove_all(g_dir);
  std::filesystem::create_directories(g_dir);

  const std::vector<Criterion> criteria = {
      {1, "shape contracts (pcn, snet55)", criterion_shapes},
      {2, "kernel oracle equivalence", criterion_kernel_oracles},
      {3, "incompleteness-aware attention reduction at h = 0", criterion_eq1},
      {4, "incompleteness embedding zero case and gamma scaling", criterion_eq2},
      {5, "path gate range, exact half blend, alpha independence", criterion_eq3},
      {6, "chamfer gradient vs central finite differences", criterion_gradcheck},
      {7, "toy descent reaches < 10% of the initial loss", criterion_toy_descent},
      {8, "metric identities, rigid invariance, scale covariance", criterion_metric_identities},
      {9, "projection round trip within the pixel-footprint bound", criterion_projection_roundtrip},
      {10, "byte-identical CLI outputs across runs and thread counts", criterion_cli_determinism},
      {11, "ablation variants A/G/H/I/J keep the shape contracts", criterion_ablations},
      {12, "container round trips and corrupt-magic exit codes", criterion_formats},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    std::ostringstream note;
    bool ok = true;
    std::string error;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(note);
    } catch (const std::exception& e) {
      ok = false;
      error = e.what();
    }
    const double dt = seconds_since(t0);
    if (!ok) ++failures;
    std::printf("criterion %2d [%s] %-55s (%6.2f s) %s%s\n", c.number, ok ? "PASS" : "FAIL",
                c.title.c_str(), dt, note.str().c_str(), ok ? "" : ("; " + error).c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
