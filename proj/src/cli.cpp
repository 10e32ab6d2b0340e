#include "genreg/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "genreg/bench.hpp"
#include "genreg/cloud_io.hpp"
#include "genreg/config.hpp"
#include "genreg/depth_io.hpp"
#include "genreg/feature_io.hpp"
#include "genreg/parallel.hpp"
#include "genreg/pipeline.hpp"
#include "genreg/report.hpp"

namespace genreg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Raised for anything the user must fix (bad paths, formats, flags).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RegisterArgs {
  std::string src, tgt, src_geo, tgt_geo, src_img, tgt_img, config, fusion, out, gt;
  double radius = 0.05;
};

RigidTransform read_transform_json(const fs::path& path) {
  const json j = load_json_file(path);
  RigidTransform t;
  try {
    const auto r = j.at("rotation").get<std::vector<double>>();
    const auto tr = j.at("translation").get<std::vector<double>>();
    if (r.size() != 9 || tr.size() != 3) throw UsageError(path.string() + ": rotation needs 9 values, translation 3");
    for (int i = 0; i < 9; ++i) t.rotation(i / 3, i % 3) = r[i];
    t.translation = Vec3(tr[0], tr[1], tr[2]);
  } catch (const json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
  if (!t.is_valid(1e-6)) throw UsageError(path.string() + ": rotation is not orthonormal");
  return t;
}

json transform_json(const RigidTransform& t) {
  json r = json::array();
  for (int i = 0; i < 9; ++i) r.push_back(t.rotation(i / 3, i % 3));
  return {{"rotation", r}, {"translation", {t.translation.x(), t.translation.y(), t.translation.z()}}};
}

struct LoadedProblem {
  PointCloud src, tgt;
  FeatureField src_geo, tgt_geo;
  std::optional<ViewFeatureStack> src_img, tgt_img;
  PipelineConfig cfg;

  BranchInputs inputs() const {
    BranchInputs in;
    if (src_geo.rows() > 0 || src_geo.dim() > 0) {
      in.src_geo = &src_geo;
      in.tgt_geo = &tgt_geo;
    }
    if (src_img && tgt_img) {
      in.src_img = &*src_img;
      in.tgt_img = &*tgt_img;
    }
    return in;
  }
};

LoadedProblem load_problem(const RegisterArgs& a) {
  LoadedProblem p;
  p.cfg = a.config.empty() ? PipelineConfig{} : pipeline_config_from_json(load_json_file(a.config));
  if (!a.fusion.empty()) {
    const auto mode = parse_fusion_mode(a.fusion);
    if (!mode) throw UsageError("unknown fusion mode '" + a.fusion + "'");
    p.cfg.fusion = *mode;
  }
  p.src = read_cloud(a.src);
  p.tgt = read_cloud(a.tgt);
  if (!a.src_geo.empty() != !a.tgt_geo.empty())
    throw UsageError("--src-geo and --tgt-geo must be given together");
  if (!a.src_img.empty() != !a.tgt_img.empty())
    throw UsageError("--src-img and --tgt-img must be given together");
  if (!a.src_geo.empty()) {
    p.src_geo = read_feature_field(a.src_geo);
    p.tgt_geo = read_feature_field(a.tgt_geo);
  }
  if (!a.src_img.empty()) {
    p.src_img = read_view_stack(a.src_img);
    p.tgt_img = read_view_stack(a.tgt_img);
  }

  const FusionMode mode = p.cfg.fusion;
  const bool have_geo = !a.src_geo.empty();
  const bool have_img = p.src_img.has_value();
  if (mode != FusionMode::ImgOnly && !have_geo)
    throw UsageError(std::string(to_string(mode)) + " requires --src-geo/--tgt-geo");
  if (mode != FusionMode::GeoOnly && !have_img)
    throw UsageError(std::string(to_string(mode)) + " requires --src-img/--tgt-img");

  auto check = [](Eigen::Index rows, std::size_t n, const std::string& what) {
    if (static_cast<std::size_t>(rows) != n)
      throw UsageError(what + " has " + std::to_string(rows) + " rows but the cloud has " +
                       std::to_string(n) + " points");
  };
  if (have_geo) {
    check(p.src_geo.rows(), p.src.size(), "source geometric features");
    check(p.tgt_geo.rows(), p.tgt.size(), "target geometric features");
  }
  if (have_img) {
    check(p.src_img->rows(), p.src.size(), "source image features");
    check(p.tgt_img->rows(), p.tgt.size(), "target image features");
    try {
      p.src_img->validate();
      p.tgt_img->validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

int cmd_lift(const std::string& depth, const std::string& camera, const std::string& out_path,
             std::ostream& out) {
  if (!fs::exists(camera)) throw UsageError("camera sidecar not found: " + camera);
  const CameraModel cam = read_camera_sidecar(camera);
  const DepthMap d = read_depth(depth, camera_width(cam), camera_height(cam));
  const LiftedCloud lifted = lift(d, cam);
  write_cloud(out_path, lifted.cloud);
  out << "lifted " << lifted.cloud.size() << " points\n";
  return kOk;
}

int cmd_project(const std::string& cloud, const std::string& camera, const std::string& out_path,
                std::ostream& out) {
  if (!fs::exists(camera)) throw UsageError("camera sidecar not found: " + camera);
  const CameraModel cam = read_camera_sidecar(camera);
  const DepthMap d = project(read_cloud(cloud), cam);
  write_depth(out_path, d);
  out << "rendered " << d.valid_count() << " pixels\n";
  return kOk;
}

int cmd_register(const RegisterArgs& a, std::ostream& out) {
  const LoadedProblem p = load_problem(a);
  const PipelineResult res = register_clouds(p.src, p.tgt, p.inputs(), p.cfg);
  RegistrationResult reg = res.registration;

  json j = transform_json(reg.success ? reg.transform : RigidTransform::identity());
  j["n_matches"] = res.matches.size();
  j["n_inliers"] = reg.inliers.size();
  j["fusion_mode"] = std::string(to_string(p.cfg.fusion));
  j["success"] = reg.success;
  if (!reg.success) j["diagnostic"] = reg.diagnostic;
  if (!a.gt.empty()) {
    attach_ground_truth(reg, read_transform_json(a.gt));
    if (!reg.success) {
      RegistrationResult fallback;
      attach_ground_truth(fallback, read_transform_json(a.gt));
      reg.rre_deg = fallback.rre_deg;
      reg.rte_m = fallback.rte_m;
    }
    j["rre_deg"] = *reg.rre_deg;
    j["rte_m"] = *reg.rte_m;
  }
  write_text(a.out, j.dump(2) + "\n");
  if (!reg.success) {
    out << "registration failed: " << reg.diagnostic << '\n';
    return kRegistrationFailed;
  }
  out << res.matches.size() << " matches, " << reg.inliers.size() << " inliers\n";
  return kOk;
}

int cmd_pr_curve(const RegisterArgs& a, std::ostream& out) {
  if (a.gt.empty()) throw UsageError("pr-curve requires --gt");
  if (!(a.radius > 0)) throw UsageError("--radius must be positive");
  const LoadedProblem p = load_problem(a);
  const RigidTransform gt = read_transform_json(a.gt);
  const FusedPosterior fused = fused_scores(p.inputs(), p.cfg);

  // Without index-level ground truth, a source point has a true partner when
  // some target point lies within the radius of its transformed position.
  std::size_t n_gt = 0;
  for (const Vec3& s : p.src.points) {
    for (const Vec3& t : p.tgt.points) {
      if (bench::match_is_correct(s, t, gt, a.radius)) {
        ++n_gt;
        break;
      }
    }
  }
  const bench::PRCurve curve = bench::pr_curve(fused.values, n_gt, p.src, p.tgt, gt, a.radius);
  write_text(a.out, bench::pr_curve_csv(curve));
  out << curve.points.size() - 1 << " thresholds, " << n_gt << " reachable correspondences\n";
  return kOk;
}

int cmd_bench(const std::string& config, const std::string& out_dir, int seeds, std::ostream& out) {
  bench::BenchConfig cfg = config.empty() ? bench::BenchConfig{} : bench_config_from_json(load_json_file(config));
  if (seeds > 0) cfg.n_seeds = seeds;
  const bench::Report report = bench::run_benchmark(cfg);
  bench::write_report(report, out_dir);
  for (const auto& s : report.summaries) {
    out << to_string(s.method) << ": mean RRE " << s.mean_rre << " deg, mean RTE " << s.mean_rte
        << " m, failures " << s.failures << "/" << s.trials << '\n';
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  par::apply_env_thread_cap();

  CLI::App app{"Training-free point cloud registration with probabilistic branch fusion", "genreg"};
  app.require_subcommand(0, 1);
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the default registration config as JSON");

  std::string depth, camera, cloud, out_path;
  auto* lift_cmd = app.add_subcommand("lift", "Back-project a depth image to a point cloud");
  lift_cmd->add_option("--depth", depth, "16-bit PNG (mm) or raw float32 (m)")->required();
  lift_cmd->add_option("--camera", camera, "Camera JSON sidecar")->required();
  lift_cmd->add_option("--out", out_path, "Output cloud (.xyz or binary)")->required();

  auto* project_cmd = app.add_subcommand("project", "Render a point cloud to a depth image");
  project_cmd->add_option("--cloud", cloud, "Input cloud")->required();
  project_cmd->add_option("--camera", camera, "Camera JSON sidecar")->required();
  project_cmd->add_option("--out", out_path, "Output depth (.png in mm, otherwise raw float32 m)")->required();

  RegisterArgs reg;
  auto add_problem_options = [&reg](CLI::App* cmd) {
    cmd->add_option("--src", reg.src, "Source cloud")->required();
    cmd->add_option("--tgt", reg.tgt, "Target cloud")->required();
    cmd->add_option("--src-geo", reg.src_geo, "Source geometric features (FIF1)");
    cmd->add_option("--tgt-geo", reg.tgt_geo, "Target geometric features (FIF1)");
    cmd->add_option("--src-img", reg.src_img, "Source image feature stack (FIF1)");
    cmd->add_option("--tgt-img", reg.tgt_img, "Target image feature stack (FIF1)");
    cmd->add_option("--config", reg.config, "Pipeline config JSON");
    cmd->add_option("--fusion", reg.fusion, "and | or | concat | img-only | geo-only");
    cmd->add_option("--out", reg.out, "Output path")->required();
  };
  auto* register_cmd = app.add_subcommand("register", "Estimate the rigid transform between two clouds");
  add_problem_options(register_cmd);
  register_cmd->add_option("--gt", reg.gt, "Ground-truth transform JSON; adds rre_deg and rte_m");

  auto* pr_cmd = app.add_subcommand("pr-curve", "Match precision/recall against a known transform");
  add_problem_options(pr_cmd);
  pr_cmd->add_option("--gt", reg.gt, "Ground-truth transform JSON")->required();
  pr_cmd->add_option("--radius", reg.radius, "Match correctness radius (m)");

  std::string bench_config, bench_out;
  int seeds = 0;
  bool bench_print = false;
  auto* bench_cmd = app.add_subcommand("bench", "Run the synthetic benchmark");
  bench_cmd->add_option("--config", bench_config, "Benchmark config JSON");
  bench_cmd->add_option("--out", bench_out, "Report directory");
  bench_cmd->add_option("--seeds", seeds, "Override the number of seeds");
  bench_cmd->add_flag("--print-config", bench_print, "Print the default benchmark config as JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (print_config) {
      out << to_json(PipelineConfig{}).dump(2) << '\n';
      return kOk;
    }
    if (*lift_cmd) return cmd_lift(depth, camera, out_path, out);
    if (*project_cmd) return cmd_project(cloud, camera, out_path, out);
    if (*register_cmd) return cmd_register(reg, out);
    if (*pr_cmd) return cmd_pr_curve(reg, out);
    if (*bench_cmd) {
      if (bench_print) {
        out << to_json(bench::BenchConfig{}).dump(2) << '\n';
        return kOk;
      }
      if (bench_out.empty()) throw UsageError("bench requires --out");
      return cmd_bench(bench_config, bench_out, seeds, out);
    }
    err << app.help();
    return kUsage;
  } catch (const std::exception& e) {
    // Every remaining failure is an input problem: unreadable or malformed
    // files, bad configs, inconsistent feature dimensions.
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace genreg::cli
