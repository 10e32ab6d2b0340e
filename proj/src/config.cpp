#include "genreg/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace genreg {

using nlohmann::json;

json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": JSON syntax error");
  }
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path.string());
}

namespace {

// Reads keys from a flat object while recording which ones were consumed.
class FieldReader {
 public:
  explicit FieldReader(const json& j) : j_(j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("field '" + std::string(key) + "': wrong type");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  void reject_unknown() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError("field '" + key + "': unknown key");
  }

 private:
  const json& j_;
  std::set<std::string> seen_;
};

FusionMode parse_mode(const std::string& s, const char* field) {
  if (auto m = parse_fusion_mode(s)) return *m;
  throw ConfigError("field '" + std::string(field) + "': unknown fusion mode '" + s + "'");
}

// Pipeline keys shared by both config kinds (all but "fusion").
void read_pipeline_fields(FieldReader& r, PipelineConfig& c) {
  r.read("tau_img", c.tau_img);
  r.read("tau_geo", c.tau_geo);
  std::string prior = c.prior == PriorMode::Uniform ? "uniform" : "scalar";
  r.read("prior", prior);
  if (prior == "uniform")
    c.prior = PriorMode::Uniform;
  else if (prior == "scalar")
    c.prior = PriorMode::Scalar;
  else
    throw ConfigError("field 'prior': expected \"uniform\" or \"scalar\"");
  r.read("prior_value", c.prior_value);
  r.read("voxel_size", c.voxel_size);
  c.robust.d_comp = 2.0 * c.voxel_size;
  c.robust.d_inlier = 2.0 * c.voxel_size;
  r.read("d_comp", c.robust.d_comp);
  r.read("d_inlier", c.robust.d_inlier);
  r.read("n_hypotheses", c.robust.n_hypotheses);
  r.read("n_seeds", c.robust.n_seeds);
  r.read("k_neighbors", c.robust.k_neighbors);
  r.read("min_inliers", c.robust.min_inliers);
  r.read("seed", c.robust.seed);
}

void write_pipeline_fields(json& j, const PipelineConfig& c) {
  j["tau_img"] = c.tau_img;
  j["tau_geo"] = c.tau_geo;
  j["prior"] = c.prior == PriorMode::Uniform ? "uniform" : "scalar";
  j["prior_value"] = c.prior_value;
  j["voxel_size"] = c.voxel_size;
  j["d_comp"] = c.robust.d_comp;
  j["d_inlier"] = c.robust.d_inlier;
  j["n_hypotheses"] = c.robust.n_hypotheses;
  j["n_seeds"] = c.robust.n_seeds;
  j["k_neighbors"] = c.robust.k_neighbors;
  j["min_inliers"] = c.robust.min_inliers;
  j["seed"] = c.robust.seed;
}

template <typename Fn>
void checked(Fn&& validate) {
  try {
    validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid value: ") + e.what());
  }
}

}  // namespace

PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig c;
  FieldReader r(j);
  read_pipeline_fields(r, c);
  std::string fusion(to_string(c.fusion));
  r.read("fusion", fusion);
  c.fusion = parse_mode(fusion, "fusion");
  r.reject_unknown();
  checked([&] { c.validate(); });
  return c;
}

json to_json(const PipelineConfig& c) {
  json j = json::object();
  j["fusion"] = std::string(to_string(c.fusion));
  write_pipeline_fields(j, c);
  return j;
}

bench::BenchConfig bench_config_from_json(const json& j) {
  bench::BenchConfig c;
  FieldReader r(j);
  read_pipeline_fields(r, c.pipeline);

  std::vector<std::string> methods;
  for (FusionMode m : c.methods) methods.emplace_back(to_string(m));
  r.read("methods", methods);
  c.methods.clear();
  for (const auto& m : methods) c.methods.push_back(parse_mode(m, "methods"));

  r.read("seeds", c.n_seeds);
  r.read("first_seed", c.first_seed);
  r.read("n_points", c.scene.n_points);
  r.read("extent", c.scene.extent);
  r.read("overlap", c.scene.overlap);
  r.read("rotation_deg", c.scene.rotation_deg);
  r.read("translation_m", c.scene.translation_m);
  r.read("point_noise", c.scene.point_noise);
  r.read("img_dim", c.img.dim);
  r.read("img_signal", c.img.signal);
  r.read("img_noise", c.img.noise);
  r.read("img_outliers", c.img.outlier_fraction);
  r.read("img_coverage", c.img.coverage);
  r.read("img_k", c.img.k);
  r.read("geo_dim", c.geo.dim);
  r.read("geo_signal", c.geo.signal);
  r.read("geo_noise", c.geo.noise);
  r.read("geo_outliers", c.geo.outlier_fraction);
  r.read("radius", c.radius);
  r.read("rre_thresholds", c.rre_thresholds);
  r.read("rte_thresholds", c.rte_thresholds);
  r.read("recall_step", c.recall_step);
  r.reject_unknown();
  checked([&] { c.validate(); });
  return c;
}

json to_json(const bench::BenchConfig& c) {
  json j = json::object();
  json methods = json::array();
  for (FusionMode m : c.methods) methods.push_back(std::string(to_string(m)));
  j["methods"] = methods;
  j["seeds"] = c.n_seeds;
  j["first_seed"] = c.first_seed;
  j["n_points"] = c.scene.n_points;
  j["extent"] = c.scene.extent;
  j["overlap"] = c.scene.overlap;
  j["rotation_deg"] = c.scene.rotation_deg;
  j["translation_m"] = c.scene.translation_m;
  j["point_noise"] = c.scene.point_noise;
  j["img_dim"] = c.img.dim;
  j["img_signal"] = c.img.signal;
  j["img_noise"] = c.img.noise;
  j["img_outliers"] = c.img.outlier_fraction;
  j["img_coverage"] = c.img.coverage;
  j["img_k"] = c.img.k;
  j["geo_dim"] = c.geo.dim;
  j["geo_signal"] = c.geo.signal;
  j["geo_noise"] = c.geo.noise;
  j["geo_outliers"] = c.geo.outlier_fraction;
  j["radius"] = c.radius;
  j["rre_thresholds"] = c.rre_thresholds;
  j["rte_thresholds"] = c.rte_thresholds;
  j["recall_step"] = c.recall_step;
  write_pipeline_fields(j, c.pipeline);
  return j;
}

}  // namespace genreg
