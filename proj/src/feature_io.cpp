#include "genreg/feature_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <vector>

#include "binary_io.hpp"

namespace genreg {

using nlohmann::json;
using Kind = FeatureFileError::Kind;

namespace {

constexpr char kMagic[4] = {'F', 'I', 'F', '1'};

void write_payload(const std::filesystem::path& path, const std::vector<const FeatureField*>& views) {
  const auto n = views.empty() ? 0 : views.front()->rows();
  const auto d = views.empty() ? 0 : views.front()->dim();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FeatureFileError(Kind::Io, "cannot write " + path.string());
  out.write(kMagic, 4);
  detail::put_u32(out, kFeatureFormatVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(views.size()));
  detail::put_u32(out, static_cast<std::uint32_t>(n));
  detail::put_u32(out, static_cast<std::uint32_t>(d));
  for (const FeatureField* v : views) {
    const float* p = v->descriptors.data();
    for (Eigen::Index i = 0; i < n * d; ++i) detail::put_f32(out, p[i]);
  }
  if (!out) throw FeatureFileError(Kind::Io, "write failed: " + path.string());
}

void write_sidecar(const std::filesystem::path& path, const FeatureSidecar& s) {
  json j = {{"branch", s.branch}, {"d", s.d}, {"source_model", s.source_model}};
  if (s.k) j["K"] = *s.k;
  std::ofstream out(sidecar_path(path));
  if (!out) throw FeatureFileError(Kind::Io, "cannot write " + sidecar_path(path).string());
  out << j.dump(2) << '\n';
}

std::optional<FeatureSidecar> read_sidecar(const std::filesystem::path& path) {
  const auto sp = sidecar_path(path);
  std::ifstream in(sp);
  if (!in) return std::nullopt;
  try {
    json j;
    in >> j;
    FeatureSidecar s;
    s.branch = j.at("branch").get<std::string>();
    s.d = j.at("d").get<int>();
    s.source_model = j.value("source_model", std::string{});
    if (j.contains("K")) s.k = j.at("K").get<int>();
    if (s.branch != "img" && s.branch != "geo")
      throw FeatureFileError(Kind::Sidecar, sp.string() + ": branch must be \"img\" or \"geo\"");
    return s;
  } catch (const json::exception& e) {
    throw FeatureFileError(Kind::Sidecar, sp.string() + ": " + e.what());
  }
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& feature_path) {
  return feature_path.string() + ".json";
}

void write_features(const std::filesystem::path& path, const FeatureField& field,
                    const std::string& source_model) {
  write_payload(path, {&field});
  write_sidecar(path, {"geo", std::nullopt, static_cast<int>(field.dim()), source_model});
}

void write_features(const std::filesystem::path& path, const ViewFeatureStack& stack,
                    const std::string& source_model) {
  stack.validate();
  std::vector<const FeatureField*> views;
  for (const auto& v : stack.views) views.push_back(&v);
  write_payload(path, views);
  write_sidecar(path, {"img", stack.k, static_cast<int>(stack.dim()), source_model});
}

FeatureFile read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw FeatureFileError(Kind::Io, "cannot open feature file " + path.string());
  const auto file_size = static_cast<std::uint64_t>(in.tellg());
  in.seekg(0);

  unsigned char header[kFeatureHeaderBytes];
  in.read(reinterpret_cast<char*>(header), kFeatureHeaderBytes);
  if (in.gcount() >= 4 && !std::equal(kMagic, kMagic + 4, reinterpret_cast<const char*>(header)))
    throw FeatureFileError(Kind::BadMagic, path.string() + ": bad magic (expected FIF1)");
  if (static_cast<std::size_t>(in.gcount()) < kFeatureHeaderBytes)
    throw FeatureFileError(Kind::Truncated, path.string() + ": truncated header");

  const std::uint32_t version = detail::u32_from(header + 4);
  if (version != kFeatureFormatVersion)
    throw FeatureFileError(Kind::VersionMismatch, path.string() + ": unsupported version " +
                                                      std::to_string(version));
  const std::uint64_t v = detail::u32_from(header + 8);
  const std::uint64_t n = detail::u32_from(header + 12);
  const std::uint64_t d = detail::u32_from(header + 16);

  // V·N·d·4 must be representable and addressable.
  constexpr auto kMaxBytes = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
  const auto mul_overflows = [](std::uint64_t a, std::uint64_t b) {
    return a != 0 && b > kMaxBytes / a;
  };
  if (mul_overflows(v, n) || mul_overflows(v * n, d) || mul_overflows(v * n * d, 4) ||
      n > static_cast<std::uint64_t>(std::numeric_limits<Eigen::Index>::max()))
    throw FeatureFileError(Kind::DimensionOverflow,
                           path.string() + ": declared dimensions overflow");
  const std::uint64_t payload = v * n * d * 4;
  if (file_size - kFeatureHeaderBytes < payload)
    throw FeatureFileError(Kind::Truncated, path.string() + ": payload truncated");
  if (file_size - kFeatureHeaderBytes > payload)
    throw FeatureFileError(Kind::DimensionMismatch,
                           path.string() + ": trailing bytes beyond declared payload");

  FeatureFile out;
  out.sidecar = read_sidecar(path);
  std::vector<unsigned char> buf(static_cast<std::size_t>(n * d * 4));
  for (std::uint64_t view = 0; view < v; ++view) {
    if (!buf.empty() && !in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw FeatureFileError(Kind::Truncated, path.string() + ": payload truncated");
    FeatureField f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    float* dst = f.descriptors.data();
    for (std::uint64_t i = 0; i < n * d; ++i) dst[i] = detail::f32_from(buf.data() + 4 * i);
    out.views.push_back(std::move(f));
  }

  if (out.sidecar) {
    const FeatureSidecar& s = *out.sidecar;
    if (static_cast<std::uint64_t>(s.d) != d)
      throw FeatureFileError(Kind::DimensionMismatch,
                             path.string() + ": sidecar d=" + std::to_string(s.d) +
                                 " but header d=" + std::to_string(d));
    if (s.branch == "geo" && v != 1)
      throw FeatureFileError(Kind::DimensionMismatch,
                             path.string() + ": geometric field must have V=1");
    if (s.branch == "img" && s.k) {
      const auto k = static_cast<std::uint64_t>(std::max(*s.k, 0));
      if (*s.k < 1 || k * k != v)
        throw FeatureFileError(Kind::DimensionMismatch,
                               path.string() + ": sidecar K=" + std::to_string(*s.k) +
                                   " requires V=K^2 but payload has V=" + std::to_string(v));
    }
  }
  return out;
}

FeatureField read_feature_field(const std::filesystem::path& path) {
  FeatureFile f = read_features(path);
  if (f.views.size() != 1)
    throw FeatureFileError(Kind::DimensionMismatch,
                           path.string() + ": expected a single-view field, got V=" +
                               std::to_string(f.views.size()));
  return std::move(f.views.front());
}

ViewFeatureStack read_view_stack(const std::filesystem::path& path) {
  FeatureFile f = read_features(path);
  ViewFeatureStack s;
  if (f.sidecar && f.sidecar->k) {
    s.k = *f.sidecar->k;
  } else {
    const auto root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(f.views.size()))));
    if (root < 1 || static_cast<std::size_t>(root * root) != f.views.size())
      throw FeatureFileError(Kind::DimensionMismatch,
                             path.string() + ": V=" + std::to_string(f.views.size()) +
                                 " is not a perfect square");
    s.k = root;
  }
  s.views = std::move(f.views);
  return s;
}

}  // namespace genreg
