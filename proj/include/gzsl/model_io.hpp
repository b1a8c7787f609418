#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <variant>

#include "gzsl/classifiers.hpp"
#include "gzsl/container_io.hpp"
#include "gzsl/error.hpp"

namespace gzsl {

// Model persistence, little-endian binary:
//   magic "MSEL", u32 version=1, u8 kind (0 = LinearModel, 1 = SelectorModel),
//   LinearModel:   u32 d, u32 k, class ids (u32 x k),
//                  weights (f64 column-major d x k), bias (f64 x k)
//   SelectorModel: u32 d, weight (f64 x d), bias (f64),
//                  stats mean (f64 x d), stats std (f64 x d)

namespace io_detail {

inline constexpr std::uint32_t kModelVersion = 1;
inline constexpr std::array<char, 4> kModelMagic = {'M', 'S', 'E', 'L'};
inline constexpr std::uint8_t kKindLinear = 0;
inline constexpr std::uint8_t kKindSelector = 1;

inline void write_model_header(std::ostream& out, std::uint8_t kind) {
  out.write(kModelMagic.data(), kModelMagic.size());
  write_le<std::uint32_t>(out, kModelVersion);
  write_le<std::uint8_t>(out, kind);
}

inline std::uint8_t read_model_header(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  require(static_cast<std::size_t>(in.gcount()) == magic.size(), Errc::truncated,
          "file shorter than magic");
  require(magic == kModelMagic, Errc::bad_magic, "not a MSEL model file");
  const auto version = read_le<std::uint32_t>(in);
  require(version == kModelVersion, Errc::bad_version,
          "unsupported model version " + std::to_string(version));
  const auto kind = read_le<std::uint8_t>(in);
  require(kind == kKindLinear || kind == kKindSelector, Errc::invariant_violation,
          "unknown model kind " + std::to_string(kind));
  return kind;
}

}  // namespace io_detail

inline void write_model(const LinearModel& model, std::ostream& out) {
  using namespace io_detail;
  write_model_header(out, kKindLinear);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.dim()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.num_classes()));
  for (ClassId id : model.class_ids) write_le<std::uint32_t>(out, id);
  for (double w : model.weights.storage()) write_le<double>(out, w);
  for (double b : model.bias) write_le<double>(out, b);
  require(out.good(), Errc::io_failure, "write failed");
}

inline void write_model(const SelectorModel& model, std::ostream& out) {
  using namespace io_detail;
  write_model_header(out, kKindSelector);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.dim()));
  for (double w : model.weight) write_le<double>(out, w);
  write_le<double>(out, model.bias);
  for (double m : model.stats.mean) write_le<double>(out, m);
  for (double s : model.stats.std_dev) write_le<double>(out, s);
  require(out.good(), Errc::io_failure, "write failed");
}

template <typename ModelT>
void write_model(const ModelT& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.is_open(), Errc::io_failure, "cannot open " + path + " for writing");
  write_model(model, out);
}

using AnyModel = std::variant<LinearModel, SelectorModel>;

inline AnyModel read_model(std::istream& in) {
  using namespace io_detail;
  const auto kind = read_model_header(in);
  if (kind == kKindLinear) {
    LinearModel model;
    const auto d = read_le<std::uint32_t>(in);
    const auto k = read_le<std::uint32_t>(in);
    model.class_ids.resize(k);
    for (auto& id : model.class_ids) id = read_le<std::uint32_t>(in);
    model.weights = Matrix(d, k);
    for (double& w : model.weights.storage()) w = read_le<double>(in);
    model.bias.resize(k);
    for (double& b : model.bias) b = read_le<double>(in);
    require(model.weights.all_finite(), Errc::invariant_violation,
            "non-finite model weight");
    return model;
  }
  SelectorModel model;
  const auto d = read_le<std::uint32_t>(in);
  model.weight.resize(d);
  for (double& w : model.weight) w = read_le<double>(in);
  model.bias = read_le<double>(in);
  model.stats.mean.resize(d);
  for (double& m : model.stats.mean) m = read_le<double>(in);
  model.stats.std_dev.resize(d);
  for (double& s : model.stats.std_dev) s = read_le<double>(in);
  return model;
}

inline AnyModel read_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.is_open(), Errc::io_failure, "cannot open " + path);
  return read_model(in);
}

inline LinearModel read_linear_model(const std::string& path) {
  auto any = read_model(path);
  require(std::holds_alternative<LinearModel>(any), Errc::invariant_violation,
          path + " does not hold a linear model");
  return std::get<LinearModel>(std::move(any));
}

inline SelectorModel read_selector_model(const std::string& path) {
  auto any = read_model(path);
  require(std::holds_alternative<SelectorModel>(any), Errc::invariant_violation,
          path + " does not hold a selector model");
  return std::get<SelectorModel>(std::move(any));
}

}  // namespace gzsl
