#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "gzsl/dataset.hpp"
#include "gzsl/error.hpp"

namespace gzsl {

// GZSL container, little-endian binary:
//   magic "GZSL", u32 version=1, u32 d, u32 attr_dim,
//   u32 n_seen_classes, u32 n_unseen_classes,
//   class-id table (u32 per class, seen first),
//   attribute matrix (f32 column-major, attr_dim x total),
//   4 split blocks in order train_seen, aux_unseen, test_seen, test_unseen,
//   each: u64 count, labels (u32 x count), features (f32 column-major d x count).

namespace io_detail {

inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::array<char, 4> kContainerMagic = {'G', 'Z', 'S', 'L'};

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  // Host is little-endian on every supported target; memcpy keeps the
  // byte order the format demands.
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  require(static_cast<std::size_t>(in.gcount()) == sizeof(T), Errc::truncated,
          "unexpected end of file");
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline void write_split(std::ostream& out, const LabeledSplit& split) {
  write_le<std::uint64_t>(out, split.count());
  for (ClassId label : split.labels) write_le<std::uint32_t>(out, label);
  for (std::size_t c = 0; c < split.features.cols(); ++c) {
    auto col = split.features.col(c);
    for (double v : col) write_le<float>(out, static_cast<float>(v));
  }
}

inline LabeledSplit read_split(std::istream& in, std::size_t d) {
  LabeledSplit split;
  const auto count = read_le<std::uint64_t>(in);
  split.labels.resize(count);
  for (auto& label : split.labels) label = read_le<std::uint32_t>(in);
  split.features = Matrix(d, count);
  for (std::size_t c = 0; c < count; ++c) {
    auto col = split.features.col(c);
    for (std::size_t r = 0; r < d; ++r)
      col[r] = static_cast<double>(read_le<float>(in));
  }
  return split;
}

}  // namespace io_detail

inline void write_container(const GzslDataset& dataset, std::ostream& out) {
  using namespace io_detail;
  dataset.validate();
  out.write(kContainerMagic.data(), kContainerMagic.size());
  write_le<std::uint32_t>(out, kContainerVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.feature_dim()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.attribute_dim()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.catalog.num_seen()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.catalog.num_unseen()));
  for (ClassId id : dataset.catalog.all_ids()) write_le<std::uint32_t>(out, id);
  for (std::size_t c = 0; c < dataset.attributes.cols(); ++c) {
    auto col = dataset.attributes.col(c);
    for (double v : col) write_le<float>(out, static_cast<float>(v));
  }
  write_split(out, dataset.train_seen);
  write_split(out, dataset.aux_unseen);
  write_split(out, dataset.test_seen);
  write_split(out, dataset.test_unseen);
  require(out.good(), Errc::io_failure, "write failed");
}

inline void write_container(const GzslDataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.is_open(), Errc::io_failure, "cannot open " + path + " for writing");
  write_container(dataset, out);
}

inline GzslDataset read_container(std::istream& in) {
  using namespace io_detail;
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  require(static_cast<std::size_t>(in.gcount()) == magic.size(), Errc::truncated,
          "file shorter than magic");
  require(magic == kContainerMagic, Errc::bad_magic,
          "not a GZSL container");
  const auto version = read_le<std::uint32_t>(in);
  require(version == kContainerVersion, Errc::bad_version,
          "unsupported container version " + std::to_string(version));

  const auto d = read_le<std::uint32_t>(in);
  const auto attr_dim = read_le<std::uint32_t>(in);
  const auto n_seen = read_le<std::uint32_t>(in);
  const auto n_unseen = read_le<std::uint32_t>(in);

  std::vector<ClassId> table(static_cast<std::size_t>(n_seen) + n_unseen);
  for (auto& id : table) id = read_le<std::uint32_t>(in);

  GzslDataset ds;
  ds.catalog = ClassCatalog(
      std::vector<ClassId>(table.begin(), table.begin() + n_seen),
      std::vector<ClassId>(table.begin() + n_seen, table.end()));

  // Attribute columns follow the file's class table order; permute into
  // catalog order (identity for files this library wrote).
  Matrix file_attrs(attr_dim, table.size());
  for (std::size_t c = 0; c < table.size(); ++c) {
    auto col = file_attrs.col(c);
    for (std::size_t r = 0; r < attr_dim; ++r)
      col[r] = static_cast<double>(read_le<float>(in));
  }
  ds.attributes = Matrix(attr_dim, table.size());
  for (std::size_t c = 0; c < table.size(); ++c) {
    auto src = file_attrs.col(c);
    auto dst = ds.attributes.col(ds.catalog.index_of(table[c]));
    for (std::size_t r = 0; r < attr_dim; ++r) dst[r] = src[r];
  }

  ds.train_seen = read_split(in, d);
  ds.aux_unseen = read_split(in, d);
  ds.test_seen = read_split(in, d);
  ds.test_unseen = read_split(in, d);
  ds.validate();
  return ds;
}

inline GzslDataset read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.is_open(), Errc::io_failure, "cannot open " + path);
  return read_container(in);
}

}  // namespace gzsl
