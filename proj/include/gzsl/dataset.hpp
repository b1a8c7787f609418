#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gzsl/error.hpp"
#include "gzsl/matrix.hpp"
#include "gzsl/rng.hpp"

namespace gzsl {

using ClassId = std::uint32_t;

// Seen/unseen class sets. all_ids() is seen first, then unseen, each in
// ascending id order; scores over the full catalog follow that order.
class ClassCatalog {
 public:
  ClassCatalog() = default;

  ClassCatalog(std::vector<ClassId> seen, std::vector<ClassId> unseen)
      : seen_(std::move(seen)), unseen_(std::move(unseen)) {
    std::sort(seen_.begin(), seen_.end());
    std::sort(unseen_.begin(), unseen_.end());
    all_.reserve(seen_.size() + unseen_.size());
    all_.insert(all_.end(), seen_.begin(), seen_.end());
    all_.insert(all_.end(), unseen_.begin(), unseen_.end());
    for (std::size_t i = 0; i < all_.size(); ++i) {
      auto [it, fresh] = index_.emplace(all_[i], i);
      require(fresh, Errc::invariant_violation,
              "class id " + std::to_string(all_[i]) +
                  " appears twice in the catalog");
    }
  }

  const std::vector<ClassId>& seen_ids() const { return seen_; }
  const std::vector<ClassId>& unseen_ids() const { return unseen_; }
  const std::vector<ClassId>& all_ids() const { return all_; }

  std::size_t num_seen() const { return seen_.size(); }
  std::size_t num_unseen() const { return unseen_.size(); }
  std::size_t num_classes() const { return all_.size(); }

  bool contains(ClassId id) const { return index_.count(id) != 0; }
  bool is_seen(ClassId id) const { return index_of(id) < seen_.size(); }

  // Position of id in all_ids order.
  std::size_t index_of(ClassId id) const {
    auto it = index_.find(id);
    require(it != index_.end(), Errc::invalid_argument,
            "class id " + std::to_string(id) + " not in catalog");
    return it->second;
  }

  friend bool operator==(const ClassCatalog& a, const ClassCatalog& b) {
    return a.all_ == b.all_ && a.seen_.size() == b.seen_.size();
  }

 private:
  std::vector<ClassId> seen_, unseen_, all_;
  std::unordered_map<ClassId, std::size_t> index_;
};

struct LabeledSplit {
  Matrix features;              // d x count, one datapoint per column
  std::vector<ClassId> labels;  // count

  std::size_t count() const { return labels.size(); }

  friend bool operator==(const LabeledSplit&, const LabeledSplit&) = default;
};

struct StandardizationStats {
  std::vector<double> mean;
  std::vector<double> std_dev;  // floored, never below kStdFloor

  std::size_t dim() const { return mean.size(); }

  friend bool operator==(const StandardizationStats&,
                         const StandardizationStats&) = default;
};

inline constexpr double kStdFloor = 1e-8;

// Per-dimension mean and population (divide-by-n) standard deviation.
inline StandardizationStats fit_standardizer(const Matrix& data) {
  require(data.cols() >= 1, Errc::empty_data, "empty data");
  const std::size_t d = data.rows();
  const std::size_t n = data.cols();
  StandardizationStats stats;
  stats.mean.assign(d, 0.0);
  stats.std_dev.assign(d, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    auto x = data.col(c);
    for (std::size_t r = 0; r < d; ++r) stats.mean[r] += x[r];
  }
  for (std::size_t r = 0; r < d; ++r) stats.mean[r] /= static_cast<double>(n);
  for (std::size_t c = 0; c < n; ++c) {
    auto x = data.col(c);
    for (std::size_t r = 0; r < d; ++r) {
      const double delta = x[r] - stats.mean[r];
      stats.std_dev[r] += delta * delta;
    }
  }
  for (std::size_t r = 0; r < d; ++r) {
    stats.std_dev[r] = std::sqrt(stats.std_dev[r] / static_cast<double>(n));
    if (stats.std_dev[r] < kStdFloor) stats.std_dev[r] = kStdFloor;
  }
  return stats;
}

inline Matrix apply_standardizer(const Matrix& data,
                                 const StandardizationStats& stats) {
  require(data.rows() == stats.dim(), Errc::dimension_mismatch,
          "apply_standardizer: data dim " + std::to_string(data.rows()) +
              " vs stats dim " + std::to_string(stats.dim()));
  Matrix out(data.rows(), data.cols());
  for (std::size_t c = 0; c < data.cols(); ++c) {
    auto src = data.col(c);
    auto dst = out.col(c);
    for (std::size_t r = 0; r < data.rows(); ++r)
      dst[r] = (src[r] - stats.mean[r]) / stats.std_dev[r];
  }
  return out;
}

inline void standardize_into(std::span<const double> x,
                             const StandardizationStats& stats,
                             std::vector<double>& out) {
  require(x.size() == stats.dim(), Errc::dimension_mismatch,
          "standardize: vector dim mismatch");
  out.resize(x.size());
  for (std::size_t r = 0; r < x.size(); ++r)
    out[r] = (x[r] - stats.mean[r]) / stats.std_dev[r];
}

// A generated-feature dataset with GZSL structure. attributes holds one
// column per class, in catalog.all_ids order.
struct GzslDataset {
  ClassCatalog catalog;
  Matrix attributes;  // attr_dim x |C|
  LabeledSplit train_seen;
  LabeledSplit aux_unseen;
  LabeledSplit test_seen;
  LabeledSplit test_unseen;

  std::size_t feature_dim() const { return train_seen.features.rows(); }
  std::size_t attribute_dim() const { return attributes.rows(); }

  // Enforces the structural invariants. Used after construction and on load.
  void validate() const {
    require(catalog.num_seen() >= 1 && catalog.num_unseen() >= 1,
            Errc::invariant_violation, "catalog needs seen and unseen classes");
    require(attributes.rows() >= 1 &&
                attributes.cols() == catalog.num_classes(),
            Errc::invariant_violation, "attribute matrix shape mismatch");
    require(attributes.all_finite(), Errc::invariant_violation,
            "non-finite attribute value");
    const std::size_t d = feature_dim();
    require(d >= 1, Errc::invariant_violation, "zero feature dimension");

    auto check_split = [&](const LabeledSplit& split, const char* name,
                           bool seen_side) {
      require(split.features.cols() == split.labels.size(),
              Errc::invariant_violation,
              std::string(name) + ": label/feature count mismatch");
      require(split.features.rows() == d, Errc::invariant_violation,
              std::string(name) + ": feature dim differs across splits");
      require(split.features.all_finite(), Errc::invariant_violation,
              std::string(name) + ": non-finite feature value");
      for (ClassId label : split.labels) {
        require(catalog.contains(label) && catalog.is_seen(label) == seen_side,
                Errc::invariant_violation,
                std::string(name) + ": split/label violation (class " +
                    std::to_string(label) + ")");
      }
    };
    check_split(train_seen, "train_seen", true);
    check_split(aux_unseen, "aux_unseen", false);
    check_split(test_seen, "test_seen", true);
    check_split(test_unseen, "test_unseen", false);

    auto check_coverage = [&](const LabeledSplit& split, const char* name,
                              const std::vector<ClassId>& classes) {
      std::unordered_set<ClassId> present(split.labels.begin(),
                                          split.labels.end());
      for (ClassId id : classes) {
        require(present.count(id) != 0, Errc::invariant_violation,
                std::string(name) + ": class " + std::to_string(id) +
                    " has no datapoint");
      }
    };
    check_coverage(test_seen, "test_seen", catalog.seen_ids());
    check_coverage(test_unseen, "test_unseen", catalog.unseen_ids());
  }

  friend bool operator==(const GzslDataset&, const GzslDataset&) = default;
};

namespace detail {

// All generated feature values are quantized to f32 so that the binary
// container (which stores f32) round-trips bit-exactly.
inline double quantize_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace detail

// Emits per_class auxiliary datapoints for every unseen class: prototype +
// noise_scale * N(0, I), quantized to f32. The prototype is an affine image
// of the class attribute column; with map_jitter == 0 (the default) the map
// is the identity, so prototypes coincide with the attributes. A non-zero
// jitter perturbs the map with a Gaussian draw seeded independently of the
// noise stream, emulating an imperfect feature generator.
inline std::pair<Matrix, std::vector<ClassId>> generate_auxiliary(
    const ClassCatalog& catalog, const Matrix& attributes,
    std::size_t per_class, double noise_scale, std::uint64_t seed,
    double map_jitter = 0.0) {
  require(catalog.num_unseen() >= 1, Errc::invalid_argument,
          "no unseen classes");
  require(per_class >= 1, Errc::invalid_argument, "per_class must be >= 1");
  require(attributes.cols() == catalog.num_classes(), Errc::dimension_mismatch,
          "attributes must have a column per class");
  const std::size_t d = attributes.rows();

  // Affine map d -> d: identity plus seeded jitter.
  Matrix map_a(d, d);
  std::vector<double> map_t(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) map_a(i, i) = 1.0;
  if (map_jitter != 0.0) {
    auto map_rng = make_engine(seed, 0);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (std::size_t c = 0; c < d; ++c)
      for (std::size_t r = 0; r < d; ++r) map_a(r, c) += map_jitter * unit(map_rng);
    for (std::size_t r = 0; r < d; ++r) map_t[r] = map_jitter * unit(map_rng);
  }

  auto noise_rng = make_engine(seed, 1);
  std::normal_distribution<double> unit(0.0, 1.0);

  Matrix features(d, catalog.num_unseen() * per_class);
  std::vector<ClassId> labels;
  labels.reserve(features.cols());

  std::vector<double> prototype(d);
  std::size_t col = 0;
  for (ClassId id : catalog.unseen_ids()) {
    auto attr = attributes.col(catalog.index_of(id));
    for (std::size_t r = 0; r < d; ++r) {
      double acc = map_t[r];
      for (std::size_t k = 0; k < d; ++k) acc += map_a(r, k) * attr[k];
      prototype[r] = acc;
    }
    for (std::size_t p = 0; p < per_class; ++p) {
      auto dst = features.col(col++);
      for (std::size_t r = 0; r < d; ++r)
        dst[r] = detail::quantize_f32(prototype[r] + noise_scale * unit(noise_rng));
      labels.push_back(id);
    }
  }
  return {std::move(features), std::move(labels)};
}

struct SyntheticSpec {
  std::size_t n_seen_classes = 10;
  std::size_t n_unseen_classes = 5;
  std::size_t dim = 32;
  std::size_t train_per_class = 60;
  std::size_t test_per_class = 30;
  std::size_t aux_per_class = 60;
  double cluster_spread = 2.0;  // stddev of each class cluster
  double noise_scale = 2.0;     // stddev of the auxiliary generator noise
  std::uint64_t seed = 42;
};

// Desk-scale benchmark: one Gaussian cluster per class. The cluster centers
// double as the attribute columns, so auxiliary fidelity is governed purely
// by noise_scale.
inline GzslDataset make_synthetic_benchmark(const SyntheticSpec& spec) {
  require(spec.n_seen_classes >= 1 && spec.n_unseen_classes >= 1 &&
              spec.train_per_class >= 1 && spec.test_per_class >= 1 &&
              spec.aux_per_class >= 1,
          Errc::invalid_argument, "all counts must be >= 1");
  require(spec.dim >= 2, Errc::invalid_argument, "dim must be >= 2");
  require(spec.cluster_spread >= 0.0 && spec.noise_scale >= 0.0,
          Errc::invalid_argument, "spreads must be non-negative");

  GzslDataset ds;
  std::vector<ClassId> seen(spec.n_seen_classes), unseen(spec.n_unseen_classes);
  for (std::size_t i = 0; i < seen.size(); ++i) seen[i] = static_cast<ClassId>(i);
  for (std::size_t i = 0; i < unseen.size(); ++i)
    unseen[i] = static_cast<ClassId>(spec.n_seen_classes + i);
  ds.catalog = ClassCatalog(std::move(seen), std::move(unseen));

  const std::size_t d = spec.dim;
  const std::size_t n_classes = ds.catalog.num_classes();

  auto center_rng = make_engine(spec.seed, 2);
  std::normal_distribution<double> unit(0.0, 1.0);
  ds.attributes = Matrix(d, n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    auto dst = ds.attributes.col(c);
    for (std::size_t r = 0; r < d; ++r) dst[r] = detail::quantize_f32(unit(center_rng));
  }

  auto sample_split = [&](const std::vector<ClassId>& classes,
                          std::size_t per_class, std::uint64_t stream) {
    LabeledSplit split;
    split.features = Matrix(d, classes.size() * per_class);
    split.labels.reserve(classes.size() * per_class);
    auto rng = make_engine(spec.seed, stream);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::size_t col = 0;
    for (ClassId id : classes) {
      auto center = ds.attributes.col(ds.catalog.index_of(id));
      for (std::size_t p = 0; p < per_class; ++p) {
        auto dst = split.features.col(col++);
        for (std::size_t r = 0; r < d; ++r)
          dst[r] = detail::quantize_f32(center[r] + spec.cluster_spread * noise(rng));
        split.labels.push_back(id);
      }
    }
    return split;
  };

  ds.train_seen = sample_split(ds.catalog.seen_ids(), spec.train_per_class, 3);
  ds.test_seen = sample_split(ds.catalog.seen_ids(), spec.test_per_class, 4);
  ds.test_unseen = sample_split(ds.catalog.unseen_ids(), spec.test_per_class, 5);

  auto [aux_features, aux_labels] =
      generate_auxiliary(ds.catalog, ds.attributes, spec.aux_per_class,
                         spec.noise_scale, mix_seed(spec.seed, 6));
  ds.aux_unseen = LabeledSplit{std::move(aux_features), std::move(aux_labels)};

  ds.validate();
  return ds;
}

}  // namespace gzsl
