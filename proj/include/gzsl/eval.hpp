#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gzsl/classifiers.hpp"
#include "gzsl/dataset.hpp"
#include "gzsl/error.hpp"
#include "gzsl/fusion.hpp"
#include "gzsl/rng.hpp"

namespace gzsl {

// Per-class mean top-1 accuracy: accuracy is computed inside each class and
// averaged uniformly over classes, so class sizes do not bias the result.
inline double per_class_top1(std::span<const ClassId> predictions,
                             std::span<const ClassId> labels,
                             std::span<const ClassId> classes) {
  require(predictions.size() == labels.size(), Errc::dimension_mismatch,
          "prediction/label count mismatch");
  std::unordered_map<ClassId, std::pair<std::size_t, std::size_t>> tally;
  for (ClassId id : classes) tally.emplace(id, std::make_pair(0u, 0u));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = tally.find(labels[i]);
    require(it != tally.end(), Errc::label_out_of_range,
            "label " + std::to_string(labels[i]) + " outside class set");
    it->second.second += 1;
    if (predictions[i] == labels[i]) it->second.first += 1;
  }
  double acc = 0.0;
  for (ClassId id : classes) {
    const auto& [correct, total] = tally.at(id);
    require(total > 0, Errc::protocol_violation,
            "class " + std::to_string(id) + " has zero test samples");
    acc += static_cast<double>(correct) / static_cast<double>(total);
  }
  return acc / static_cast<double>(classes.size());
}

// H = 2ab / (a + b), 0 when both are 0. Scale-free, so it accepts both the
// internal [0,1] accuracies and 0-100 table values.
inline double harmonic_mean(double acc_s, double acc_u) {
  require(acc_s >= 0.0 && acc_u >= 0.0, Errc::invalid_argument,
          "accuracies must be non-negative");
  const double sum = acc_s + acc_u;
  if (sum <= 0.0) return 0.0;
  return 2.0 * acc_s * acc_u / sum;
}

// Protocol result. Accuracies are stored in [0,1]; the CLI rescales to the
// 0-100 convention when printing.
struct EvalReport {
  double acc_seen = 0.0;
  double acc_unseen = 0.0;
  double harmonic = 0.0;
  std::map<ClassId, double> per_class;
  std::size_t n_total = 0;
  std::size_t n_seen_branch = 0;    // test points with s >= 0
  std::size_t n_unseen_branch = 0;  // test points with s < 0
};

namespace detail {

inline std::map<ClassId, double> per_class_breakdown(
    std::span<const ClassId> predictions, std::span<const ClassId> labels) {
  std::map<ClassId, std::pair<std::size_t, std::size_t>> tally;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& [correct, total] = tally[labels[i]];
    total += 1;
    if (predictions[i] == labels[i]) correct += 1;
  }
  std::map<ClassId, double> out;
  for (const auto& [id, counts] : tally)
    out[id] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
  return out;
}

}  // namespace detail

// Runs the GZSL protocol: every test point is fused against the full
// catalog; Acc_S comes from the seen test split, Acc_U from the unseen one.
inline EvalReport run_gzsl_protocol(const GzslDataset& dataset,
                                    const SelectorModel& selector,
                                    const LinearModel& m_s,
                                    const LinearModel& m_u,
                                    const LinearModel* m_t,
                                    const FusionConfig& cfg) {
  require(dataset.test_seen.count() > 0 && dataset.test_unseen.count() > 0,
          Errc::protocol_violation, "test splits must be non-empty");

  EvalReport report;
  auto evaluate_split = [&](const LabeledSplit& split) {
    std::vector<ClassId> predictions;
    predictions.reserve(split.count());
    for (std::size_t j = 0; j < split.count(); ++j) {
      auto x = split.features.col(j);
      const auto fused = fuse(x, selector, m_s, m_u, m_t, cfg, dataset.catalog);
      predictions.push_back(dataset.catalog.all_ids()[fused.prediction_index()]);
      if (selector_score(selector, x) >= 0.0)
        report.n_seen_branch += 1;
      else
        report.n_unseen_branch += 1;
    }
    return predictions;
  };

  const auto pred_seen = evaluate_split(dataset.test_seen);
  const auto pred_unseen = evaluate_split(dataset.test_unseen);
  report.n_total = dataset.test_seen.count() + dataset.test_unseen.count();

  report.acc_seen = per_class_top1(pred_seen, dataset.test_seen.labels,
                                   dataset.catalog.seen_ids());
  report.acc_unseen = per_class_top1(pred_unseen, dataset.test_unseen.labels,
                                     dataset.catalog.unseen_ids());
  report.harmonic = harmonic_mean(report.acc_seen, report.acc_unseen);

  for (const auto& [id, acc] :
       detail::per_class_breakdown(pred_seen, dataset.test_seen.labels))
    report.per_class[id] = acc;
  for (const auto& [id, acc] :
       detail::per_class_breakdown(pred_unseen, dataset.test_unseen.labels))
    report.per_class[id] = acc;
  return report;
}

struct CvGrids {
  std::vector<double> sigma;
  std::vector<double> c;
  std::vector<double> o_s;
  std::vector<double> o_u;

  static CvGrids defaults() {
    CvGrids g;
    g.sigma = {0.1, 0.3, 1.0, 3.0, 10.0, 30.0};
    g.c = {0.0, 0.25, 0.5, 1.0, 2.0};
    g.o_s = {0.0, 0.5, 1.0, 2.0};
    g.o_u = g.o_s;
    return g;
  }
};

struct GridPoint {
  FusionConfig config;
  double acc_seen = 0.0;
  double acc_unseen = 0.0;
  double harmonic = 0.0;
};

struct CvResult {
  FusionConfig best_config;
  double best_harmonic = 0.0;
  std::vector<GridPoint> grid;  // every evaluated point, in evaluation order
};

namespace detail {

// Seeded stratified split of a labeled split into fit/val parts. Errors if
// any class would lose all fit or all val points.
inline std::pair<LabeledSplit, LabeledSplit> stratified_split(
    const LabeledSplit& split, double val_fraction, std::mt19937_64& rng) {
  std::map<ClassId, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < split.count(); ++i)
    by_class[split.labels[i]].push_back(i);

  std::vector<std::size_t> fit_idx, val_idx;
  for (auto& [id, indices] : by_class) {
    std::shuffle(indices.begin(), indices.end(), rng);
    const auto n = indices.size();
    const auto n_val = static_cast<std::size_t>(
        std::floor(val_fraction * static_cast<double>(n)));
    require(n_val >= 1 && n_val < n, Errc::split_too_small,
            "split too small: class " + std::to_string(id) + " has " +
                std::to_string(n) + " points");
    val_idx.insert(val_idx.end(), indices.begin(), indices.begin() + n_val);
    fit_idx.insert(fit_idx.end(), indices.begin() + n_val, indices.end());
  }
  std::sort(fit_idx.begin(), fit_idx.end());
  std::sort(val_idx.begin(), val_idx.end());

  auto gather = [&](const std::vector<std::size_t>& idx) {
    LabeledSplit out;
    out.features = Matrix(split.features.rows(), idx.size());
    out.labels.reserve(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
      auto src = split.features.col(idx[j]);
      auto dst = out.features.col(j);
      std::copy(src.begin(), src.end(), dst.begin());
      out.labels.push_back(split.labels[idx[j]]);
    }
    return out;
  };
  return {gather(fit_idx), gather(val_idx)};
}

}  // namespace detail

// Picks fusion parameters on held-out parts of train_seen and aux_unseen:
// the val originals stand in for the seen test split and the val auxiliaries
// for the unseen one (real unseen data is unavailable at training time).
// ThreeWay evaluates the full c x o_s x o_u product, then refines around the
// best symmetric (o_s == o_u) point with midpoint pairs toward the
// neighbouring grid values. Ties keep the earliest evaluated config.
inline CvResult cross_validate(const GzslDataset& dataset, Strategy strategy,
                               const CvGrids& grids, double val_fraction,
                               std::uint64_t seed,
                               const TrainHyper& hyper = TrainHyper{}) {
  require(val_fraction > 0.0 && val_fraction < 1.0, Errc::invalid_argument,
          "val_fraction must lie in (0, 1)");
  if (strategy == Strategy::TwoWaySA)
    require(!grids.sigma.empty(), Errc::invalid_argument, "empty sigma grid");
  if (strategy == Strategy::ThreeWay)
    require(!grids.c.empty() && !grids.o_s.empty() && !grids.o_u.empty(),
            Errc::invalid_argument, "empty 3-way grid");

  auto rng = make_engine(seed, 7);
  auto [fit_orig, val_orig] =
      detail::stratified_split(dataset.train_seen, val_fraction, rng);
  auto [fit_aux, val_aux] =
      detail::stratified_split(dataset.aux_unseen, val_fraction, rng);

  const auto selector = train_selector(fit_orig.features, fit_aux.features, hyper);
  const auto m_s = train_softmax(fit_orig.features, fit_orig.labels,
                                 dataset.catalog.seen_ids(), hyper);
  const auto m_u = train_softmax(fit_aux.features, fit_aux.labels,
                                 dataset.catalog.unseen_ids(), hyper);
  LinearModel m_t;
  if (strategy == Strategy::ThreeWay) {
    const Matrix joint = hcat(fit_orig.features, fit_aux.features);
    std::vector<ClassId> joint_labels = fit_orig.labels;
    joint_labels.insert(joint_labels.end(), fit_aux.labels.begin(),
                        fit_aux.labels.end());
    m_t = train_softmax(joint, joint_labels, dataset.catalog.all_ids(), hyper);
  }

  auto surrogate_eval = [&](const FusionConfig& cfg) {
    auto predict = [&](const LabeledSplit& split) {
      std::vector<ClassId> preds;
      preds.reserve(split.count());
      for (std::size_t j = 0; j < split.count(); ++j) {
        const auto fused =
            fuse(split.features.col(j), selector, m_s, m_u,
                 strategy == Strategy::ThreeWay ? &m_t : nullptr, cfg,
                 dataset.catalog);
        preds.push_back(dataset.catalog.all_ids()[fused.prediction_index()]);
      }
      return preds;
    };
    GridPoint point;
    point.config = cfg;
    point.acc_seen = per_class_top1(predict(val_orig), val_orig.labels,
                                    dataset.catalog.seen_ids());
    point.acc_unseen = per_class_top1(predict(val_aux), val_aux.labels,
                                      dataset.catalog.unseen_ids());
    point.harmonic = harmonic_mean(point.acc_seen, point.acc_unseen);
    return point;
  };

  CvResult result;
  auto consider = [&](const FusionConfig& cfg) {
    auto point = surrogate_eval(cfg);
    if (result.grid.empty() || point.harmonic > result.best_harmonic) {
      result.best_config = cfg;
      result.best_harmonic = point.harmonic;
    }
    result.grid.push_back(std::move(point));
  };

  switch (strategy) {
    case Strategy::TwoWay: {
      FusionConfig cfg;
      cfg.strategy = Strategy::TwoWay;
      consider(cfg);
      break;
    }
    case Strategy::TwoWaySA: {
      for (double sigma : grids.sigma) {
        FusionConfig cfg;
        cfg.strategy = Strategy::TwoWaySA;
        cfg.sigma = sigma;
        consider(cfg);
      }
      break;
    }
    case Strategy::ThreeWay: {
      for (double c : grids.c)
        for (double o_s : grids.o_s)
          for (double o_u : grids.o_u) {
            FusionConfig cfg;
            cfg.strategy = Strategy::ThreeWay;
            cfg.c = c;
            cfg.o_s = o_s;
            cfg.o_u = o_u;
            consider(cfg);
          }
      if (result.best_config.o_s == result.best_config.o_u) {
        // Midpoints toward the neighbouring o-grid values, asymmetric pairs
        // only (symmetric grid points were covered above).
        std::vector<double> sorted_o = grids.o_s;
        std::sort(sorted_o.begin(), sorted_o.end());
        const double v = result.best_config.o_s;
        std::vector<double> neighbourhood = {v};
        auto pos = std::find(sorted_o.begin(), sorted_o.end(), v);
        if (pos != sorted_o.end()) {
          if (pos != sorted_o.begin()) neighbourhood.push_back(v - 0.5 * (v - *(pos - 1)));
          if (pos + 1 != sorted_o.end()) neighbourhood.push_back(v + 0.5 * (*(pos + 1) - v));
        }
        FusionConfig cfg = result.best_config;
        for (double o_s : neighbourhood)
          for (double o_u : neighbourhood) {
            if (o_s == o_u) continue;
            cfg.o_s = o_s;
            cfg.o_u = o_u;
            consider(cfg);
          }
      }
      break;
    }
  }
  return result;
}

struct SweepRow {
  double sigma = 0.0;
  double acc_seen = 0.0;
  double acc_unseen = 0.0;
  double harmonic = 0.0;
};

// One protocol run per sigma with fixed models; rows come back in input order.
inline std::vector<SweepRow> sigma_sweep(const GzslDataset& dataset,
                                         const SelectorModel& selector,
                                         const LinearModel& m_s,
                                         const LinearModel& m_u,
                                         std::span<const double> sigmas,
                                         bool raw_mix = false) {
  std::vector<SweepRow> rows;
  rows.reserve(sigmas.size());
  for (double sigma : sigmas) {
    FusionConfig cfg;
    cfg.strategy = Strategy::TwoWaySA;
    cfg.sigma = sigma;
    cfg.raw_mix = raw_mix;
    const auto report = run_gzsl_protocol(dataset, selector, m_s, m_u, nullptr, cfg);
    rows.push_back({sigma, report.acc_seen, report.acc_unseen, report.harmonic});
  }
  return rows;
}

inline constexpr const char* kCsvHeader =
    "sigma,c,o_s,o_u,acc_seen,acc_unseen,harmonic";

namespace detail {

inline void csv_row(std::ostream& out, const FusionConfig& cfg, double acc_s,
                    double acc_u, double h) {
  out << std::fixed << std::setprecision(4) << cfg.sigma << ',' << cfg.c << ','
      << cfg.o_s << ',' << cfg.o_u << ',' << acc_s << ',' << acc_u << ',' << h
      << '\n';
}

}  // namespace detail

inline void write_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << kCsvHeader << '\n';
  for (const auto& row : rows) {
    FusionConfig cfg;
    cfg.sigma = row.sigma;
    detail::csv_row(out, cfg, row.acc_seen, row.acc_unseen, row.harmonic);
  }
}

inline void write_csv(std::ostream& out, std::span<const GridPoint> points) {
  out << kCsvHeader << '\n';
  for (const auto& point : points)
    detail::csv_row(out, point.config, point.acc_seen, point.acc_unseen,
                    point.harmonic);
}

}  // namespace gzsl
