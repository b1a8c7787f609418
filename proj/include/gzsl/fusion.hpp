#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gzsl/classifiers.hpp"
#include "gzsl/dataset.hpp"
#include "gzsl/error.hpp"

namespace gzsl {

enum class Strategy { TwoWay, TwoWaySA, ThreeWay };

inline const char* to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::TwoWay: return "2way";
    case Strategy::TwoWaySA: return "2way-sa";
    case Strategy::ThreeWay: return "3way";
  }
  return "?";
}

// Fusion parameters. Fields unused by the chosen strategy are stored but
// ignored. raw_mix switches the soft-assignment mixture from per-branch
// softmax (default) to literal raw-logit placement.
struct FusionConfig {
  Strategy strategy = Strategy::TwoWay;
  double sigma = 1.0;  // sigmoid slope, > 0
  double c = 0.0;      // importance of the joint model in the 3-way branch term
  double o_s = 0.0;    // seen-branch offset
  double o_u = 0.0;    // unseen-branch offset
  bool raw_mix = false;

  friend bool operator==(const FusionConfig&, const FusionConfig&) = default;
};

enum class Branch { Seen, Unseen, Mixed };

// Final score vector over the full catalog (seen classes first, then
// unseen, in catalog order). Prediction is the argmax with lowest-index
// tie-break.
struct FusedScores {
  std::vector<double> values;
  Branch branch_taken = Branch::Mixed;

  std::size_t prediction_index() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
      if (values[i] > values[best]) best = i;
    return best;
  }
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Places subset scores at their catalog positions; everything else gets
// `fill` (a -inf sentinel is allowed).
inline std::vector<double> embed_branch(std::span<const double> scores,
                                        std::span<const ClassId> subset_ids,
                                        const ClassCatalog& catalog,
                                        double fill) {
  require(scores.size() == subset_ids.size(), Errc::dimension_mismatch,
          "embed_branch: score/id count mismatch");
  std::vector<double> out(catalog.num_classes(), fill);
  for (std::size_t i = 0; i < subset_ids.size(); ++i)
    out[catalog.index_of(subset_ids[i])] = scores[i];
  return out;
}

// Hard 2-way routing: the seen branch wins at s == 0.
inline FusedScores fuse_2way(double s, std::span<const double> g_s,
                             std::span<const double> g_u,
                             const ClassCatalog& catalog) {
  FusedScores out;
  if (s >= 0.0) {
    out.values = embed_branch(g_s, catalog.seen_ids(), catalog, kNegInf);
    out.branch_taken = Branch::Seen;
  } else {
    out.values = embed_branch(g_u, catalog.unseen_ids(), catalog, kNegInf);
    out.branch_taken = Branch::Unseen;
  }
  return out;
}

// p_s = 1 / (1 + exp(-sigma * s)), evaluated in the branch form that never
// overflows; p_u = 1 - p_s.
inline double sigmoid_domain_prob(double s, double sigma) {
  require(sigma > 0.0, Errc::invalid_argument, "sigma must be positive");
  const double z = sigma * s;
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace detail {

inline std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> out(scores.size());
  double max_score = kNegInf;
  for (double v : scores) max_score = std::max(max_score, v);
  double denom = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(scores[i] - max_score);
    denom += out[i];
  }
  for (double& v : out) v /= denom;
  return out;
}

}  // namespace detail

// Soft assignment: both branches are softmax-normalized, then mixed with
// weights p_s and 1 - p_s, giving a distribution over the full catalog.
// With raw_mix the raw logits are placed and weighted instead.
inline FusedScores fuse_2way_sa(double p_s, std::span<const double> g_s,
                                std::span<const double> g_u,
                                const ClassCatalog& catalog,
                                bool raw_mix = false) {
  require(p_s >= 0.0 && p_s <= 1.0, Errc::invalid_argument,
          "p_s must lie in [0, 1]");
  require(g_s.size() == catalog.num_seen() && g_u.size() == catalog.num_unseen(),
          Errc::dimension_mismatch, "branch score lengths must match catalog");
  FusedScores out;
  out.branch_taken = Branch::Mixed;
  out.values.assign(catalog.num_classes(), 0.0);
  const double p_u = 1.0 - p_s;
  if (raw_mix) {
    for (std::size_t i = 0; i < g_s.size(); ++i)
      out.values[catalog.index_of(catalog.seen_ids()[i])] = p_s * g_s[i];
    for (std::size_t i = 0; i < g_u.size(); ++i)
      out.values[catalog.index_of(catalog.unseen_ids()[i])] = p_u * g_u[i];
    return out;
  }
  const auto pm_s = detail::softmax(g_s);
  const auto pm_u = detail::softmax(g_u);
  for (std::size_t i = 0; i < pm_s.size(); ++i)
    out.values[catalog.index_of(catalog.seen_ids()[i])] = p_s * pm_s[i];
  for (std::size_t i = 0; i < pm_u.size(); ++i)
    out.values[catalog.index_of(catalog.unseen_ids()[i])] = p_u * pm_u[i];
  return out;
}

namespace detail {

// branch_term - offset with infinities kept meaningful: an infinite offset
// forces the branch off (+inf) or on (-inf) without manufacturing NaNs.
inline double apply_offset(double term, double offset) {
  if (std::isinf(offset)) {
    if (offset > 0.0) return kNegInf;
    return term == kNegInf ? kNegInf : std::numeric_limits<double>::infinity();
  }
  return term - offset;
}

}  // namespace detail

// Masked-max fusion: the routed branch is corrected by the joint model
// (c * g_t + g_branch - o_branch on the branch's coordinates, -inf
// elsewhere) and the result is an elementwise max against g_t. Off-branch
// coordinates therefore always carry g_t.
inline FusedScores fuse_3way(double s, std::span<const double> g_s,
                             std::span<const double> g_u,
                             std::span<const double> g_t,
                             const FusionConfig& cfg,
                             const ClassCatalog& catalog) {
  require(g_t.size() == catalog.num_classes(), Errc::dimension_mismatch,
          "g_t must cover the full catalog");
  require(g_s.size() == catalog.num_seen() && g_u.size() == catalog.num_unseen(),
          Errc::dimension_mismatch, "branch score lengths must match catalog");

  const bool seen_branch = s >= 0.0;
  const auto& branch_ids = seen_branch ? catalog.seen_ids() : catalog.unseen_ids();
  const auto g_branch = seen_branch ? g_s : g_u;
  const double offset = seen_branch ? cfg.o_s : cfg.o_u;

  FusedScores out;
  out.branch_taken = seen_branch ? Branch::Seen : Branch::Unseen;
  out.values.assign(g_t.begin(), g_t.end());
  for (std::size_t i = 0; i < branch_ids.size(); ++i) {
    const std::size_t idx = catalog.index_of(branch_ids[i]);
    double term = g_branch[i];
    if (cfg.c != 0.0) term += cfg.c * g_t[idx];
    const double adjusted = detail::apply_offset(term, offset);
    out.values[idx] = std::max(adjusted, g_t[idx]);
  }
  return out;
}

// Scores x with the selector and branch classifiers, then dispatches to the
// configured strategy. m_t may be null except for ThreeWay; its scores are
// embedded over the full catalog with a -inf fill, so a joint model trained
// on a class subset simply never predicts outside it.
inline FusedScores fuse(std::span<const double> x, const SelectorModel& selector,
                        const LinearModel& m_s, const LinearModel& m_u,
                        const LinearModel* m_t, const FusionConfig& cfg,
                        const ClassCatalog& catalog) {
  require(cfg.strategy != Strategy::ThreeWay || m_t != nullptr,
          Errc::config_error, "ThreeWay fusion requires the joint model");
  const double s = selector_score(selector, x);
  const auto g_s = score_linear(m_s, x);
  const auto g_u = score_linear(m_u, x);
  switch (cfg.strategy) {
    case Strategy::TwoWay:
      return fuse_2way(s, g_s, g_u, catalog);
    case Strategy::TwoWaySA:
      return fuse_2way_sa(sigmoid_domain_prob(s, cfg.sigma), g_s, g_u, catalog,
                          cfg.raw_mix);
    case Strategy::ThreeWay: {
      const auto g_t_raw = score_linear(*m_t, x);
      const auto g_t = embed_branch(g_t_raw, m_t->class_ids, catalog, kNegInf);
      return fuse_3way(s, g_s, g_u, g_t, cfg, catalog);
    }
  }
  raise(Errc::config_error, "unknown strategy");
}

}  // namespace gzsl
