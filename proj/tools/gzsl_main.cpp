// Command-line front end: dataset generation, training, evaluation, sweeps.
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gzsl/gzsl.hpp"

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr const char* kModelSeen = "m_s.msel";
constexpr const char* kModelUnseen = "m_u.msel";
constexpr const char* kModelJoint = "m_t.msel";
constexpr const char* kModelSelector = "m_sel.msel";

gzsl::Strategy parse_strategy(const std::string& name) {
  if (name == "2way") return gzsl::Strategy::TwoWay;
  if (name == "2way-sa") return gzsl::Strategy::TwoWaySA;
  if (name == "3way") return gzsl::Strategy::ThreeWay;
  throw UsageError("unknown strategy '" + name + "'");
}

std::string format_0_100(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << value * 100.0;
  return out.str();
}

struct LoadedModels {
  gzsl::SelectorModel selector;
  gzsl::LinearModel m_s, m_u, m_t;
};

LoadedModels load_models(const std::string& dir) {
  LoadedModels m;
  m.selector = gzsl::read_selector_model((fs::path(dir) / kModelSelector).string());
  m.m_s = gzsl::read_linear_model((fs::path(dir) / kModelSeen).string());
  m.m_u = gzsl::read_linear_model((fs::path(dir) / kModelUnseen).string());
  m.m_t = gzsl::read_linear_model((fs::path(dir) / kModelJoint).string());
  return m;
}

void check_dims(const gzsl::GzslDataset& dataset, const LoadedModels& models,
                const std::string& dir) {
  auto expect = [&](std::size_t dim, const char* file) {
    if (dim != dataset.feature_dim())
      gzsl::raise(gzsl::Errc::dimension_mismatch,
                  std::string(file) + " in " + dir + " has dim " +
                      std::to_string(dim) + " but the dataset has dim " +
                      std::to_string(dataset.feature_dim()));
  };
  expect(models.selector.dim(), kModelSelector);
  expect(models.m_s.dim(), kModelSeen);
  expect(models.m_u.dim(), kModelUnseen);
  expect(models.m_t.dim(), kModelJoint);
}

void add_common_flags(CLI::App* sub, std::uint64_t& seed) {
  sub->add_option("--seed", seed, "Random seed")->capture_default_str();
  sub->set_config("--config", "", "Read options from a key = value file");
  sub->allow_config_extras(false);
}

void write_manifest(const CLI::App* sub, const fs::path& path) {
  std::ofstream out(path);
  if (!out.is_open())
    gzsl::raise(gzsl::Errc::io_failure, "cannot write " + path.string());
  out << sub->config_to_str(true, false);
}

const gzsl::GridPoint& best_grid_point(const gzsl::CvResult& cv) {
  for (const auto& point : cv.grid)
    if (point.config == cv.best_config) return point;
  gzsl::raise(gzsl::Errc::invariant_violation, "best config missing from grid");
}

void print_csv_row(std::ostream& out, const gzsl::FusionConfig& cfg,
                   double acc_s, double acc_u, double h) {
  out << std::fixed << std::setprecision(4) << cfg.sigma << ',' << cfg.c << ','
      << cfg.o_s << ',' << cfg.o_u << ',' << acc_s << ',' << acc_u << ',' << h
      << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized zero-shot learning with selector-routed linear classifiers"};
  app.require_subcommand(1);

  // gen-synth
  gzsl::SyntheticSpec synth;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic benchmark container");
  gen->add_option("--seen", synth.n_seen_classes, "Seen class count")->capture_default_str();
  gen->add_option("--unseen", synth.n_unseen_classes, "Unseen class count")->capture_default_str();
  gen->add_option("--dim", synth.dim, "Feature dimension")->capture_default_str();
  gen->add_option("--train-per-class", synth.train_per_class, "Training points per seen class")->capture_default_str();
  gen->add_option("--test-per-class", synth.test_per_class, "Test points per class")->capture_default_str();
  gen->add_option("--aux-per-class", synth.aux_per_class, "Auxiliary points per unseen class")->capture_default_str();
  gen->add_option("--spread", synth.cluster_spread, "Cluster standard deviation")->capture_default_str();
  gen->add_option("--noise-scale", synth.noise_scale, "Auxiliary generator noise scale")->capture_default_str();
  gen->add_option("-o,--out", gen_out, "Output container path")->required();
  add_common_flags(gen, synth.seed);

  // train
  std::string train_data, train_out_dir;
  gzsl::TrainHyper hyper;
  std::size_t svm_iters = gzsl::kSelectorIterations;
  auto* train = app.add_subcommand("train", "Train the branch, joint and selector models");
  train->add_option("--data", train_data, "Dataset container")->required();
  train->add_option("--out-dir", train_out_dir, "Directory for model files")->required();
  train->add_option("--epochs", hyper.epochs, "Training epochs")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  train->add_option("--batch-size", hyper.batch_size, "Mini-batch size")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  train->add_option("--lr", hyper.learning_rate, "Adam learning rate")->capture_default_str();
  train->add_option("--beta1", hyper.adam_beta1, "Adam beta1")->capture_default_str();
  train->add_option("--beta2", hyper.adam_beta2, "Adam beta2")->capture_default_str();
  train->add_option("--eps", hyper.adam_eps, "Adam epsilon")->capture_default_str();
  train->add_option("--weight-decay", hyper.weight_decay, "Softmax L2 strength")->capture_default_str();
  train->add_option("--svm-lambda", hyper.reg_lambda, "Selector hinge regularizer")->capture_default_str();
  train->add_option("--svm-iters", svm_iters, "Selector subgradient iterations")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  add_common_flags(train, hyper.seed);

  // eval
  std::string eval_data, eval_models, eval_strategy = "2way", eval_csv;
  gzsl::FusionConfig eval_cfg;
  bool eval_cv = false;
  double eval_val_fraction = 0.2;
  std::uint64_t eval_seed = 42;
  auto* eval = app.add_subcommand("eval", "Evaluate models under the GZSL protocol");
  eval->add_option("--data", eval_data, "Dataset container")->required();
  eval->add_option("--models", eval_models, "Model directory")->required();
  eval->add_option("--strategy", eval_strategy, "2way | 2way-sa | 3way")->capture_default_str();
  auto* opt_sigma = eval->add_option("--sigma", eval_cfg.sigma, "Sigmoid slope")->capture_default_str();
  auto* opt_c = eval->add_option("--c", eval_cfg.c, "Joint-model importance");
  auto* opt_os = eval->add_option("--o-s", eval_cfg.o_s, "Seen-branch offset");
  auto* opt_ou = eval->add_option("--o-u", eval_cfg.o_u, "Unseen-branch offset");
  eval->add_flag("--raw-mix", eval_cfg.raw_mix, "Mix raw logits in 2way-sa");
  eval->add_flag("--cv", eval_cv, "Pick fusion parameters by cross-validation");
  eval->add_option("--val-fraction", eval_val_fraction, "Validation fraction for --cv")->capture_default_str();
  eval->add_option("--csv", eval_csv, "Also write the result row to this CSV");
  add_common_flags(eval, eval_seed);

  // sweep
  std::string sweep_data, sweep_models, sweep_strategy = "2way-sa", sweep_out;
  std::vector<double> sweep_sigmas;
  bool sweep_cv = false, sweep_raw_mix = false;
  double sweep_val_fraction = 0.2;
  std::uint64_t sweep_seed = 42;
  auto* sweep = app.add_subcommand("sweep", "Sigma sweep or cross-validation grid, CSV output");
  sweep->add_option("--data", sweep_data, "Dataset container")->required();
  sweep->add_option("--models", sweep_models, "Model directory (sigma sweep)");
  sweep->add_option("--sigma-list", sweep_sigmas, "Comma-separated sigmas")->delimiter(',');
  sweep->add_flag("--cv", sweep_cv, "Evaluate the cross-validation grid instead");
  sweep->add_option("--strategy", sweep_strategy, "Strategy for --cv")->capture_default_str();
  sweep->add_flag("--raw-mix", sweep_raw_mix, "Mix raw logits in the sweep");
  sweep->add_option("--val-fraction", sweep_val_fraction, "Validation fraction for --cv")->capture_default_str();
  sweep->add_option("-o,--out", sweep_out, "Output CSV path")->required();
  add_common_flags(sweep, sweep_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      const auto dataset = gzsl::make_synthetic_benchmark(synth);
      gzsl::write_container(dataset, gen_out);
      std::cout << "classes: " << dataset.catalog.num_seen() << " seen + "
                << dataset.catalog.num_unseen() << " unseen\n"
                << "dim: " << dataset.feature_dim() << "\n"
                << "train_seen: " << dataset.train_seen.count()
                << "  aux_unseen: " << dataset.aux_unseen.count()
                << "  test_seen: " << dataset.test_seen.count()
                << "  test_unseen: " << dataset.test_unseen.count() << "\n"
                << "seed: " << synth.seed << "\n"
                << "wrote: " << gen_out << "\n";
    } else if (train->parsed()) {
      const auto dataset = gzsl::read_container(train_data);
      fs::create_directories(train_out_dir);

      const auto m_s = gzsl::train_softmax(dataset.train_seen.features,
                                           dataset.train_seen.labels,
                                           dataset.catalog.seen_ids(), hyper);
      const auto m_u = gzsl::train_softmax(dataset.aux_unseen.features,
                                           dataset.aux_unseen.labels,
                                           dataset.catalog.unseen_ids(), hyper);
      const auto joint_features =
          gzsl::hcat(dataset.train_seen.features, dataset.aux_unseen.features);
      auto joint_labels = dataset.train_seen.labels;
      joint_labels.insert(joint_labels.end(), dataset.aux_unseen.labels.begin(),
                          dataset.aux_unseen.labels.end());
      const auto m_t = gzsl::train_softmax(joint_features, joint_labels,
                                           dataset.catalog.all_ids(), hyper);
      const auto selector =
          gzsl::train_selector(dataset.train_seen.features,
                               dataset.aux_unseen.features, hyper, svm_iters);

      const fs::path dir(train_out_dir);
      gzsl::write_model(m_s, (dir / kModelSeen).string());
      gzsl::write_model(m_u, (dir / kModelUnseen).string());
      gzsl::write_model(m_t, (dir / kModelJoint).string());
      gzsl::write_model(selector, (dir / kModelSelector).string());
      write_manifest(train, dir / "manifest.txt");
      std::cout << "wrote: " << (dir / kModelSeen).string() << "\n"
                << "wrote: " << (dir / kModelUnseen).string() << "\n"
                << "wrote: " << (dir / kModelJoint).string() << "\n"
                << "wrote: " << (dir / kModelSelector).string() << "\n"
                << "wrote: " << (dir / "manifest.txt").string() << "\n";
    } else if (eval->parsed()) {
      const auto dataset = gzsl::read_container(eval_data);
      const auto models = load_models(eval_models);
      check_dims(dataset, models, eval_models);

      eval_cfg.strategy = parse_strategy(eval_strategy);
      if (eval_cv) {
        const auto cv = gzsl::cross_validate(dataset, eval_cfg.strategy,
                                             gzsl::CvGrids::defaults(),
                                             eval_val_fraction, eval_seed);
        const bool raw_mix = eval_cfg.raw_mix;
        eval_cfg = cv.best_config;
        eval_cfg.raw_mix = raw_mix;
      } else if (eval_cfg.strategy == gzsl::Strategy::ThreeWay) {
        if (opt_c->count() == 0 || opt_os->count() == 0 || opt_ou->count() == 0)
          throw UsageError("3way needs --c, --o-s and --o-u (or --cv)");
      }
      (void)opt_sigma;  // 2way-sa falls back to the documented --sigma default

      const auto report =
          gzsl::run_gzsl_protocol(dataset, models.selector, models.m_s, models.m_u,
                                  eval_cfg.strategy == gzsl::Strategy::ThreeWay
                                      ? &models.m_t
                                      : nullptr,
                                  eval_cfg);
      // Table layout: Acc_U (ts), Acc_S (tr), H on the 0-100 scale.
      std::cout << format_0_100(report.acc_unseen) << ' '
                << format_0_100(report.acc_seen) << ' '
                << format_0_100(report.harmonic) << "\n";
      if (!eval_csv.empty()) {
        std::ofstream out(eval_csv);
        if (!out.is_open())
          gzsl::raise(gzsl::Errc::io_failure, "cannot write " + eval_csv);
        out << gzsl::kCsvHeader << '\n';
        print_csv_row(out, eval_cfg, report.acc_seen, report.acc_unseen,
                      report.harmonic);
      }
    } else if (sweep->parsed()) {
      const auto dataset = gzsl::read_container(sweep_data);
      std::ofstream out(sweep_out);
      if (!out.is_open())
        gzsl::raise(gzsl::Errc::io_failure, "cannot write " + sweep_out);

      if (sweep_cv) {
        const auto strategy = parse_strategy(sweep_strategy);
        const auto cv = gzsl::cross_validate(dataset, strategy,
                                             gzsl::CvGrids::defaults(),
                                             sweep_val_fraction, sweep_seed);
        gzsl::write_csv(out, cv.grid);
        const auto& best = best_grid_point(cv);
        print_csv_row(std::cout, best.config, best.acc_seen, best.acc_unseen,
                      best.harmonic);
      } else {
        if (sweep_sigmas.empty())
          throw UsageError("sweep needs --sigma-list or --cv");
        if (sweep_models.empty())
          throw UsageError("--sigma-list sweep needs --models");
        const auto models = load_models(sweep_models);
        check_dims(dataset, models, sweep_models);
        const auto rows = gzsl::sigma_sweep(dataset, models.selector, models.m_s,
                                            models.m_u, sweep_sigmas,
                                            sweep_raw_mix);
        gzsl::write_csv(out, rows);
        std::size_t best = 0;
        for (std::size_t i = 1; i < rows.size(); ++i)
          if (rows[i].harmonic > rows[best].harmonic) best = i;
        gzsl::FusionConfig cfg;
        cfg.sigma = rows[best].sigma;
        print_csv_row(std::cout, cfg, rows[best].acc_seen, rows[best].acc_unseen,
                      rows[best].harmonic);
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const gzsl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
