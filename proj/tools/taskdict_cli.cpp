// Command line front end: train, encode, predict, evaluate, and
// hyperparameter search over the config-file driven pipeline.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <taskdict/dataset.hpp>
#include <taskdict/errors.hpp>
#include <taskdict/metrics.hpp>
#include <taskdict/model_io.hpp>
#include <taskdict/run_config.hpp>
#include <taskdict/tasks.hpp>

namespace {

using namespace taskdict;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

struct TrainReport {
  TaskModel model;
  // One telemetry block per trained (class, stage) pair.
  struct Block {
    std::string name;
    std::vector<TelemetryPoint> points;
  };
  std::vector<Block> telemetry;
};

std::vector<Sample> relabel_one_vs_all(const std::vector<Sample>& data, int positive_class) {
  std::vector<Sample> out = data;
  for (auto& s : out) s.label = s.label == positive_class ? 1 : -1;
  return out;
}

std::vector<Sample> strip_to_signals(const std::vector<Sample>& data,
                                     const std::optional<Matrix>& Z) {
  std::vector<Sample> out;
  out.reserve(data.size());
  for (const auto& s : data) {
    Sample u;
    u.x = Z ? Vector(*Z * s.x) : s.x;
    out.push_back(std::move(u));
  }
  return out;
}

Matrix initial_transform(const RunConfig& cfg, const std::vector<Sample>& data,
                         const std::string& kind) {
  const Index r = cfg.task.r;
  const Index m = cfg.task.m;
  if (kind == "identity") return make_baseline_z(BaselineZ::identity, nullptr, r, m, nullptr);
  if (kind == "pca") {
    Matrix X(m, static_cast<Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) X.col(static_cast<Index>(i)) = data[i].x;
    return make_baseline_z(BaselineZ::pca, &X, r, m, nullptr);
  }
  Rng rng(cfg.train.seed ^ 0x5a5a5a5aull);
  return make_baseline_z(BaselineZ::random_gaussian, nullptr, r, m, &rng);
}

// Trains one (D, W[, Z]) triple: unsupervised initialization, convex warm
// start of W, then the stochastic joint pass (with the continuation schedule
// when one is configured).
TrainedModel train_single(const RunConfig& cfg, const std::vector<Sample>& labeled,
                          const std::vector<Sample>& unlabeled,
                          const std::vector<Sample>& init_pool,
                          const std::optional<Matrix>& z0, std::uint64_t seed,
                          TrainReport::Block* telemetry_sink) {
  const TaskLoss loss = cfg.task.loss();
  const ElasticNetParams coding = cfg.train.coding_params();

  // Unsupervised initialization codes the encoder inputs.
  const std::vector<Sample> init_signals = strip_to_signals(init_pool, z0);
  SampleStream init_stream = stream(init_signals, seed ^ 0x11u);
  UnsupervisedInitOptions init_opts;
  init_opts.rho = cfg.init_rho;
  init_opts.threads = cfg.train.threads;
  init_opts.batch = std::min<int>(256, static_cast<int>(init_signals.size()));
  Dictionary D0 = init_unsupervised(init_stream, cfg.task.p, coding, cfg.init_passes, init_opts);

  TrainedModel model;
  model.dict = std::move(D0);
  model.z = z0;
  model.w = warm_start_w(model.dict, labeled, loss, cfg.train.nu_w, coding, z0,
                         cfg.train.threads);
  model.loss = loss;

  TrainConfig tc = cfg.train;
  tc.seed = seed;
  SampleStream labeled_stream = stream(labeled, seed ^ 0x22u);
  std::unique_ptr<SampleStream> unlabeled_stream;
  const bool semi = !cfg.mu_schedule.empty() || tc.mu > 0.0;
  if (semi) {
    const auto& pool = unlabeled.empty() ? labeled : unlabeled;
    unlabeled_stream =
        std::make_unique<SampleStream>(stream(strip_to_signals(pool, std::nullopt),
                                              seed ^ 0x33u));
  }

  if (!cfg.mu_schedule.empty()) {
    auto stages = continuation_schedule(loss, labeled_stream, unlabeled_stream.get(), tc,
                                        cfg.mu_schedule, std::move(model));
    if (telemetry_sink) {
      for (std::size_t i = 0; i < stages.size(); ++i) {
        for (const auto& pt : stages[i].telemetry) telemetry_sink->points.push_back(pt);
      }
    }
    model = std::move(stages.back());
  } else {
    model = train(loss, labeled_stream, unlabeled_stream.get(), tc, std::move(model));
    if (telemetry_sink) telemetry_sink->points = model.telemetry;
  }
  return model;
}

TrainReport train_from_config(RunConfig& cfg) {
  DatasetBundle bundle = load_datasets(cfg);
  // The validation split is reserved for scoring (search); training proper
  // uses the remainder.
  std::vector<Sample> validation =
      split_validation(bundle.train, cfg.data.val_fraction, cfg.train.seed);
  (void)validation;
  cfg.task.validate();

  TrainReport report;
  report.model.spec = cfg.task;

  std::optional<Matrix> z0;
  std::string z_init = "random";
  if (cfg.task.has_transform()) z0 = initial_transform(cfg, bundle.train, z_init);

  if (cfg.task.kind == TaskKind::multiclass_ova) {
    for (int k = 1; k <= cfg.task.q; ++k) {
      const std::vector<Sample> relabeled = relabel_one_vs_all(bundle.train, k);
      // Per-class dictionaries are seeded from that class's own signals when
      // it has enough of them.
      std::vector<Sample> class_pool;
      for (const auto& s : bundle.train) {
        if (s.label == k) class_pool.push_back(s);
      }
      const std::vector<Sample>& init_pool =
          static_cast<Index>(class_pool.size()) >= cfg.task.p ? class_pool : bundle.train;
      TrainReport::Block block;
      block.name = "class_" + std::to_string(k);
      report.model.models.push_back(train_single(cfg, relabeled, bundle.unlabeled, init_pool,
                                                 z0, cfg.train.seed + 7919ull * k, &block));
      report.telemetry.push_back(std::move(block));
    }
  } else {
    TrainReport::Block block;
    block.name = "model";
    report.model.models.push_back(train_single(cfg, bundle.train, bundle.unlabeled,
                                               bundle.train, z0, cfg.train.seed, &block));
    report.telemetry.push_back(std::move(block));
  }
  return report;
}

void write_telemetry(const TrainReport& report, const std::string& path) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write telemetry file: " + path);
  out << "# iteration objective learning_rate\n";
  for (const auto& block : report.telemetry) {
    out << "# " << block.name << "\n";
    const std::size_t n = block.points.size();
    const std::size_t stride = std::max<std::size_t>(1, n / 1000);
    for (std::size_t i = 0; i < n; ++i) {
      if (i % stride != 0 && i + 1 != n) continue;
      const auto& pt = block.points[i];
      char line[96];
      std::snprintf(line, sizeof(line), "%ld %.12g %.12g\n", pt.iteration, pt.objective,
                    pt.rate);
      out << line;
    }
  }
}

const TrainedModel& single_model(const TaskModel& model, const char* verb) {
  if (model.models.size() != 1) {
    throw DataError(std::string(verb) + ": one-vs-all models hold one dictionary per class; "
                                        "this command needs a single-dictionary model");
  }
  return model.models.front();
}

int cmd_train(const std::string& config_path, long seed_override, int threads_override,
              const std::string& out_override) {
  RunConfig cfg = RunConfig::parse_file(config_path);
  if (seed_override >= 0) cfg.train.seed = static_cast<std::uint64_t>(seed_override);
  if (threads_override > 0) cfg.train.threads = threads_override;
  if (!out_override.empty()) cfg.output.model = out_override;
  if (cfg.output.model.empty()) throw ConfigError(config_path + ": missing [output] model");

  TrainReport report = train_from_config(cfg);
  save_model(report.model, cfg.output.model);
  write_telemetry(report, cfg.output.telemetry);
  std::cout << "model written to " << cfg.output.model << "\n";
  return kExitOk;
}

int cmd_encode(const std::string& model_path, const std::string& signals_path,
               const std::string& out_path, int threads) {
  const TaskModel model = load_model(model_path);
  const TrainedModel& tm = single_model(model, "encode");
  const Matrix X = load_signals(signals_path, model.spec.m);
  const ElasticNetParams coding = tm.config.coding_params();

  Matrix X_enc = tm.z ? Matrix(*tm.z * X) : X;
  const auto codes = batch_solve(X_enc, tm.dict, coding, std::max(1, threads));

  std::ostringstream out;
  out << "# model_hash=" << file_hash(model_path) << "\n";
  out << "# columns: idx:value pairs, then the max KKT violation\n";
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const auto report =
        check_kkt(X_enc.col(static_cast<Index>(i)), tm.dict, codes[i].alpha, coding);
    for (const int j : codes[i].active) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "%d:%.17g ", j, codes[i].alpha(j));
      out << buf;
    }
    char kkt[32];
    std::snprintf(kkt, sizeof(kkt), "%.3e\n", report.max_violation());
    out << kkt;
  }
  if (out_path.empty()) {
    std::cout << out.str();
  } else {
    std::ofstream f(out_path);
    if (!f) throw DataError("cannot write codes file: " + out_path);
    f << out.str();
  }
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& signals_path,
                const std::string& out_path) {
  const TaskModel model = load_model(model_path);
  const Matrix X = load_signals(signals_path, model.spec.m);

  std::ostringstream out;
  out << "# model_hash=" << file_hash(model_path) << "\n";
  out << "# task=" << task_kind_name(model.spec.kind) << "\n";
  for (Index i = 0; i < X.cols(); ++i) {
    const Vector x = X.col(i);
    char buf[48];
    switch (model.spec.kind) {
      case TaskKind::regression: {
        const Vector y = predict_regression(single_model(model, "predict"), x);
        for (Index j = 0; j < y.size(); ++j) {
          std::snprintf(buf, sizeof(buf), j + 1 == y.size() ? "%.17g" : "%.17g ", y(j));
          out << buf;
        }
        out << "\n";
        break;
      }
      case TaskKind::compressed_sensing: {
        const Vector y = cs_reconstruct(single_model(model, "predict"), x);
        for (Index j = 0; j < y.size(); ++j) {
          std::snprintf(buf, sizeof(buf), j + 1 == y.size() ? "%.17g" : "%.17g ", y(j));
          out << buf;
        }
        out << "\n";
        break;
      }
      case TaskKind::binary_linear: {
        double score = 0.0;
        const int label = classify_binary(single_model(model, "predict"), x, &score);
        out << label << " " << score << "\n";
        break;
      }
      case TaskKind::binary_bilinear: {
        double score = 0.0;
        const int label = classify_bilinear(single_model(model, "predict"), x, &score);
        out << label << " " << score << "\n";
        break;
      }
      default: {  // multiclass heads
        Vector scores;
        const int label = classify_multiclass(model, x, &scores);
        out << label << " " << scores(label - 1) << "\n";
        break;
      }
    }
  }
  if (out_path.empty()) {
    std::cout << out.str();
  } else {
    std::ofstream f(out_path);
    if (!f) throw DataError("cannot write predictions file: " + out_path);
    f << out.str();
  }
  return kExitOk;
}

// Task-appropriate metrics; classification reports the error rate, the
// regression heads report MSE (raw and x100) and PSNR on the 8-bit scale.
std::string evaluate_model(const TaskModel& model, const std::vector<Sample>& data) {
  if (data.empty()) throw DataError("evaluate: empty evaluation set");
  std::ostringstream out;
  const TaskKind kind = model.spec.kind;
  if (kind == TaskKind::binary_linear || kind == TaskKind::binary_bilinear ||
      kind == TaskKind::multiclass_ova || kind == TaskKind::multiclass_softmax ||
      kind == TaskKind::multiclass_regression) {
    long wrong = 0;
    for (const auto& s : data) {
      int predicted = 0;
      if (kind == TaskKind::binary_linear) {
        predicted = classify_binary(single_model(model, "evaluate"), s.x);
      } else if (kind == TaskKind::binary_bilinear) {
        predicted = classify_bilinear(single_model(model, "evaluate"), s.x);
      } else {
        predicted = classify_multiclass(model, s.x);
      }
      if (predicted != s.label) ++wrong;
    }
    const double rate = static_cast<double>(wrong) / static_cast<double>(data.size());
    out << "samples = " << data.size() << "\n";
    out << "error_rate = " << rate << "\n";
    out << "error_percent = " << 100.0 * rate << "\n";
  } else {
    double total_sq = 0.0;
    long coords = 0;
    for (const auto& s : data) {
      const TrainedModel& tm = single_model(model, "evaluate");
      const Vector y = kind == TaskKind::compressed_sensing ? cs_reconstruct(tm, s.x)
                                                            : predict_regression(tm, s.x);
      if (y.size() != s.target.size()) throw DataError("evaluate: target length mismatch");
      total_sq += (y - s.target).squaredNorm();
      coords += y.size();
    }
    const double mse = total_sq / static_cast<double>(coords);
    const double psnr = psnr_from_mse(mse_to_255_scale(mse));
    out << "samples = " << data.size() << "\n";
    out << "mse = " << mse << "\n";
    out << "mse_x100 = " << 100.0 * mse << "\n";
    if (std::isinf(psnr)) {
      out << "psnr_db = inf\n";
    } else {
      out << "psnr_db = " << psnr << "\n";
    }
  }
  return out.str();
}

int cmd_evaluate(const std::string& model_path, const std::string& data_path,
                 const std::string& out_path) {
  const TaskModel model = load_model(model_path);
  const auto data = load_labeled_vectors(data_path, model.spec);
  const std::string report = evaluate_model(model, data);
  std::cout << report;
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) throw DataError("cannot write report file: " + out_path);
    f << report;
  }
  return kExitOk;
}

double score_model(const TaskModel& model, const std::vector<Sample>& data) {
  const std::string report = evaluate_model(model, data);
  // First metric line after the sample count carries the score.
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("error_rate = ", 0) == 0) return std::stod(line.substr(13));
    if (line.rfind("mse = ", 0) == 0) return std::stod(line.substr(6));
  }
  throw std::logic_error("score_model: no metric line");
}

int cmd_search(const std::string& config_path, long seed_override, int threads_override,
               const std::string& out_override) {
  RunConfig base = RunConfig::parse_file(config_path);
  if (seed_override >= 0) base.train.seed = static_cast<std::uint64_t>(seed_override);
  if (threads_override > 0) base.train.threads = threads_override;
  if (base.search.lambda1_grid.empty() && base.search.rho_grid.empty()) {
    throw ConfigError(config_path + ": [search] needs lambda1_grid and/or rho_grid");
  }
  if (base.search.lambda1_grid.empty()) base.search.lambda1_grid = {base.train.lambda1};
  if (base.search.rho_grid.empty()) base.search.rho_grid = {base.train.rho};
  if (base.data.val_fraction <= 0.0) {
    throw ConfigError(config_path + ": search needs val_fraction > 0");
  }

  struct Row {
    double lambda1, rho, score;
  };
  std::vector<Row> rows;
  std::uint64_t point = 0;
  for (const double lambda1 : base.search.lambda1_grid) {
    for (const double rho : base.search.rho_grid) {
      RunConfig cfg = base;
      cfg.train.lambda1 = lambda1;
      cfg.train.rho = rho;
      cfg.train.iterations = base.search.iterations;
      cfg.train.seed = base.train.seed + 1000003ull * point;
      ++point;

      DatasetBundle bundle = load_datasets(cfg);
      std::vector<Sample> validation =
          split_validation(bundle.train, cfg.data.val_fraction, base.train.seed);
      cfg.task.validate();

      RunConfig point_cfg = cfg;
      point_cfg.data.val_fraction = 0.0;
      TaskModel model;
      model.spec = cfg.task;
      std::optional<Matrix> z0;
      if (cfg.task.has_transform()) z0 = initial_transform(cfg, bundle.train, "random");
      if (cfg.task.kind == TaskKind::multiclass_ova) {
        for (int k = 1; k <= cfg.task.q; ++k) {
          model.models.push_back(train_single(point_cfg, relabel_one_vs_all(bundle.train, k),
                                              bundle.unlabeled, bundle.train, z0,
                                              cfg.train.seed + 7919ull * k, nullptr));
        }
      } else {
        model.models.push_back(train_single(point_cfg, bundle.train, bundle.unlabeled,
                                            bundle.train, z0, cfg.train.seed, nullptr));
      }
      rows.push_back({lambda1, rho, score_model(model, validation)});
    }
  }

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.lambda1 != b.lambda1) return a.lambda1 < b.lambda1;
    return a.rho < b.rho;
  });

  std::ostringstream out;
  out << "# rank lambda1 rho score\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << (i + 1) << " " << rows[i].lambda1 << " " << rows[i].rho << " " << rows[i].score
        << "\n";
  }
  std::cout << out.str();
  if (!out_override.empty()) {
    std::ofstream f(out_override);
    if (!f) throw DataError("cannot write search report: " + out_override);
    f << out.str();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"task-driven dictionary learning: sparse coding, joint training, prediction"};
  app.require_subcommand(1);

  std::string config_path, model_path, signals_path, data_path, out_path;
  long seed = -1;
  int threads = 0;

  auto* train_cmd = app.add_subcommand("train", "train a model from a config file");
  train_cmd->add_option("--config", config_path, "run configuration file")->required();
  train_cmd->add_option("--seed", seed, "override the config seed");
  train_cmd->add_option("--threads", threads, "worker threads");
  train_cmd->add_option("--out", out_path, "override the model output path");

  auto* encode_cmd = app.add_subcommand("encode", "sparse-code signals against a model");
  encode_cmd->add_option("--model", model_path, "model file")->required();
  encode_cmd->add_option("--signals", signals_path, "signals file (one per line)")->required();
  encode_cmd->add_option("--threads", threads, "worker threads");
  encode_cmd->add_option("--out", out_path, "codes output path (default stdout)");

  auto* predict_cmd = app.add_subcommand("predict", "run the task head on signals");
  predict_cmd->add_option("--model", model_path, "model file")->required();
  predict_cmd->add_option("--signals", signals_path, "signals file (one per line)")->required();
  predict_cmd->add_option("--out", out_path, "predictions output path (default stdout)");

  auto* eval_cmd = app.add_subcommand("evaluate", "score a model on labeled data");
  eval_cmd->add_option("--model", model_path, "model file")->required();
  eval_cmd->add_option("--data", data_path, "labeled vectors file")->required();
  eval_cmd->add_option("--out", out_path, "report output path");

  auto* search_cmd = app.add_subcommand("search", "grid-search hyperparameters");
  search_cmd->add_option("--config", config_path, "run configuration file")->required();
  search_cmd->add_option("--seed", seed, "override the config seed");
  search_cmd->add_option("--threads", threads, "worker threads");
  search_cmd->add_option("--out", out_path, "report output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(config_path, seed, threads, out_path);
    if (encode_cmd->parsed()) return cmd_encode(model_path, signals_path, out_path, threads);
    if (predict_cmd->parsed()) return cmd_predict(model_path, signals_path, out_path);
    if (eval_cmd->parsed()) return cmd_evaluate(model_path, data_path, out_path);
    if (search_cmd->parsed()) return cmd_search(config_path, seed, threads, out_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
