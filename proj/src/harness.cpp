#include "mssr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <utility>

#include <json.hpp>

#include "mssr/errors.hpp"
#include "mssr/pcgrad.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mssr {

namespace {

constexpr const char* kCodeVersion = "0.1.0";

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void make_directories(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create directory '" + dir + "': " + ec.message());
  }
}

json schedule_to_json(const LearningRateSchedule& s) {
  json j;
  j["initial_rate"] = s.initial_rate;
  if (s.kind == LearningRateSchedule::Kind::constant) {
    j["kind"] = "constant";
  } else {
    j["kind"] = "polynomial_decay";
    j["final_rate"] = s.final_rate;
    j["total_steps"] = s.total_steps;
    j["power"] = s.power;
  }
  return j;
}

LearningRateSchedule schedule_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    return LearningRateSchedule::constant(j.at("initial_rate").get<double>());
  }
  if (kind == "polynomial_decay") {
    return LearningRateSchedule::polynomial(
        j.at("initial_rate").get<double>(), j.at("final_rate").get<double>(),
        j.at("total_steps").get<long>(), j.value("power", 1.0));
  }
  throw ConfigError("unknown schedule kind '" + kind +
                    "' (expected constant or polynomial_decay)");
}

json grid_to_json(const GridSpec& g) {
  json j;
  j["t_start"] = g.t_start;
  j["t_end"] = g.t_end;
  j["num_points"] = g.num_points;
  return j;
}

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.t_start = j.at("t_start").get<double>();
  g.t_end = j.at("t_end").get<double>();
  g.num_points = j.at("num_points").get<int>();
  return g;
}

json config_to_json_obj(const TrainingConfig& c) {
  json j;
  j["model"] = c.model_id;
  j["collocation"] = grid_to_json(c.collocation);
  j["iterations"] = c.iterations;
  j["schedule"] = schedule_to_json(c.schedule);
  j["pcgrad"] = c.pcgrad;
  j["granularity"] = to_string(c.granularity);
  j["weight"] = c.weight;
  j["seed"] = c.seed;
  j["checkpoint_interval"] = c.checkpoint_interval;
  j["log_interval"] = c.log_interval;
  j["threads"] = c.threads;
  j["hidden"] = c.hidden;
  j["clip_max_norm"] = c.clip_max_norm;
  return j;
}

TrainingConfig config_from_json_obj(const json& j) {
  static const std::vector<std::string> known = {
      "model",       "collocation", "iterations",          "schedule",
      "pcgrad",      "granularity", "weight",              "seed",
      "checkpoint_interval", "log_interval", "threads",    "hidden",
      "clip_max_norm"};
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw ConfigError("unknown training config key '" + item.key() + "'");
    }
  }
  TrainingConfig c;
  c.model_id = j.at("model").get<std::string>();
  c.collocation = grid_from_json(j.at("collocation"));
  c.iterations = j.at("iterations").get<long>();
  c.schedule = schedule_from_json(j.at("schedule"));
  c.pcgrad = j.value("pcgrad", true);
  if (j.contains("granularity")) {
    c.granularity = granularity_from_string(j.at("granularity").get<std::string>());
  }
  c.weight = j.value("weight", 1.0);
  c.seed = j.value("seed", std::uint64_t{42});
  c.checkpoint_interval = j.value("checkpoint_interval", 10000L);
  c.log_interval = j.value("log_interval", 100L);
  c.threads = j.value("threads", 1);
  c.hidden = j.value("hidden", std::vector<int>{50, 50});
  c.clip_max_norm = j.value("clip_max_norm", 0.0);
  c.validate();
  return c;
}

json losses_to_json(const LossBreakdown& b) {
  json j;
  j["loss_u"] = b.loss_u;
  j["loss_f"] = b.loss_f;
  j["weight"] = b.weight;
  j["total"] = b.total();
  j["per_state"] = std::vector<double>(b.per_state.begin(), b.per_state.end());
  return j;
}

LossBreakdown losses_from_json(const json& j) {
  LossBreakdown b;
  b.loss_u = j.at("loss_u").get<double>();
  b.loss_f = j.at("loss_f").get<double>();
  b.weight = j.at("weight").get<double>();
  const auto per_state = j.value("per_state", std::vector<double>{});
  b.per_state = Eigen::Map<const Eigen::VectorXd>(
      per_state.data(), static_cast<Eigen::Index>(per_state.size()));
  return b;
}

std::string compact_rate_label(double rate) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", rate);
  std::string out = buf;
  // Keep integer-valued rates visibly real: G_2.0 rather than G_2.
  if (out.find('.') == std::string::npos &&
      out.find('e') == std::string::npos &&
      out.find("inf") == std::string::npos &&
      out.find("nan") == std::string::npos) {
    out += ".0";
  }
  return out;
}

std::string sanitize_filename(const std::string& name) {
  std::string out = name;
  for (char& ch : out) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '_' || ch == '-';
    if (!ok) ch = '_';
  }
  return out;
}

}  // namespace

std::string to_string(TaskGranularity g) {
  return g == TaskGranularity::two_groups ? "two_groups" : "per_state";
}

TaskGranularity granularity_from_string(const std::string& s) {
  if (s == "two_groups") return TaskGranularity::two_groups;
  if (s == "per_state") return TaskGranularity::per_state;
  throw ConfigError("unknown task granularity '" + s +
                    "' (expected two_groups or per_state)");
}

void TrainingConfig::validate() const {
  if (model_id.empty()) throw ConfigError("training config has no model id");
  if (iterations < 1) {
    throw ConfigError("iterations must be at least 1, got " +
                      std::to_string(iterations));
  }
  if (collocation.num_points < 2) {
    throw ConfigError("collocation grid needs at least 2 points, got " +
                      std::to_string(collocation.num_points));
  }
  if (!(collocation.t_start >= 0.0) ||
      !(collocation.t_end > collocation.t_start)) {
    throw ConfigError("collocation range must satisfy 0 <= t_start < t_end");
  }
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw ConfigError("residual weight must be positive and finite");
  }
  if (checkpoint_interval < 0) {
    throw ConfigError("checkpoint_interval must be non-negative");
  }
  if (log_interval < 1) throw ConfigError("log_interval must be positive");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (hidden.empty()) throw ConfigError("network needs at least one hidden layer");
  for (int width : hidden) {
    if (width < 1) throw ConfigError("hidden layer widths must be positive");
  }
  if (clip_max_norm < 0.0 || !std::isfinite(clip_max_norm)) {
    throw ConfigError("clip_max_norm must be finite and non-negative");
  }
}

TrainingConfig config_from_preset(const ExperimentPreset& preset) {
  TrainingConfig c;
  c.model_id = preset.model_id;
  c.collocation = preset.collocation;
  c.iterations = preset.iterations;
  c.schedule = preset.schedule;
  c.pcgrad = preset.pcgrad;
  c.seed = preset.seed;
  return c;
}

void apply_smoke_scaling(TrainingConfig& config) {
  config.iterations = std::max<long>(1, config.iterations / 10);
  config.collocation.num_points = std::max(2, config.collocation.num_points / 5);
}

std::string training_config_to_json(const TrainingConfig& config) {
  return config_to_json_obj(config).dump(2) + "\n";
}

TrainingConfig training_config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid training config JSON: ") + e.what());
  }
  try {
    return config_from_json_obj(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("incomplete training config: ") + e.what());
  }
}

TrainingConfig training_config_from_json_file(const std::string& path) {
  return training_config_from_json_text(read_text_file(path));
}

std::string config_digest(const TrainingConfig& config) {
  // threads are excluded: results are bit-identical for any worker count, so
  // the digest identifies the computation, not the execution.
  json j = config_to_json_obj(config);
  j.erase("threads");
  return hex64(fnv1a64(j.dump()));
}

MssModel model_from_json_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid model JSON: ") + e.what());
  }
  MssModel model;
  try {
    const int n = j.at("num_states").get<int>();
    if (n < 2) throw ConfigError("custom model needs at least 2 states");
    const auto rows = j.at("rate_matrix").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(rows.size()) != n) {
      throw ConfigError("rate_matrix must have num_states rows");
    }
    Eigen::MatrixXd q(n, n);
    for (int r = 0; r < n; ++r) {
      if (static_cast<int>(rows[r].size()) != n) {
        throw ConfigError("rate_matrix row " + std::to_string(r) +
                          " must have num_states entries");
      }
      for (int c = 0; c < n; ++c) q(r, c) = rows[r][c];
    }
    const auto s0 = j.at("initial_distribution").get<std::vector<double>>();
    if (static_cast<int>(s0.size()) != n) {
      throw ConfigError("initial_distribution must have num_states entries");
    }
    model.num_states = n;
    model.rate_matrix_fn = [q](double) { return q; };
    model.initial_distribution =
        Eigen::Map<const Eigen::VectorXd>(s0.data(), n);
    if (j.contains("performance_rates")) {
      const auto g = j.at("performance_rates").get<std::vector<double>>();
      if (static_cast<int>(g.size()) != n) {
        throw ConfigError("performance_rates must have num_states entries");
      }
      model.performance_rates = Eigen::Map<const Eigen::VectorXd>(g.data(), n);
    }
    model.time_unit = j.value("time_unit", std::string("t"));
    model.id = j.value("id", std::string("custom"));
    model.time_homogeneous = true;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("incomplete model JSON: ") + e.what());
  }
  const ValidationReport report = validate_model(model, {0.0});
  if (!report.issues.empty()) {
    throw ConfigError("custom model fails validation: " +
                      report.issues.front().message);
  }
  return model;
}

void write_run_manifest(const std::string& path, const RunManifest& manifest) {
  json j;
  j["config"] = config_to_json_obj(manifest.config);
  j["code_version"] = manifest.code_version;
  j["duration_sec"] = manifest.duration_sec;
  j["final_losses"] = losses_to_json(manifest.final_losses);
  j["checkpoints"] = manifest.checkpoints;
  j["training_log"] = manifest.training_log;
  j["digest"] = manifest.digest;
  write_text_file(path, j.dump(2) + "\n");
}

RunManifest read_run_manifest(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw IoError("invalid run manifest '" + path + "': " + e.what());
  }
  RunManifest m;
  try {
    m.config = config_from_json_obj(j.at("config"));
    m.code_version = j.value("code_version", std::string());
    m.duration_sec = j.value("duration_sec", 0.0);
    m.final_losses = losses_from_json(j.at("final_losses"));
    m.checkpoints = j.value("checkpoints", std::vector<std::string>{});
    m.training_log = j.value("training_log", std::string());
    m.digest = j.value("digest", std::string());
  } catch (const json::exception& e) {
    throw IoError("incomplete run manifest '" + path + "': " + e.what());
  }
  return m;
}

TrainResult train(const TrainingConfig& config, const MssModel& model,
                  const std::string& out_dir) {
  config.validate();
  make_directories(out_dir);
  const auto wall_start = std::chrono::steady_clock::now();

  const CollocationGrid grid =
      CollocationGrid::make(config.collocation.t_start, config.collocation.t_end,
                            config.collocation.num_points);
  LossEngine engine(model, grid, config.threads);

  NetworkArchitecture arch;
  arch.hidden = config.hidden;
  arch.output_dim = model.num_states;
  arch.validate();
  NetworkParameters params = initialize_parameters(arch, config.seed);
  AdamState adam(params.values().size());
  // Decorrelate the projection-order stream from the init stream without
  // giving up determinism.
  std::mt19937_64 order_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  TrainingLogWriter log(join_path(out_dir, "training_log.csv"));
  std::vector<std::string> checkpoints;
  std::string last_checkpoint = "(none)";
  const double w_used = config.pcgrad ? 1.0 : config.weight;

  const auto save = [&](long iteration, const std::string& name) {
    const std::string path = join_path(out_dir, name);
    save_checkpoint(path, params, config.seed, iteration, grid.t_scale);
    checkpoints.push_back(path);
    last_checkpoint = path;
  };

  for (long k = 0; k < config.iterations; ++k) {
    const double rate = schedule_rate(config.schedule, k);
    TaskGradientResult tg = engine.gradients(params);
    tg.breakdown.weight = w_used;
    if (!std::isfinite(tg.breakdown.total())) {
      throw DivergenceError("training loss became non-finite at iteration " +
                                std::to_string(k) +
                                "; last saved checkpoint: " + last_checkpoint,
                            k);
    }

    double cos_uf = 0.0;
    const double norm_u = tg.grad_u.norm();
    const double norm_f = tg.grad_f.norm();
    if (norm_u > 0.0 && norm_f > 0.0) {
      cos_uf = cosine_similarity(tg.grad_u, tg.grad_f);
    }

    Eigen::VectorXd update;
    int projections = 0;
    if (config.pcgrad) {
      TaskGradients tasks;
      if (config.granularity == TaskGranularity::two_groups) {
        tasks.grads = {tg.grad_u, tg.grad_f};
        tasks.labels = {"initial_condition", "residual"};
      } else {
        tasks.grads.push_back(tg.grad_u);
        tasks.labels.push_back("initial_condition");
        std::vector<Eigen::VectorXd> per_state =
            engine.per_state_residual_gradients(params);
        for (std::size_t i = 0; i < per_state.size(); ++i) {
          tasks.grads.push_back(std::move(per_state[i]));
          tasks.labels.push_back("residual_state_" + std::to_string(i));
        }
      }
      ProjectionResult pr = project_conflicting_detailed(tasks, order_rng());
      update = std::move(pr.update);
      projections = pr.projection_count;
    } else {
      update = tg.grad_u + w_used * tg.grad_f;
    }
    if (config.clip_max_norm > 0.0) {
      clip_gradient_max_norm(update, config.clip_max_norm);
    }

    if (k % config.log_interval == 0) {
      log.append({k, tg.breakdown.loss_u, tg.breakdown.loss_f,
                  tg.breakdown.total(), rate, cos_uf, projections});
    }

    try {
      adam_step(adam, params.values(), update, rate);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " at iteration " +
                                std::to_string(k) +
                                "; last saved checkpoint: " + last_checkpoint,
                            k);
    }

    const long completed = k + 1;
    if (config.checkpoint_interval > 0 &&
        completed % config.checkpoint_interval == 0 &&
        completed < config.iterations) {
      save(completed, "checkpoint_" + std::to_string(completed) + ".bin");
    }
  }

  const LossBreakdown final_losses = engine.evaluate(params, w_used);
  if (!std::isfinite(final_losses.total())) {
    throw DivergenceError("final loss is non-finite; last saved checkpoint: " +
                              last_checkpoint,
                          config.iterations);
  }
  log.append({config.iterations, final_losses.loss_u, final_losses.loss_f,
              final_losses.total(),
              schedule_rate(config.schedule, config.iterations), 0.0, 0});
  save(config.iterations, "checkpoint_final.bin");

  TrainResult result(std::move(params));
  result.time_scale = grid.t_scale;
  result.manifest.config = config;
  result.manifest.code_version = kCodeVersion;
  result.manifest.duration_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    wall_start)
          .count();
  result.manifest.final_losses = final_losses;
  result.manifest.checkpoints = std::move(checkpoints);
  result.manifest.training_log = log.path();
  result.manifest.digest = config_digest(config);
  write_run_manifest(join_path(out_dir, "manifest.json"), result.manifest);
  return result;
}

TrajectoryTable evaluate_network(const NetworkParameters& params,
                                 double time_scale, const MssModel& model,
                                 const Eigen::VectorXd& times,
                                 const std::string& checkpoint_path) {
  if (params.architecture().output_dim != model.num_states) {
    throw ContractViolationError(
        "network has " + std::to_string(params.architecture().output_dim) +
        " outputs but model '" + model.id + "' has " +
        std::to_string(model.num_states) + " states");
  }
  if (!(time_scale > 0.0) || !std::isfinite(time_scale)) {
    throw ContractViolationError("time scale must be positive and finite");
  }
  if (times.size() == 0) {
    throw ContractViolationError("evaluation grid is empty");
  }
  const Eigen::RowVectorXd inputs = times.transpose() / time_scale;
  const BatchRecord record =
      forward_batch(params, inputs, /*with_tangent=*/false);

  TrajectoryTable table;
  table.times = times;
  table.rows = record.u.transpose();
  table.channel_names = state_channel_names(model.num_states);
  table.provenance = Provenance::pinn;
  table.model_id = model.id;
  table.metadata.checkpoint = checkpoint_path;
  return table;
}

TrajectoryTable evaluate_checkpoint(const std::string& checkpoint_path,
                                    const MssModel& model,
                                    const Eigen::VectorXd& times) {
  const Checkpoint cp = load_checkpoint(checkpoint_path);
  return evaluate_network(cp.params, cp.time_scale, model, times,
                          checkpoint_path);
}

TrajectoryTable aggregate_performance_channels(const TrajectoryTable& table,
                                               const MssModel& model) {
  if (!model.performance_rates) {
    throw ConfigError("model '" + model.id +
                      "' has no performance rates to aggregate over");
  }
  if (table.num_channels() != model.num_states) {
    throw ContractViolationError(
        "table has " + std::to_string(table.num_channels()) +
        " channels but model '" + model.id + "' has " +
        std::to_string(model.num_states) + " states");
  }
  const auto groups = performance_groups(model);
  TrajectoryTable out;
  out.times = table.times;
  out.rows.setZero(table.rows.rows(), static_cast<Eigen::Index>(groups.size()));
  out.channel_names.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (int state : groups[g].second) {
      out.rows.col(static_cast<Eigen::Index>(g)) += table.rows.col(state);
    }
    out.channel_names.push_back("G_" + compact_rate_label(groups[g].first));
  }
  out.provenance = table.provenance;
  out.model_id = table.model_id;
  out.metadata = table.metadata;
  return out;
}

MetricReport compare(const TrajectoryTable& pinn, const TrajectoryTable& oracle,
                     const MssModel& model, const CompareOptions& options) {
  TrajectoryTable aggregated_pinn;
  TrajectoryTable aggregated_oracle;
  const TrajectoryTable* a = &pinn;
  const TrajectoryTable* b = &oracle;
  if (options.mode == ChannelMode::performance) {
    aggregated_pinn = aggregate_performance_channels(pinn, model);
    aggregated_oracle = aggregate_performance_channels(oracle, model);
    a = &aggregated_pinn;
    b = &aggregated_oracle;
  }

  if (a->times.size() != b->times.size()) {
    throw ContractViolationError(
        "cannot compare tables with different grid sizes (" +
        std::to_string(a->times.size()) + " vs " +
        std::to_string(b->times.size()) + " points)");
  }
  const double grid_tol =
      1e-9 * std::max(1.0, b->times.cwiseAbs().maxCoeff());
  if ((a->times - b->times).cwiseAbs().maxCoeff() > grid_tol) {
    throw ContractViolationError("tables are sampled on different time grids");
  }
  if (a->channel_names != b->channel_names) {
    throw ContractViolationError("tables disagree on channel names");
  }

  const Eigen::MatrixXd diff = a->rows - b->rows;
  const Eigen::Index n = diff.rows();
  const Eigen::Index c = diff.cols();

  MetricReport report;
  report.channels = a->channel_names;
  report.rmse_overall =
      std::sqrt(diff.squaredNorm() / static_cast<double>(n * c));
  double rmse_sum = 0.0;
  for (Eigen::Index j = 0; j < c; ++j) {
    rmse_sum += std::sqrt(diff.col(j).squaredNorm() / static_cast<double>(n));
  }
  report.rmse_mean_per_channel = rmse_sum / static_cast<double>(c);
  report.per_channel_mae = diff.cwiseAbs().colwise().mean();

  for (const SubRange& split : options.splits) {
    double sq = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = b->times(i);
      if (t > split.lo && t <= split.hi) {
        sq += diff.row(i).squaredNorm();
        ++count;
      }
    }
    if (count > 0) {
      report.sub_range_rmse[split.name] =
          std::sqrt(sq / static_cast<double>(count * c));
    }
  }
  return report;
}

std::string metric_report_to_json(const MetricReport& report,
                                  const std::string& digest) {
  json j;
  j["rmse_overall"] = report.rmse_overall;
  j["rmse_mean_per_channel"] = report.rmse_mean_per_channel;
  json mae = json::array();
  for (std::size_t i = 0; i < report.channels.size(); ++i) {
    json entry;
    entry["channel"] = report.channels[i];
    entry["mae"] = report.per_channel_mae(static_cast<Eigen::Index>(i));
    mae.push_back(entry);
  }
  j["per_channel_mae"] = mae;
  j["sub_range_rmse"] = report.sub_range_rmse;
  if (!digest.empty()) j["config_digest"] = digest;
  return j.dump(2) + "\n";
}

ReproductionSummary run_reproduction(const std::string& example,
                                     const ReproductionOptions& options) {
  std::string name = example;
  if (name == "1" || name == "2" || name == "3") name = "example" + name;
  const ExperimentPreset pre = preset(name);
  TrainingConfig base = config_from_preset(pre);
  if (options.seed) base.seed = *options.seed;
  base.threads = options.threads;
  if (options.smoke) apply_smoke_scaling(base);
  const MssModel model = build_model(name);
  make_directories(options.out_dir);

  TrajectoryTable oracle = solve_rk4(model, pre.evaluation.t_end,
                                     pre.evaluation.num_points, pre.oracle_step);
  const std::string oracle_csv = join_path(options.out_dir, "oracle.csv");
  write_trajectory_csv(oracle_csv, oracle);

  CompareOptions copts;
  if (model.performance_rates &&
      performance_groups(model).size() <
          static_cast<std::size_t>(model.num_states)) {
    copts.mode = ChannelMode::performance;
  }
  if (pre.evaluation.t_end > base.collocation.t_end) {
    copts.splits = {
        {"interpolation", base.collocation.t_start, base.collocation.t_end},
        {"extrapolation", base.collocation.t_end, pre.evaluation.t_end}};
  }

  const auto run_arm = [&](bool pcgrad) {
    TrainingConfig cfg = base;
    cfg.pcgrad = pcgrad;
    const std::string arm_dir =
        join_path(options.out_dir, pcgrad ? "pcgrad" : "no_pcgrad");
    TrainResult tr = train(cfg, model, arm_dir);
    const TrajectoryTable table =
        evaluate_network(tr.params, tr.time_scale, model, oracle.times,
                         join_path(arm_dir, "checkpoint_final.bin"));
    ArmOutcome outcome;
    outcome.trajectory_csv = join_path(arm_dir, "pinn.csv");
    write_trajectory_csv(outcome.trajectory_csv, table);
    outcome.metrics = compare(table, oracle, model, copts);
    write_text_file(join_path(arm_dir, "metrics.json"),
                    metric_report_to_json(outcome.metrics, tr.manifest.digest));
    outcome.manifest = std::move(tr.manifest);
    return outcome;
  };

  ReproductionSummary summary;
  summary.model_id = name;
  summary.oracle_csv = oracle_csv;
  summary.with_pcgrad = run_arm(true);
  summary.without_pcgrad = run_arm(false);
  if (summary.with_pcgrad.metrics.rmse_overall > 0.0) {
    summary.rmse_ratio = summary.without_pcgrad.metrics.rmse_overall /
                         summary.with_pcgrad.metrics.rmse_overall;
  }

  json j;
  j["model"] = name;
  j["smoke"] = options.smoke;
  j["seed"] = base.seed;
  j["config_digest"] = config_digest(base);
  json rmse;
  rmse["pcgrad"] = summary.with_pcgrad.metrics.rmse_overall;
  rmse["no_pcgrad"] = summary.without_pcgrad.metrics.rmse_overall;
  rmse["ratio_no_over_with"] = summary.rmse_ratio;
  j["rmse"] = rmse;
  j["sub_range_rmse"]["pcgrad"] = summary.with_pcgrad.metrics.sub_range_rmse;
  j["sub_range_rmse"]["no_pcgrad"] =
      summary.without_pcgrad.metrics.sub_range_rmse;
  j["final_losses"]["pcgrad"] =
      losses_to_json(summary.with_pcgrad.manifest.final_losses);
  j["final_losses"]["no_pcgrad"] =
      losses_to_json(summary.without_pcgrad.manifest.final_losses);
  json paths;
  paths["oracle"] = oracle_csv;
  paths["pcgrad"] = summary.with_pcgrad.trajectory_csv;
  paths["no_pcgrad"] = summary.without_pcgrad.trajectory_csv;
  j["paths"] = paths;
  summary.summary_path = join_path(options.out_dir, "summary.json");
  write_text_file(summary.summary_path, j.dump(2) + "\n");

  if (options.plots) {
    std::vector<TrajectoryTable> tables;
    tables.push_back(std::move(oracle));
    tables.push_back(read_trajectory_csv(summary.with_pcgrad.trajectory_csv));
    tables.push_back(
        read_trajectory_csv(summary.without_pcgrad.trajectory_csv));
    if (copts.mode == ChannelMode::performance) {
      for (TrajectoryTable& t : tables) {
        t = aggregate_performance_channels(t, model);
      }
    }
    emit_plots(tables, join_path(options.out_dir, "plots"));
  }
  return summary;
}

std::vector<std::string> emit_plots(const std::vector<TrajectoryTable>& tables,
                                    const std::string& out_dir) {
  if (tables.empty()) {
    throw ContractViolationError("no trajectory tables to plot");
  }
  const TrajectoryTable& first = tables.front();
  for (const TrajectoryTable& t : tables) {
    if (t.model_id != first.model_id) {
      throw ContractViolationError("cannot overlay tables from models '" +
                                   first.model_id + "' and '" + t.model_id +
                                   "'");
    }
    if (t.channel_names != first.channel_names) {
      throw ContractViolationError(
          "cannot overlay tables with different channels");
    }
  }
  make_directories(out_dir);

  std::vector<std::string> labels;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    std::string label = to_string(tables[i].provenance);
    int repeat = 0;
    for (std::size_t k = 0; k < i; ++k) {
      if (to_string(tables[k].provenance) == label) ++repeat;
    }
    if (repeat > 0) label += " (" + std::to_string(repeat + 1) + ")";
    labels.push_back(std::move(label));
  }

  std::vector<std::string> paths;
  for (std::size_t c = 0; c < first.channel_names.size(); ++c) {
    std::vector<PlotSeries> series;
    for (std::size_t i = 0; i < tables.size(); ++i) {
      series.push_back({labels[i], tables[i].times,
                        tables[i].rows.col(static_cast<Eigen::Index>(c))});
    }
    const std::string path = join_path(
        out_dir, sanitize_filename(first.channel_names[c]) + ".svg");
    write_line_chart_svg(path, first.channel_names[c] + " - " + first.model_id,
                         series);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace mssr
