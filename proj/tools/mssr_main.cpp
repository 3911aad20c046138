#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mssr/catalog.hpp"
#include "mssr/errors.hpp"
#include "mssr/harness.hpp"
#include "mssr/io.hpp"
#include "mssr/mss_model.hpp"
#include "mssr/oracle.hpp"

namespace {

struct GlobalArgs {
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  int threads = 1;
  std::string config_file;
};

mssr::MssModel resolve_model(const std::string& name,
                             const std::string& model_file) {
  if (!model_file.empty()) return mssr::model_from_json_file(model_file);
  return mssr::build_model(name);
}

bool is_catalog_model(const std::string& name) {
  const auto names = mssr::catalog_model_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

mssr::SubRange parse_split(const std::string& text) {
  const auto second = text.rfind(':');
  const auto first = second == std::string::npos
                         ? std::string::npos
                         : text.rfind(':', second - 1);
  if (first == std::string::npos || second == std::string::npos ||
      first == 0 || second == first + 1 || second + 1 == text.size()) {
    throw mssr::ConfigError("split '" + text + "' is not name:lo:hi");
  }
  mssr::SubRange split;
  split.name = text.substr(0, first);
  try {
    split.lo = std::stod(text.substr(first + 1, second - first - 1));
    split.hi = std::stod(text.substr(second + 1));
  } catch (const std::exception&) {
    throw mssr::ConfigError("split '" + text + "' has non-numeric bounds");
  }
  if (!(split.hi > split.lo)) {
    throw mssr::ConfigError("split '" + text + "' needs lo < hi");
  }
  return split;
}

std::string joined(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir + "/" + name;
}

void print_metrics(const mssr::MetricReport& report) {
  std::cout << "rmse_overall           " << mssr::format_double(report.rmse_overall)
            << "\n";
  std::cout << "rmse_mean_per_channel  "
            << mssr::format_double(report.rmse_mean_per_channel) << "\n";
  for (std::size_t i = 0; i < report.channels.size(); ++i) {
    std::cout << "mae[" << report.channels[i] << "]  "
              << mssr::format_double(
                     report.per_channel_mae(static_cast<Eigen::Index>(i)))
              << "\n";
  }
  for (const auto& [name, value] : report.sub_range_rmse) {
    std::cout << "rmse[" << name << "]  " << mssr::format_double(value) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-state system probabilities: RK4 oracle and "
               "physics-informed network training with gradient surgery"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs global;
  app.add_option("--seed", global.seed, "Override the random seed");
  app.add_option("--out", global.out, "Output directory (default: .)");
  app.add_option("--threads", global.threads,
                 "Worker threads for loss evaluation (results are identical "
                 "for any count)");
  app.add_option("--config", global.config_file,
                 "Training config JSON (train subcommand)");

  // ---- solve ---------------------------------------------------------------
  auto* solve = app.add_subcommand(
      "solve", "Integrate the forward equations with the RK4 oracle");
  std::string solve_model = "example1";
  std::string solve_model_file;
  double solve_t_end = 0.0;
  int solve_points = 0;
  double solve_step = 0.0;
  std::string solve_csv;
  solve->add_option("--model", solve_model, "Catalog model name");
  solve->add_option("--model-file", solve_model_file,
                    "Custom homogeneous model JSON");
  auto* opt_solve_t_end =
      solve->add_option("--t-end", solve_t_end, "End of the time grid");
  auto* opt_solve_points =
      solve->add_option("--points", solve_points, "Number of output points");
  auto* opt_solve_step =
      solve->add_option("--step", solve_step, "Internal integrator step");
  solve->add_option("--csv", solve_csv, "Output CSV path");

  // ---- train ---------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Train the network on one model");
  std::string train_preset;
  std::string train_model;
  std::string train_model_file;
  long train_iterations = 0;
  double train_colloc_start = 0.0;
  double train_colloc_end = 0.0;
  int train_colloc_points = 0;
  std::string train_schedule_kind;
  double train_rate = 0.0;
  double train_final_rate = 0.0;
  long train_decay_steps = 0;
  double train_power = 1.0;
  bool train_pcgrad = true;
  std::string train_granularity;
  double train_weight = 1.0;
  long train_checkpoint_interval = 0;
  long train_log_interval = 0;
  double train_clip = 0.0;
  bool train_smoke = false;
  train->add_option("--preset", train_preset,
                    "Start from a named experiment preset");
  train->add_option("--model", train_model, "Catalog model name");
  train->add_option("--model-file", train_model_file,
                    "Custom homogeneous model JSON");
  auto* opt_iterations =
      train->add_option("--iterations", train_iterations, "Adam steps");
  auto* opt_colloc_start = train->add_option("--colloc-start",
                                             train_colloc_start,
                                             "Collocation range start");
  auto* opt_colloc_end =
      train->add_option("--colloc-end", train_colloc_end,
                        "Collocation range end");
  auto* opt_colloc_points = train->add_option(
      "--colloc-points", train_colloc_points, "Collocation point count");
  auto* opt_schedule =
      train->add_option("--schedule", train_schedule_kind,
                        "Learning-rate schedule kind")
          ->check(CLI::IsMember({"constant", "polynomial_decay"}));
  auto* opt_rate =
      train->add_option("--rate", train_rate, "Initial learning rate");
  auto* opt_final_rate = train->add_option("--final-rate", train_final_rate,
                                           "Final rate (polynomial decay)");
  auto* opt_decay_steps = train->add_option(
      "--decay-steps", train_decay_steps, "Decay horizon (polynomial decay)");
  auto* opt_power =
      train->add_option("--power", train_power, "Decay power (default 1)");
  auto* opt_pcgrad = train->add_flag("--pcgrad,!--no-pcgrad", train_pcgrad,
                                     "Toggle gradient surgery (default on)");
  auto* opt_granularity =
      train->add_option("--granularity", train_granularity,
                        "Task granularity for the surgery")
          ->check(CLI::IsMember({"two_groups", "per_state"}));
  auto* opt_weight = train->add_option(
      "--weight", train_weight, "Residual weight W (no-surgery runs only)");
  auto* opt_checkpoint_interval =
      train->add_option("--checkpoint-interval", train_checkpoint_interval,
                        "Iterations between checkpoints (0 = final only)");
  auto* opt_log_interval = train->add_option(
      "--log-interval", train_log_interval, "Iterations between log rows");
  auto* opt_clip = train->add_option("--clip", train_clip,
                                     "Max update norm (0 = no clipping)");
  train->add_flag("--smoke", train_smoke,
                  "CI scale: iterations x0.1, collocation points x0.2");

  // ---- evaluate ------------------------------------------------------------
  auto* evaluate = app.add_subcommand(
      "evaluate", "Evaluate a checkpoint on a time grid");
  std::string eval_checkpoint;
  std::string eval_model = "example1";
  std::string eval_model_file;
  double eval_t_start = 0.0;
  double eval_t_end = 0.0;
  int eval_points = 0;
  std::string eval_csv;
  evaluate->add_option("--checkpoint", eval_checkpoint, "Checkpoint path")
      ->required();
  evaluate->add_option("--model", eval_model, "Catalog model name");
  evaluate->add_option("--model-file", eval_model_file,
                       "Custom homogeneous model JSON");
  evaluate->add_option("--t-start", eval_t_start, "Grid start (default 0)");
  evaluate->add_option("--t-end", eval_t_end, "Grid end")->required();
  evaluate->add_option("--points", eval_points, "Grid point count")
      ->required();
  evaluate->add_option("--csv", eval_csv, "Output CSV path");

  // ---- compare -------------------------------------------------------------
  auto* compare = app.add_subcommand(
      "compare", "Error metrics between a network table and an oracle table");
  std::string cmp_pinn;
  std::string cmp_oracle;
  std::string cmp_model = "example1";
  std::string cmp_model_file;
  bool cmp_performance = false;
  std::vector<std::string> cmp_splits;
  std::string cmp_json;
  compare->add_option("--pinn", cmp_pinn, "Network trajectory CSV")
      ->required();
  compare->add_option("--oracle", cmp_oracle, "Oracle trajectory CSV")
      ->required();
  compare->add_option("--model", cmp_model, "Catalog model name");
  compare->add_option("--model-file", cmp_model_file,
                      "Custom homogeneous model JSON");
  compare->add_flag("--performance", cmp_performance,
                    "Aggregate states onto performance-rate channels");
  compare->add_option("--split", cmp_splits,
                      "Sub-range RMSE as name:lo:hi, repeatable");
  compare->add_option("--json", cmp_json, "Metric JSON output path");

  // ---- reproduce -----------------------------------------------------------
  auto* reproduce = app.add_subcommand(
      "reproduce", "Train both arms of a benchmark and compare to the oracle");
  std::string repro_example;
  bool repro_smoke = false;
  bool repro_plots = false;
  reproduce->add_option("--example", repro_example, "1, 2, 3 or a model name")
      ->required();
  reproduce->add_flag("--smoke", repro_smoke,
                      "CI scale: iterations x0.1, collocation points x0.2");
  reproduce->add_flag("--plots", repro_plots, "Write per-channel SVG charts");

  // ---- list-models ---------------------------------------------------------
  auto* list_models =
      app.add_subcommand("list-models", "Enumerate the model catalog");

  // ---- plot ----------------------------------------------------------------
  auto* plot =
      app.add_subcommand("plot", "Per-channel SVG charts from trajectory CSVs");
  std::vector<std::string> plot_tables;
  plot->add_option("--table", plot_tables, "Trajectory CSV, repeatable")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!global.out.empty() && global.out != ".") {
      std::error_code ec;
      std::filesystem::create_directories(global.out, ec);
    }
    if (*solve) {
      const mssr::MssModel model = resolve_model(solve_model, solve_model_file);
      if (solve_model_file.empty() && is_catalog_model(solve_model)) {
        const mssr::ExperimentPreset pre = mssr::preset(solve_model);
        if (!*opt_solve_t_end) solve_t_end = pre.evaluation.t_end;
        if (!*opt_solve_points) solve_points = pre.evaluation.num_points;
        if (!*opt_solve_step) solve_step = pre.oracle_step;
      } else if (!*opt_solve_t_end || !*opt_solve_points || !*opt_solve_step) {
        throw mssr::ConfigError(
            "custom models need explicit --t-end, --points and --step");
      }
      const mssr::TrajectoryTable table =
          mssr::solve_rk4(model, solve_t_end, solve_points, solve_step);
      const std::string csv =
          solve_csv.empty() ? joined(global.out, model.id + "_oracle.csv")
                            : solve_csv;
      mssr::write_trajectory_csv(csv, table);
      std::cout << "wrote " << csv << " (" << table.times.size()
                << " points, max defect "
                << mssr::format_double(table.metadata.max_defect) << ")\n";
    } else if (*train) {
      mssr::TrainingConfig cfg;
      if (!global.config_file.empty()) {
        cfg = mssr::training_config_from_json_file(global.config_file);
      } else if (!train_preset.empty()) {
        cfg = mssr::config_from_preset(mssr::preset(train_preset));
      }
      if (!train_model.empty()) cfg.model_id = train_model;
      if (!train_model_file.empty()) cfg.model_id = "custom";
      if (*opt_iterations) cfg.iterations = train_iterations;
      if (*opt_colloc_start) cfg.collocation.t_start = train_colloc_start;
      if (*opt_colloc_end) cfg.collocation.t_end = train_colloc_end;
      if (*opt_colloc_points) cfg.collocation.num_points = train_colloc_points;
      if (*opt_schedule || *opt_rate || *opt_final_rate || *opt_decay_steps ||
          *opt_power) {
        const bool polynomial =
            *opt_schedule
                ? train_schedule_kind == "polynomial_decay"
                : cfg.schedule.kind ==
                      mssr::LearningRateSchedule::Kind::polynomial_decay;
        const double initial =
            *opt_rate ? train_rate : cfg.schedule.initial_rate;
        if (polynomial) {
          cfg.schedule = mssr::LearningRateSchedule::polynomial(
              initial,
              *opt_final_rate ? train_final_rate : cfg.schedule.final_rate,
              *opt_decay_steps ? train_decay_steps : cfg.schedule.total_steps,
              *opt_power ? train_power : cfg.schedule.power);
        } else {
          cfg.schedule = mssr::LearningRateSchedule::constant(initial);
        }
      }
      if (*opt_pcgrad) cfg.pcgrad = train_pcgrad;
      if (*opt_granularity) {
        cfg.granularity = mssr::granularity_from_string(train_granularity);
      }
      if (*opt_weight) cfg.weight = train_weight;
      if (*opt_checkpoint_interval) {
        cfg.checkpoint_interval = train_checkpoint_interval;
      }
      if (*opt_log_interval) cfg.log_interval = train_log_interval;
      if (*opt_clip) cfg.clip_max_norm = train_clip;
      if (global.seed) cfg.seed = *global.seed;
      cfg.threads = global.threads;
      if (train_smoke) mssr::apply_smoke_scaling(cfg);
      const mssr::MssModel model =
          !train_model_file.empty()
              ? mssr::model_from_json_file(train_model_file)
              : mssr::build_model(cfg.model_id);
      const mssr::TrainResult result = mssr::train(cfg, model, global.out);
      std::cout << "trained " << cfg.model_id << " for " << cfg.iterations
                << " iterations in "
                << mssr::format_double(result.manifest.duration_sec)
                << " s\n";
      std::cout << "final loss_u "
                << mssr::format_double(result.manifest.final_losses.loss_u)
                << ", loss_f "
                << mssr::format_double(result.manifest.final_losses.loss_f)
                << "\n";
      std::cout << "artifacts in " << global.out << "\n";
    } else if (*evaluate) {
      const mssr::MssModel model = resolve_model(eval_model, eval_model_file);
      const Eigen::VectorXd times =
          mssr::time_grid(eval_t_start, eval_t_end, eval_points);
      const mssr::TrajectoryTable table =
          mssr::evaluate_checkpoint(eval_checkpoint, model, times);
      const std::string csv =
          eval_csv.empty() ? joined(global.out, "pinn.csv") : eval_csv;
      mssr::write_trajectory_csv(csv, table);
      std::cout << "wrote " << csv << " (" << table.times.size()
                << " points)\n";
    } else if (*compare) {
      const mssr::MssModel model = resolve_model(cmp_model, cmp_model_file);
      const mssr::TrajectoryTable pinn = mssr::read_trajectory_csv(cmp_pinn);
      const mssr::TrajectoryTable oracle =
          mssr::read_trajectory_csv(cmp_oracle);
      mssr::CompareOptions options;
      if (cmp_performance) options.mode = mssr::ChannelMode::performance;
      for (const std::string& text : cmp_splits) {
        options.splits.push_back(parse_split(text));
      }
      const mssr::MetricReport report =
          mssr::compare(pinn, oracle, model, options);
      const std::string json_path =
          cmp_json.empty() ? joined(global.out, "metrics.json") : cmp_json;
      mssr::write_text_file(json_path,
                            mssr::metric_report_to_json(report, ""));
      print_metrics(report);
      std::cout << "wrote " << json_path << "\n";
    } else if (*reproduce) {
      mssr::ReproductionOptions options;
      options.out_dir = global.out;
      options.smoke = repro_smoke;
      options.plots = repro_plots;
      options.threads = global.threads;
      options.seed = global.seed;
      const mssr::ReproductionSummary summary =
          mssr::run_reproduction(repro_example, options);
      std::cout << "model " << summary.model_id << "\n";
      std::cout << "rmse with surgery     "
                << mssr::format_double(summary.with_pcgrad.metrics.rmse_overall)
                << "\n";
      std::cout << "rmse without surgery  "
                << mssr::format_double(
                       summary.without_pcgrad.metrics.rmse_overall)
                << "\n";
      std::cout << "ratio (without/with)  "
                << mssr::format_double(summary.rmse_ratio) << "\n";
      std::cout << "summary " << summary.summary_path << "\n";
    } else if (*list_models) {
      for (const std::string& name : mssr::catalog_model_names()) {
        const mssr::MssModel model = mssr::build_model(name);
        std::cout << name << "  (" << model.num_states << " states, time in "
                  << model.time_unit << ")\n";
        std::cout << "    " << mssr::model_description(name) << "\n";
      }
    } else if (*plot) {
      std::vector<mssr::TrajectoryTable> tables;
      tables.reserve(plot_tables.size());
      for (const std::string& path : plot_tables) {
        tables.push_back(mssr::read_trajectory_csv(path));
      }
      const std::vector<std::string> files =
          mssr::emit_plots(tables, global.out);
      std::cout << "wrote " << files.size() << " chart(s) to " << global.out
                << "\n";
    }
  } catch (const mssr::ContractViolationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mssr::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mssr::CapabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mssr::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const mssr::InstabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const mssr::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
