#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mssr/catalog.hpp"
#include "mssr/io.hpp"
#include "mssr/loss.hpp"
#include "mssr/mss_model.hpp"
#include "mssr/network.hpp"
#include "mssr/optim.hpp"
#include "mssr/oracle.hpp"

namespace mssr {

enum class TaskGranularity { two_groups, per_state };

std::string to_string(TaskGranularity g);
TaskGranularity granularity_from_string(const std::string& s);

// Everything that defines a training computation. Output placement (the run
// directory) deliberately stays outside so the config digest identifies the
// computation alone.
struct TrainingConfig {
  std::string model_id = "example1";
  GridSpec collocation;
  long iterations = 0;
  LearningRateSchedule schedule = LearningRateSchedule::constant(1e-3);
  bool pcgrad = true;
  TaskGranularity granularity = TaskGranularity::two_groups;
  double weight = 1.0;  // W on the residual group, used when pcgrad=false
  std::uint64_t seed = 42;
  long checkpoint_interval = 10000;
  long log_interval = 100;
  int threads = 1;
  std::vector<int> hidden = {50, 50};
  double clip_max_norm = 0.0;  // 0 disables clipping

  void validate() const;
  bool operator==(const TrainingConfig&) const = default;
};

TrainingConfig config_from_preset(const ExperimentPreset& preset);

// CI-scale shrink: iterations x0.1, collocation points x0.2.
void apply_smoke_scaling(TrainingConfig& config);

std::string training_config_to_json(const TrainingConfig& config);
TrainingConfig training_config_from_json_text(const std::string& text);
TrainingConfig training_config_from_json_file(const std::string& path);
std::string config_digest(const TrainingConfig& config);

// Homogeneous custom model declared in JSON: num_states, rate_matrix,
// initial_distribution, optional performance_rates / time_unit / id.
MssModel model_from_json_file(const std::string& path);

struct RunManifest {
  TrainingConfig config;
  std::string code_version;
  double duration_sec = 0.0;
  LossBreakdown final_losses;
  std::vector<std::string> checkpoints;
  std::string training_log;
  std::string digest;
};

void write_run_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_run_manifest(const std::string& path);

struct TrainResult {
  RunManifest manifest;
  NetworkParameters params;
  double time_scale = 0.0;

  explicit TrainResult(NetworkParameters p) : params(std::move(p)) {}
};

// Runs the full training loop: per iteration both task gradients, PCGrad
// surgery (or the W-weighted sum), one Adam step at the scheduled rate.
// Writes training_log.csv, periodic checkpoints, checkpoint_final.bin and
// manifest.json into out_dir. Deterministic for a fixed (config, thread
// count).
TrainResult train(const TrainingConfig& config, const MssModel& model,
                  const std::string& out_dir);

// Network state probabilities over a time grid (raw model time; inputs are
// normalized by time_scale internally). Rows are softmax outputs, so they
// are normalized by construction.
TrajectoryTable evaluate_network(const NetworkParameters& params,
                                 double time_scale, const MssModel& model,
                                 const Eigen::VectorXd& times,
                                 const std::string& checkpoint_path = "");

TrajectoryTable evaluate_checkpoint(const std::string& checkpoint_path,
                                    const MssModel& model,
                                    const Eigen::VectorXd& times);

enum class ChannelMode { states, performance };

struct SubRange {
  std::string name;
  double lo = 0.0;  // half-open (lo, hi]
  double hi = 0.0;
};

struct CompareOptions {
  ChannelMode mode = ChannelMode::states;
  std::vector<SubRange> splits;
};

struct MetricReport {
  double rmse_overall = 0.0;           // pooled over all rows and channels
  double rmse_mean_per_channel = 0.0;  // alternative: mean of channel RMSEs
  Eigen::VectorXd per_channel_mae;
  std::vector<std::string> channels;
  std::map<std::string, double> sub_range_rmse;
};

// Collapses a state-probability table onto the model's distinct performance
// rates (descending), channel names G_<rate>.
TrajectoryTable aggregate_performance_channels(const TrajectoryTable& table,
                                               const MssModel& model);

MetricReport compare(const TrajectoryTable& pinn,
                     const TrajectoryTable& oracle, const MssModel& model,
                     const CompareOptions& options = {});

std::string metric_report_to_json(const MetricReport& report,
                                  const std::string& digest);

struct ReproductionOptions {
  std::string out_dir = "runs";
  bool smoke = false;
  bool plots = false;
  int threads = 1;
  std::optional<std::uint64_t> seed;  // overrides the preset seed
};

struct ArmOutcome {
  RunManifest manifest;
  MetricReport metrics;
  std::string trajectory_csv;
};

struct ReproductionSummary {
  std::string model_id;
  ArmOutcome with_pcgrad;
  ArmOutcome without_pcgrad;
  double rmse_ratio = 0.0;  // without / with
  std::string oracle_csv;
  std::string summary_path;
};

// Trains both arms of one benchmark (PCGrad on and off), evaluates each
// against the RK4 oracle on the preset evaluation grid, and writes CSVs,
// manifests, metric JSONs and summary.json under out_dir. Accepts "1"/"2"/"3"
// as shorthand for the catalog names.
ReproductionSummary run_reproduction(const std::string& example,
                                     const ReproductionOptions& options);

// One SVG per channel overlaying the given tables; returns the file paths.
std::vector<std::string> emit_plots(const std::vector<TrajectoryTable>& tables,
                                    const std::string& out_dir);

}  // namespace mssr
