#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mssr/network.hpp"
#include "mssr/oracle.hpp"

namespace mssr {

// ---- trajectory tables -----------------------------------------------------

// CSV with header `t,<channel names...>`, 17 significant digits (doubles
// round-trip exactly). A sidecar `<path>.json` carries provenance, model id,
// and solver metadata.
void write_trajectory_csv(const std::string& path, const TrajectoryTable& table);

TrajectoryTable read_trajectory_csv(const std::string& path);

// ---- training log ----------------------------------------------------------

struct TrainingLogRow {
  long iteration = 0;
  double loss_u = 0.0;
  double loss_f = 0.0;
  double total = 0.0;
  double learning_rate = 0.0;
  double cos_uf = 0.0;   // cosine between the two task gradients (0 if degenerate)
  int projections = 0;   // PCGrad projections applied this iteration
};

class TrainingLogWriter {
 public:
  explicit TrainingLogWriter(const std::string& path);
  ~TrainingLogWriter();
  void append(const TrainingLogRow& row);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  void* out_;  // FILE*, kept out of the header
};

std::vector<TrainingLogRow> read_training_log(const std::string& path);

// ---- checkpoints -----------------------------------------------------------

// Binary layout: magic "MSSRNET1", u32 little-endian header length, JSON
// header (format version, architecture, seed, iteration, time_scale,
// parameter count), then the flat parameters as little-endian doubles.
struct Checkpoint {
  NetworkParameters params;
  std::uint64_t seed = 0;
  long iteration = 0;
  double time_scale = 1.0;
};

void save_checkpoint(const std::string& path, const NetworkParameters& params,
                     std::uint64_t seed, long iteration, double time_scale);

Checkpoint load_checkpoint(const std::string& path);

// ---- plots -----------------------------------------------------------------

struct PlotSeries {
  std::string label;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

// Self-contained SVG line chart; output depends only on the inputs.
void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::vector<PlotSeries>& series);

// ---- small utilities -------------------------------------------------------

std::string format_double(double value);  // %.17g

std::uint64_t fnv1a64(const std::string& data);
std::string hex64(std::uint64_t value);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace mssr
