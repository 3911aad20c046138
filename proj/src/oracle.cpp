#include "mssr/oracle.hpp"

#include <cmath>
#include <sstream>

namespace mssr {

namespace {

constexpr double kStepDefectLimit = 1e-6;   // internal-step blowup guard
constexpr double kEmitDefectLimit = 1e-9;   // renormalization budget per row

[[noreturn]] void throw_instability(double t, double defect,
                                    const char* what) {
  std::ostringstream os;
  os << what << " at t=" << t << " (defect " << defect
     << "); reduce the internal step";
  throw InstabilityError(os.str(), t, defect);
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::oracle_rk4:
      return "oracle_rk4";
    case Provenance::closed_form:
      return "closed_form";
    case Provenance::pinn:
      return "pinn";
  }
  return "unknown";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "oracle_rk4") return Provenance::oracle_rk4;
  if (s == "closed_form") return Provenance::closed_form;
  if (s == "pinn") return Provenance::pinn;
  throw ContractViolationError("unknown provenance tag: " + s);
}

Eigen::VectorXd time_grid(double t_start, double t_end, int num_points) {
  if (num_points < 2 || !(t_end > t_start)) {
    throw ContractViolationError("time grid needs t_end > t_start and >= 2 points");
  }
  Eigen::VectorXd t(num_points);
  const double span = t_end - t_start;
  for (int i = 0; i < num_points; ++i) {
    t[i] = t_start + span * (static_cast<double>(i) / (num_points - 1));
  }
  t[0] = t_start;
  t[num_points - 1] = t_end;
  return t;
}

std::vector<std::string> state_channel_names(int num_states) {
  std::vector<std::string> names;
  names.reserve(num_states);
  for (int i = 0; i < num_states; ++i) {
    names.push_back("p_" + std::to_string(i));
  }
  return names;
}

TrajectoryTable solve_rk4(const MssModel& model, double t_end,
                          int num_output_points, double internal_step) {
  if (!(t_end > 0.0)) {
    throw ContractViolationError("solve_rk4: t_end must be positive");
  }
  if (num_output_points < 2) {
    throw ContractViolationError("solve_rk4: need at least 2 output points");
  }
  if (!(internal_step > 0.0)) {
    throw ContractViolationError("solve_rk4: internal_step must be positive");
  }
  if (model.initial_distribution.size() != model.num_states) {
    throw ContractViolationError("solve_rk4: model initial distribution invalid");
  }

  const double spacing = t_end / (num_output_points - 1);
  const double steps_real = spacing / internal_step;
  const long steps_per_interval = std::lround(steps_real);
  if (steps_per_interval < 1 ||
      std::abs(steps_real - static_cast<double>(steps_per_interval)) >
          1e-9 * steps_real) {
    throw ContractViolationError(
        "solve_rk4: internal_step must divide the output spacing");
  }
  const double h = spacing / static_cast<double>(steps_per_interval);

  // One code path for both rate families; the homogeneous case hoists the
  // transposed generator out of the stage evaluations.
  Eigen::MatrixXd qt_const;
  if (model.time_homogeneous) {
    qt_const = model.rate_matrix_fn(0.0).transpose();
  }
  auto rhs = [&](double t, const Eigen::VectorXd& y) -> Eigen::VectorXd {
    if (model.time_homogeneous) return qt_const * y;
    return model.rate_matrix_fn(t).transpose() * y;
  };

  TrajectoryTable table;
  table.times = time_grid(0.0, t_end, num_output_points);
  table.rows.resize(num_output_points, model.num_states);
  table.channel_names = state_channel_names(model.num_states);
  table.provenance = Provenance::oracle_rk4;
  table.model_id = model.id;
  table.metadata.internal_step = h;

  Eigen::VectorXd y = model.initial_distribution;
  table.rows.row(0) = y.transpose();
  double max_defect = 0.0;

  Eigen::VectorXd k1, k2, k3, k4;
  for (int out = 1; out < num_output_points; ++out) {
    const double t0 = table.times[out - 1];
    for (long s = 0; s < steps_per_interval; ++s) {
      const double t = t0 + h * static_cast<double>(s);
      k1 = rhs(t, y);
      k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1);
      k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2);
      k4 = rhs(t + h, y + h * k3);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const double defect = std::abs(y.sum() - 1.0);
      if (defect > kStepDefectLimit) {
        throw_instability(t + h, defect, "probability mass lost");
      }
    }

    const double defect = std::abs(y.sum() - 1.0);
    if (defect > kEmitDefectLimit) {
      throw_instability(table.times[out], defect,
                        "output row defect exceeds renormalization budget");
    }
    max_defect = std::max(max_defect, defect);

    Eigen::VectorXd row = y;
    for (int i = 0; i < row.size(); ++i) {
      if (row[i] < 0.0) {
        if (row[i] < -kEmitDefectLimit) {
          throw_instability(table.times[out], -row[i],
                            "negative probability beyond roundoff");
        }
        row[i] = 0.0;
      }
    }
    row /= row.sum();
    table.rows.row(out) = row.transpose();
  }

  table.metadata.max_defect = max_defect;
  return table;
}

Eigen::Vector3d solve_closed_form_example1(double t, double gamma,
                                           double lambda) {
  if (!(gamma > 0.0) || !(lambda > 0.0) || t < 0.0) {
    throw ContractViolationError(
        "closed form needs gamma, lambda > 0 and t >= 0");
  }
  const double p0 = std::exp(-(2.0 * gamma + lambda) * t);
  const double p1 =
      2.0 * (std::exp(-(gamma + lambda) * t) - std::exp(-(2.0 * gamma + lambda) * t));
  return {p0, p1, 1.0 - p0 - p1};
}

double richardson_check(const MssModel& model, double t_end,
                        int num_output_points, double internal_step) {
  const TrajectoryTable coarse =
      solve_rk4(model, t_end, num_output_points, internal_step);
  const TrajectoryTable fine =
      solve_rk4(model, t_end, num_output_points, internal_step / 2.0);
  return (coarse.rows - fine.rows).cwiseAbs().maxCoeff();
}

}  // namespace mssr
