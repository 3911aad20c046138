#include "mssr/mss_model.hpp"

#include <cmath>
#include <sstream>

namespace mssr {

namespace {

constexpr double kRowSumTol = 1e-10;
constexpr double kInitialSumTol = 1e-12;

void check_dimensions(const MssModel& model, const Eigen::VectorXd& p) {
  if (p.size() != model.num_states) {
    std::ostringstream os;
    os << "probability vector has " << p.size() << " entries, model has "
       << model.num_states << " states";
    throw ContractViolationError(os.str());
  }
}

}  // namespace

Eigen::VectorXd kolmogorov_rhs(const MssModel& model, double t,
                               const Eigen::VectorXd& p) {
  check_dimensions(model, p);
  if (!std::isfinite(t) || t < 0.0) {
    throw ContractViolationError("kolmogorov_rhs: time must be finite and >= 0");
  }
  const RateMatrix q = model.rate_matrix_fn(t);
  if (q.rows() != model.num_states || q.cols() != model.num_states) {
    throw ContractViolationError("rate_matrix_fn returned a wrong-sized matrix");
  }
  // p' = p Q as row vectors; with column storage that is Q^T p.
  return q.transpose() * p;
}

ValidationReport validate_model(const MssModel& model,
                                const std::vector<double>& sample_times) {
  ValidationReport report;
  auto add = [&report](double t, int row, double magnitude,
                       const std::string& message) {
    report.issues.push_back({t, row, magnitude, message});
  };

  const auto& s0 = model.initial_distribution;
  if (s0.size() != model.num_states) {
    add(0.0, -1, 0.0, "initial distribution length does not match num_states");
  } else {
    for (int i = 0; i < s0.size(); ++i) {
      if (s0[i] < 0.0) {
        add(0.0, i, -s0[i], "initial distribution entry is negative");
      }
    }
    const double defect = std::abs(s0.sum() - 1.0);
    if (defect > kInitialSumTol) {
      add(0.0, -1, defect, "initial distribution does not sum to 1");
    }
  }
  if (model.performance_rates &&
      model.performance_rates->size() != model.num_states) {
    add(0.0, -1, 0.0, "performance_rates length does not match num_states");
  }

  for (double t : sample_times) {
    const RateMatrix q = model.rate_matrix_fn(t);
    if (q.rows() != model.num_states || q.cols() != model.num_states) {
      add(t, -1, 0.0, "rate matrix has wrong dimensions");
      continue;
    }
    for (int i = 0; i < q.rows(); ++i) {
      const double row_sum = q.row(i).sum();
      if (std::abs(row_sum) > kRowSumTol) {
        std::ostringstream os;
        os << "row " << i << " sums to " << row_sum << " at t=" << t;
        add(t, i, std::abs(row_sum), os.str());
      }
      if (q(i, i) > 0.0) {
        add(t, i, q(i, i), "diagonal entry is positive");
      }
      for (int j = 0; j < q.cols(); ++j) {
        if (i != j && q(i, j) < 0.0) {
          add(t, i, -q(i, j), "off-diagonal entry is negative");
        }
      }
    }
  }
  return report;
}

double aggregate_reliability(const Eigen::VectorXd& p,
                             const ReliabilityQuery& query,
                             const MssModel* model) {
  Eigen::VectorXd delta;
  if (query.delta) {
    delta = *query.delta;
    for (int i = 0; i < delta.size(); ++i) {
      if (delta[i] != 0.0 && delta[i] != 1.0) {
        throw ContractViolationError(
            "reliability indicator entries must be 0 or 1");
      }
    }
  } else if (query.threshold) {
    if (model == nullptr || !model->performance_rates) {
      throw ConfigError(
          "threshold reliability query needs a model with performance rates");
    }
    delta = (model->performance_rates->array() >= *query.threshold)
                .cast<double>()
                .matrix();
  } else {
    throw ConfigError("reliability query specifies neither delta nor threshold");
  }
  if (delta.size() != p.size()) {
    throw ContractViolationError(
        "reliability indicator length does not match probability vector");
  }
  return delta.dot(p);
}

PerformanceDistribution aggregate_performance_distribution(
    const Eigen::VectorXd& p, const MssModel& model) {
  if (!model.performance_rates) {
    throw ConfigError("model has no performance rates to aggregate over");
  }
  check_dimensions(model, p);
  PerformanceDistribution dist;
  const auto& g = *model.performance_rates;
  for (int i = 0; i < p.size(); ++i) {
    dist[g[i]] += p[i];
  }
  return dist;
}

std::vector<std::pair<double, std::vector<int>>> performance_groups(
    const MssModel& model) {
  if (!model.performance_rates) {
    throw ConfigError("model has no performance rates");
  }
  std::map<double, std::vector<int>, std::greater<double>> groups;
  const auto& g = *model.performance_rates;
  for (int i = 0; i < g.size(); ++i) {
    groups[g[i]].push_back(i);
  }
  return {groups.begin(), groups.end()};
}

}  // namespace mssr
