// Acceptance gate. Each numbered criterion prints exactly one [PASS]/[FAIL]
// line; groups let CI shard the slow training reproductions:
//
//   acceptance diff|pcgrad|oracle|models|smoke|example1|example2|example3|all
//
// Exit code 0 when every criterion in the requested group passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mssr/catalog.hpp"
#include "mssr/errors.hpp"
#include "mssr/harness.hpp"
#include "mssr/io.hpp"
#include "mssr/loss.hpp"
#include "mssr/mss_model.hpp"
#include "mssr/network.hpp"
#include "mssr/oracle.hpp"
#include "mssr/pcgrad.hpp"
#include "mssr/tape.hpp"

using namespace mssr;

namespace {

struct Report {
  bool pass = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      lines.push_back("FAILED: " + what);
    }
  }
  void note(const std::string& what) { lines.push_back(what); }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

double rand_uniform(std::mt19937_64& rng, double lo, double hi) {
  const double x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * x;
}

Eigen::VectorXd random_unit(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rand_uniform(rng, -1.0, 1.0);
  return v / v.norm();
}

// ---- criterion 1: derivatives vs central finite differences ----------------

void criterion_diff(Report& r) {
  const MssModel model = build_model("example1");
  const CollocationGrid grid = CollocationGrid::make(0.0, 60000.0, 30);
  const LossEngine engine(model, grid, 1);
  NetworkArchitecture arch;
  arch.hidden = {50, 50};
  arch.output_dim = model.num_states;

  std::mt19937_64 rng(20240817);
  double worst_dudt = 0.0;
  double worst_grad_u = 0.0;
  double worst_grad_f = 0.0;

  for (int sample = 0; sample < 100; ++sample) {
    const NetworkParameters params =
        initialize_parameters(arch, 1000 + static_cast<std::uint64_t>(sample));

    // Time derivative of every output channel at a random normalized input.
    const double tau = rand_uniform(rng, 0.0, 1.2);
    const double h_t = 1e-5;
    const ForwardResult mid = forward(params, tau);
    const ForwardResult lo = forward(params, tau - h_t);
    const ForwardResult hi = forward(params, tau + h_t);
    for (int c = 0; c < model.num_states; ++c) {
      const double fd = (hi.u(c) - lo.u(c)) / (2.0 * h_t);
      const double rel =
          std::abs(mid.du_dt(c) - fd) / std::max(std::abs(fd), 1e-4);
      worst_dudt = std::max(worst_dudt, rel);
    }

    // Parameter gradients of both loss groups along a random direction.
    const TaskGradientResult tg = engine.gradients(params);
    const Eigen::VectorXd dir = random_unit(rng, params.values().size());
    const double h_p = 1e-6;
    NetworkParameters plus = params;
    NetworkParameters minus = params;
    plus.values() += h_p * dir;
    minus.values() -= h_p * dir;
    const LossBreakdown lp = engine.evaluate(plus);
    const LossBreakdown lm = engine.evaluate(minus);

    const double fd_u = (lp.loss_u - lm.loss_u) / (2.0 * h_p);
    const double rel_u =
        std::abs(tg.grad_u.dot(dir) - fd_u) / std::max(std::abs(fd_u), 1e-8);
    worst_grad_u = std::max(worst_grad_u, rel_u);

    const double fd_f = (lp.loss_f - lm.loss_f) / (2.0 * h_p);
    const double rel_f =
        std::abs(tg.grad_f.dot(dir) - fd_f) / std::max(std::abs(fd_f), 1e-10);
    worst_grad_f = std::max(worst_grad_f, rel_f);
  }

  // The generic tape engine, exercised coordinate by coordinate on a small
  // network with a residual-style loss that consumes du/dt.
  NetworkArchitecture small;
  small.hidden = {8};
  small.output_dim = 3;
  Eigen::Matrix3d a;
  a << -0.4, 0.3, 0.1, 0.2, -0.5, 0.3, 0.1, 0.2, -0.3;
  const std::vector<double> taus = {0.1, 0.45, 0.9};
  auto plain_loss = [&](const NetworkParameters& p) {
    double acc = 0.0;
    for (double tau : taus) {
      const ForwardResult f = forward(p, tau);
      const Eigen::Vector3d res = f.du_dt - a.transpose() * f.u;
      acc += res.squaredNorm();
    }
    return acc / static_cast<double>(taus.size());
  };
  const ad::LossEvaluator tape_loss = [&](ad::Tape&, ad::TapeNetwork& net) {
    std::vector<ad::Var> terms;
    for (double tau : taus) {
      const ad::TapeNetwork::Eval eval = net.evaluate(tau);
      for (int i = 0; i < 3; ++i) {
        ad::Var res = eval.du_dt[i];
        for (int j = 0; j < 3; ++j) res = res - a(j, i) * eval.u[j];
        terms.push_back(ad::square(res));
      }
    }
    ad::Var total = ad::sum(terms);
    return total / static_cast<double>(taus.size());
  };
  double worst_tape = 0.0;
  for (int sample = 0; sample < 10; ++sample) {
    NetworkParameters params =
        initialize_parameters(small, 7000 + static_cast<std::uint64_t>(sample));
    const Eigen::VectorXd grad = loss_gradient(params, tape_loss);
    const double h_p = 1e-6;
    for (Eigen::Index i = 0; i < params.values().size(); ++i) {
      const double saved = params.values()(i);
      params.values()(i) = saved + h_p;
      const double up = plain_loss(params);
      params.values()(i) = saved - h_p;
      const double dn = plain_loss(params);
      params.values()(i) = saved;
      const double fd = (up - dn) / (2.0 * h_p);
      const double rel =
          std::abs(grad(i) - fd) / std::max(std::abs(fd), 1e-8);
      worst_tape = std::max(worst_tape, rel);
    }
  }

  r.check(worst_dudt <= 1e-5,
          "du/dt relative error " + fmt(worst_dudt) + " > 1e-5");
  r.check(worst_grad_u <= 1e-4,
          "initial-condition gradient relative error " + fmt(worst_grad_u) +
              " > 1e-4");
  r.check(worst_grad_f <= 1e-4,
          "residual gradient relative error " + fmt(worst_grad_f) + " > 1e-4");
  r.check(worst_tape <= 1e-4,
          "tape gradient relative error " + fmt(worst_tape) + " > 1e-4");
  r.note("worst relative errors: du/dt " + fmt(worst_dudt) + ", grad_u " +
         fmt(worst_grad_u) + ", grad_f " + fmt(worst_grad_f) + ", tape " +
         fmt(worst_tape));
}

// ---- criterion 2: projection surgery invariants ----------------------------

void criterion_pcgrad(Report& r) {
  auto vec2 = [](double x, double y) {
    return (Eigen::VectorXd(2) << x, y).finished();
  };
  auto tasks = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    TaskGradients t;
    t.grads = {a, b};
    return t;
  };

  // Worked example.
  const ProjectionResult worked =
      project_conflicting_detailed(tasks(vec2(1, 0), vec2(-1, 1)), 0);
  const double worked_err =
      (worked.update - vec2(0.5, 1.5)).cwiseAbs().maxCoeff();
  r.check(worked_err <= 1e-15,
          "worked example update off by " + fmt(worked_err));

  // No conflict: bit-exact pass-through.
  const Eigen::VectorXd a = vec2(1.0, 0.25);
  const Eigen::VectorXd b = vec2(0.5, 2.0);
  const ProjectionResult clean = project_conflicting_detailed(tasks(a, b), 1);
  r.check(clean.projection_count == 0 &&
              (clean.update - (a + b)).cwiseAbs().maxCoeff() == 0.0,
          "non-conflicting update is not the bit-exact gradient sum");

  // Orthogonality after surgery, random conflicting pairs.
  std::mt19937_64 rng(5);
  double worst_ortho = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd g1 = random_unit(rng, 30) * rand_uniform(rng, 0.1, 3.0);
    Eigen::VectorXd g2 = random_unit(rng, 30) * rand_uniform(rng, 0.1, 3.0);
    if (g1.dot(g2) >= 0.0) g2 -= 2.0 * (g1.dot(g2) / g1.squaredNorm()) * g1;
    const ProjectionResult res = project_conflicting_detailed(tasks(g1, g2), 2);
    worst_ortho = std::max(
        worst_ortho, std::abs(res.projected[0].dot(g2)) /
                         (res.projected[0].norm() * g2.norm() + 1e-300));
    worst_ortho = std::max(
        worst_ortho, std::abs(res.projected[1].dot(g1)) /
                         (res.projected[1].norm() * g1.norm() + 1e-300));
  }
  r.check(worst_ortho <= 1e-10,
          "post-projection cosine " + fmt(worst_ortho) + " > 1e-10");

  // Antiparallel gradients cancel exactly.
  const ProjectionResult anti =
      project_conflicting_detailed(tasks(vec2(3, -1.5), vec2(-3, 1.5)), 3);
  r.check(anti.update.cwiseAbs().maxCoeff() == 0.0,
          "antiparallel update is not exactly zero");

  // Determinism under a fixed seed, three tasks.
  TaskGradients three;
  three.grads = {(Eigen::VectorXd(4) << 1, 0, 0, 0.2).finished(),
                 (Eigen::VectorXd(4) << -0.8, 0.5, 0, 0).finished(),
                 (Eigen::VectorXd(4) << 0.1, -0.9, 0.4, -0.3).finished()};
  const ProjectionResult d1 = project_conflicting_detailed(three, 99);
  const ProjectionResult d2 = project_conflicting_detailed(three, 99);
  r.check((d1.update - d2.update).cwiseAbs().maxCoeff() == 0.0 &&
              d1.projection_count == d2.projection_count,
          "same seed produced different surgery outcomes");

  r.note("worked-example error " + fmt(worked_err) + ", worst cosine " +
         fmt(worst_ortho));
}

// ---- criterion 3: oracle certification -------------------------------------

void criterion_oracle(Report& r) {
  const MssModel ex1 = build_model("example1");

  // Closed-form comparison over [0, 80000].
  const TrajectoryTable table = solve_rk4(ex1, 80000.0, 101, 0.8);
  double worst_closed = 0.0;
  for (int i = 0; i < table.times.size(); ++i) {
    const Eigen::Vector3d exact =
        solve_closed_form_example1(table.times(i), 2.8e-5, 7.26e-5);
    worst_closed = std::max(
        worst_closed,
        (table.rows.row(i).transpose() - exact).cwiseAbs().maxCoeff());
  }
  r.check(worst_closed <= 1e-8,
          "closed-form error " + fmt(worst_closed) + " > 1e-8");

  // Step halving at each preset's default step, on its evaluation grid.
  double worst_richardson = 0.0;
  double worst_defect = 0.0;
  double worst_sum = 0.0;
  for (const char* name : {"example1", "example2", "example3"}) {
    const ExperimentPreset pre = preset(name);
    const MssModel model = build_model(name);
    worst_richardson = std::max(
        worst_richardson,
        richardson_check(model, pre.evaluation.t_end,
                         pre.evaluation.num_points, pre.oracle_step));
    const TrajectoryTable run =
        solve_rk4(model, pre.evaluation.t_end, pre.evaluation.num_points,
                  pre.oracle_step);
    worst_defect = std::max(worst_defect, run.metadata.max_defect);
    for (int i = 0; i < run.times.size(); ++i) {
      worst_sum =
          std::max(worst_sum, std::abs(run.rows.row(i).sum() - 1.0));
    }
  }
  r.check(worst_richardson <= 1e-9,
          "step-halving discrepancy " + fmt(worst_richardson) + " > 1e-9");
  r.check(worst_defect <= 1e-9,
          "probability defect " + fmt(worst_defect) + " > 1e-9");
  r.check(worst_sum <= 1e-9,
          "emitted row sum off by " + fmt(worst_sum) + " > 1e-9");

  r.note("closed-form " + fmt(worst_closed) + ", Richardson " +
         fmt(worst_richardson) + ", defect " + fmt(worst_defect));
}

// ---- criterion 4: model construction ---------------------------------------

void criterion_models(Report& r) {
  // Zero row sums for every catalog generator at representative times.
  struct Probe {
    const char* name;
    std::vector<double> times;
  };
  const std::vector<Probe> probes = {{"example1", {0.0, 30000.0, 80000.0}},
                                     {"example2", {0.0, 150.0, 300.0}},
                                     {"example3", {0.0, 0.1, 0.2}}};
  double worst_row_sum = 0.0;
  for (const Probe& probe : probes) {
    const MssModel model = build_model(probe.name);
    for (double t : probe.times) {
      const Eigen::MatrixXd q = model.rate_matrix_fn(t);
      worst_row_sum =
          std::max(worst_row_sum, q.rowwise().sum().cwiseAbs().maxCoeff());
    }
  }
  r.check(worst_row_sum <= 1e-10,
          "generator row sum " + fmt(worst_row_sum) + " > 1e-10");

  // Shape parameters (1, 1) collapse the hazard-shaped chain onto the
  // constant-rate one.
  const MssModel ex1 = build_model("example1");
  const MssModel flat = build_example2(1.0, 1.0);
  double worst_reduction = 0.0;
  for (double t : {0.0, 10.0, 5000.0, 80000.0}) {
    worst_reduction = std::max(
        worst_reduction,
        (flat.rate_matrix_fn(t) - ex1.rate_matrix_fn(t)).cwiseAbs().maxCoeff());
  }
  r.check(worst_reduction == 0.0, "shape parameters (1,1) do not reduce to "
                                  "the constant-rate generator exactly");

  // Joint-chain marginals match the independent per-element solves.
  const MssModel joint = build_model("example3");
  const double t_end = 0.05;
  const int points = 6;
  const double h = 1e-5;
  const TrajectoryTable joint_run = solve_rk4(joint, t_end, points, h);

  auto element = [](std::vector<std::vector<double>> rows,
                    int start) {
    const int n = static_cast<int>(rows.size());
    Eigen::MatrixXd q(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) q(i, j) = rows[i][j];
    MssModel m;
    m.num_states = n;
    m.rate_matrix_fn = [q](double) { return q; };
    m.initial_distribution = Eigen::VectorXd::Zero(n);
    m.initial_distribution(start) = 1.0;
    m.time_homogeneous = true;
    m.id = "element";
    return m;
  };
  const TrajectoryTable e1 =
      solve_rk4(element({{-7, 7}, {100, -100}}, 0), t_end, points, h);
  const TrajectoryTable e2 =
      solve_rk4(element({{-10, 10}, {80, -80}}, 0), t_end, points, h);
  const TrajectoryTable e3 = solve_rk4(
      element({{-10, 10, 0}, {110, -117, 7}, {0, 120, -120}}, 0), t_end,
      points, h);

  // Joint-state membership per element level, matching the catalog's state
  // order.
  const std::vector<std::vector<int>> e1_up = {{0, 2, 3, 6, 7, 10}};
  const std::vector<std::vector<int>> e2_up = {{0, 1, 3, 5, 7, 9}};
  const std::vector<std::vector<int>> e3_levels = {
      {0, 1, 2, 4}, {3, 5, 6, 8}, {7, 9, 10, 11}};
  auto marginal = [&](const std::vector<int>& states, int row) {
    double acc = 0.0;
    for (int s : states) acc += joint_run.rows(row, s);
    return acc;
  };
  double worst_marginal = 0.0;
  for (int i = 0; i < points; ++i) {
    worst_marginal = std::max(
        worst_marginal, std::abs(marginal(e1_up[0], i) - e1.rows(i, 0)));
    worst_marginal = std::max(
        worst_marginal, std::abs(marginal(e2_up[0], i) - e2.rows(i, 0)));
    for (int level = 0; level < 3; ++level) {
      worst_marginal =
          std::max(worst_marginal, std::abs(marginal(e3_levels[level], i) -
                                            e3.rows(i, level)));
    }
  }
  r.check(worst_marginal <= 1e-8,
          "joint-chain marginal error " + fmt(worst_marginal) + " > 1e-8");

  r.note("row sum " + fmt(worst_row_sum) + ", marginal error " +
         fmt(worst_marginal));
}

// ---- criteria 5-9: training reproductions ----------------------------------

ReproductionSummary reproduce(const std::string& example,
                              const std::string& out_dir, bool smoke) {
  ReproductionOptions options;
  options.out_dir = out_dir;
  options.smoke = smoke;
  options.threads = 1;
  std::printf("  training %s%s (both arms)...\n", example.c_str(),
              smoke ? " at smoke scale" : " at full scale");
  std::fflush(stdout);
  return run_reproduction(example, options);
}

void criteria_example1(Report& r5, Report& r6) {
  const ReproductionSummary s =
      reproduce("example1", "acceptance_runs/example1_full", false);
  const double with = s.with_pcgrad.metrics.rmse_overall;
  const double without = s.without_pcgrad.metrics.rmse_overall;

  r5.check(with <= 0.02,
           "full-range RMSE with surgery " + fmt(with) + " > 0.02");
  r5.check(without >= 2.0 * with, "baseline RMSE " + fmt(without) +
                                      " is not at least twice " + fmt(with));
  r5.note("rmse with " + fmt(with) + ", without " + fmt(without) +
          ", ratio " + fmt(s.rmse_ratio));

  const auto& splits = s.with_pcgrad.metrics.sub_range_rmse;
  const auto it = splits.find("extrapolation");
  r6.check(it != splits.end(), "no extrapolation sub-range was produced");
  if (it != splits.end()) {
    r6.check(it->second <= 0.01,
             "extrapolation RMSE " + fmt(it->second) + " > 0.01");
    r6.note("extrapolation rmse " + fmt(it->second));
  }
}

void criterion_example3(Report& r) {
  const ReproductionSummary s =
      reproduce("example3", "acceptance_runs/example3_full", false);
  const double with = s.with_pcgrad.metrics.rmse_overall;
  r.check(with <= 0.005,
          "performance-channel RMSE with surgery " + fmt(with) + " > 0.005");
  r.check(s.rmse_ratio >= 3.0,
          "RMSE ratio " + fmt(s.rmse_ratio) + " < 3");
  r.note("rmse with " + fmt(with) + ", ratio " + fmt(s.rmse_ratio));
}

void criterion_example2(Report& r) {
  const ReproductionSummary s =
      reproduce("example2", "acceptance_runs/example2_full", false);
  const double with = s.with_pcgrad.metrics.rmse_overall;
  r.check(with <= 0.005,
          "RMSE with surgery " + fmt(with) + " > 0.005");

  const LossBreakdown& lw = s.with_pcgrad.manifest.final_losses;
  const LossBreakdown& lo = s.without_pcgrad.manifest.final_losses;
  const bool finite = std::isfinite(lw.loss_u) && std::isfinite(lw.loss_f) &&
                      std::isfinite(lo.loss_u) && std::isfinite(lo.loss_f);
  r.check(finite, "a final loss is not finite");
  const double sum_with = lw.loss_u + lw.loss_f;
  const double sum_without = lo.loss_u + lo.loss_f;
  r.check(sum_with <= sum_without,
          "final L_u + L_f with surgery " + fmt(sum_with) +
              " exceeds baseline " + fmt(sum_without));
  r.note("rmse with " + fmt(with) + ", final L_u+L_f with " + fmt(sum_with) +
         ", without " + fmt(sum_without));
}

void criterion_smoke(Report& r) {
  const auto start = std::chrono::steady_clock::now();
  const ReproductionSummary s =
      reproduce("example1", "acceptance_runs/example1_smoke", true);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  const auto log = read_training_log(s.with_pcgrad.manifest.training_log);
  double total_at_100 = -1.0;
  for (const auto& row : log) {
    if (row.iteration == 100) total_at_100 = row.total;
  }
  r.check(total_at_100 > 0.0, "no training-log row at iteration 100");
  if (total_at_100 > 0.0 && !log.empty()) {
    const double final_total = log.back().total;
    r.check(final_total < 0.1 * total_at_100,
            "final total " + fmt(final_total) + " is not below 10% of " +
                fmt(total_at_100));
    r.note("total at 100: " + fmt(total_at_100) + ", final: " +
           fmt(final_total) + ", wall " + fmt(elapsed) + " s");
  }
  r.check(elapsed <= 180.0,
          "smoke tier took " + fmt(elapsed) + " s > 180 s");
}

// ---- driver ----------------------------------------------------------------

struct Entry {
  int number;
  std::string title;
  Report report;
  double seconds = 0.0;
};

void print_entry(const Entry& e) {
  std::printf("[%s] criterion %d: %s (%.1f s)\n", e.report.pass ? "PASS" : "FAIL",
              e.number, e.title.c_str(), e.seconds);
  for (const auto& line : e.report.lines) {
    std::printf("    %s\n", line.c_str());
  }
  std::fflush(stdout);
}

template <typename Fn>
Entry run_entry(int number, const std::string& title, Fn&& fn,
                double max_seconds = 0.0) {
  Entry e{number, title, {}, 0.0};
  const auto start = std::chrono::steady_clock::now();
  try {
    fn(e.report);
  } catch (const std::exception& ex) {
    e.report.pass = false;
    e.report.lines.push_back(std::string("threw: ") + ex.what());
  }
  e.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (max_seconds > 0.0) {
    e.report.check(e.seconds < max_seconds,
                   "took " + fmt(e.seconds) + " s, budget " +
                       fmt(max_seconds) + " s");
  }
  print_entry(e);
  return e;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string group = argc > 1 ? argv[1] : "";
  const std::vector<std::string> known = {
      "diff",  "pcgrad",   "oracle",   "models",   "smoke",
      "example1", "example2", "example3", "all"};
  bool ok_group = false;
  for (const auto& g : known) ok_group |= (g == group);
  if (!ok_group) {
    std::fprintf(stderr,
                 "usage: acceptance "
                 "diff|pcgrad|oracle|models|smoke|example1|example2|example3|"
                 "all\n");
    return 2;
  }

  std::vector<Entry> entries;
  const bool all = group == "all";

  if (all || group == "diff") {
    entries.push_back(run_entry(
        1, "du/dt and parameter gradients match central finite differences",
        criterion_diff, 60.0));
  }
  if (all || group == "pcgrad") {
    entries.push_back(
        run_entry(2, "projection surgery satisfies its invariants",
                  criterion_pcgrad, 60.0));
  }
  if (all || group == "oracle") {
    entries.push_back(run_entry(
        3, "RK4 oracle certified against closed form and step halving",
        criterion_oracle, 60.0));
  }
  if (all || group == "models") {
    entries.push_back(run_entry(
        4, "catalog generators: row sums, shape reduction, marginals",
        criterion_models, 60.0));
  }
  if (all || group == "example1") {
    Entry e5{5, "example1 full preset: RMSE band and arm ordering", {}, 0.0};
    Entry e6{6, "example1 extrapolation band under gradient surgery", {}, 0.0};
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria_example1(e5.report, e6.report);
    } catch (const std::exception& ex) {
      e5.report.pass = false;
      e5.report.lines.push_back(std::string("threw: ") + ex.what());
      e6.report.pass = false;
      e6.report.lines.push_back("not evaluated, the shared run threw");
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    e5.seconds = seconds;
    e6.seconds = seconds;
    print_entry(e5);
    print_entry(e6);
    entries.push_back(e5);
    entries.push_back(e6);
  }
  if (all || group == "example3") {
    entries.push_back(run_entry(
        7, "example3 full preset: performance-channel band and ratio",
        criterion_example3));
  }
  if (all || group == "example2") {
    entries.push_back(run_entry(
        8, "example2 full preset: RMSE band and final-loss ordering",
        criterion_example2));
  }
  if (all || group == "smoke") {
    entries.push_back(run_entry(
        9, "example1 smoke tier: loss decay within the runtime budget",
        criterion_smoke));
  }

  int failed = 0;
  for (const auto& e : entries) failed += e.report.pass ? 0 : 1;
  std::printf("%zu of %zu criteria passed\n", entries.size() - failed,
              entries.size());
  return failed == 0 ? 0 : 1;
}
