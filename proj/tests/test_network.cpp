#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "mssr/errors.hpp"
#include "mssr/io.hpp"
#include "mssr/network.hpp"
#include "mssr/tape.hpp"

using namespace mssr;

namespace {

std::string temp_path(const std::string& name) {
  return std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
         "/" + name;
}

NetworkArchitecture small_arch() {
  NetworkArchitecture arch;
  arch.hidden = {8};
  arch.output_dim = 3;
  return arch;
}

// Plain-double twin of the tape losses used below, for finite differencing.
double residual_style_loss(const NetworkParameters& params,
                           const Eigen::Matrix3d& a,
                           const std::vector<double>& inputs) {
  double acc = 0.0;
  for (double t : inputs) {
    const ForwardResult f = forward(params, t);
    const Eigen::Vector3d r = f.du_dt - a.transpose() * f.u;
    acc += r.squaredNorm();
  }
  return acc / static_cast<double>(inputs.size());
}

double ic_style_loss(const NetworkParameters& params,
                     const Eigen::Vector3d& s0) {
  const ForwardResult f = forward(params, 0.0);
  return (f.u - s0).squaredNorm();
}

}  // namespace

TEST_CASE("parameter layout partitions the flat vector") {
  NetworkArchitecture arch;  // [1, 50, 50, C] with C = 3
  arch.output_dim = 3;
  CHECK(arch.parameter_count() == 2803);

  const NetworkParameters params(arch);
  Eigen::Index expected_offset = 0;
  for (int layer = 0; layer < params.num_layers(); ++layer) {
    const LayerLayout& l = params.layout()[layer];
    CHECK(l.weight_offset == expected_offset);
    CHECK(l.bias_offset == l.weight_offset + l.rows * l.cols);
    expected_offset = l.bias_offset + l.rows;
  }
  CHECK(expected_offset == 2803);
  CHECK(params.values().size() == 2803);

  NetworkArchitecture bad;
  bad.input_dim = 2;
  CHECK_THROWS_AS(bad.validate(), ContractViolationError);
  NetworkArchitecture one_output;
  one_output.output_dim = 1;
  CHECK_THROWS_AS(one_output.validate(), ContractViolationError);
}

TEST_CASE("initialization is reproducible and spread as designed") {
  NetworkArchitecture arch;
  arch.output_dim = 3;
  const NetworkParameters a = initialize_parameters(arch, 42);
  const NetworkParameters b = initialize_parameters(arch, 42);
  CHECK((a.values() - b.values()).cwiseAbs().maxCoeff() == 0.0);
  const NetworkParameters c = initialize_parameters(arch, 43);
  CHECK((a.values() - c.values()).cwiseAbs().maxCoeff() > 0.0);

  for (int layer = 0; layer < a.num_layers(); ++layer) {
    CHECK(a.bias(layer).cwiseAbs().maxCoeff() == 0.0);
    const LayerLayout& l = a.layout()[layer];
    const double bound = std::sqrt(6.0 / (l.rows + l.cols));
    CHECK(a.weight(layer).cwiseAbs().maxCoeff() <= bound);
  }

  // Weight draws are uniform and symmetric, so the grand mean over many
  // seeds should sit within 3 standard errors of zero. With layer variances
  // bound^2/3 the standard error over 10000 draws is 2.81e-5.
  double sum = 0.0;
  long count = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const NetworkParameters draw = initialize_parameters(arch, seed);
    for (int layer = 0; layer < draw.num_layers(); ++layer) {
      sum += draw.weight(layer).sum();
      count += draw.weight(layer).size();
    }
  }
  CHECK(count == 2700L * 10000L);
  CHECK(std::abs(sum / static_cast<double>(count)) <= 3.0 * 2.81e-5);
}

TEST_CASE("head outputs are exact distributions with zero-sum tangents") {
  NetworkArchitecture arch;
  arch.output_dim = 3;
  const NetworkParameters params = initialize_parameters(arch, 7);
  Eigen::RowVectorXd inputs(1000);
  for (int i = 0; i < 1000; ++i) {
    inputs(i) = 1.3333 * static_cast<double>(i) / 999.0;
  }
  const BatchRecord rec = forward_batch(params, inputs);
  REQUIRE(rec.batch_size() == 1000);
  for (int j = 0; j < 1000; ++j) {
    CHECK(rec.u.col(j).minCoeff() > 0.0);
    CHECK(std::abs(rec.u.col(j).sum() - 1.0) <= 1e-12);
    CHECK(std::abs(rec.udot.col(j).sum()) <= 1e-10);
  }
}

TEST_CASE("zero parameters give the uniform head and zero tangent") {
  NetworkArchitecture arch;
  arch.output_dim = 4;
  NetworkParameters params(arch);
  params.values().setZero();
  const ForwardResult f = forward(params, 0.37);
  CHECK((f.u.array() - 0.25).abs().maxCoeff() <= 1e-15);
  CHECK(f.du_dt.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("input tangents match central finite differences") {
  NetworkArchitecture arch;
  arch.output_dim = 3;
  const NetworkParameters params = initialize_parameters(arch, 11);
  const double h = 1e-5;
  for (int i = 0; i < 25; ++i) {
    const double t = 1.2 * static_cast<double>(i) / 24.0;
    const ForwardResult f = forward(params, t);
    const Eigen::VectorXd fd =
        (forward(params, t + h).u - forward(params, t - h).u) / (2.0 * h);
    for (int s = 0; s < 3; ++s) {
      const double d = f.du_dt(s);
      if (std::abs(d) < 1e-4) {
        CHECK(std::abs(fd(s) - d) <= 1e-9);
      } else {
        CHECK(std::abs(fd(s) - d) <= 1e-5 * std::abs(d));
      }
    }
  }
}

TEST_CASE("tape gradient of a constant expression is zero") {
  const NetworkParameters params = initialize_parameters(small_arch(), 3);
  const Eigen::VectorXd g =
      loss_gradient(params, [](ad::Tape& tape, ad::TapeNetwork&) {
        return ad::Var{&tape, tape.constant(41.5)};
      });
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tape gradient of an initial-condition loss matches differencing") {
  NetworkParameters params = initialize_parameters(small_arch(), 5);
  const Eigen::Vector3d s0(1.0, 0.0, 0.0);
  const Eigen::VectorXd g =
      loss_gradient(params, [&s0](ad::Tape&, ad::TapeNetwork& net) {
        const auto eval = net.evaluate(0.0);
        std::vector<ad::Var> terms;
        for (int i = 0; i < 3; ++i) {
          terms.push_back(ad::square(eval.u[i] - s0(i)));
        }
        return ad::sum(terms);
      });
  REQUIRE(g.size() == params.values().size());
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const double saved = params.values()(k);
    params.values()(k) = saved + h;
    const double up = ic_style_loss(params, s0);
    params.values()(k) = saved - h;
    const double down = ic_style_loss(params, s0);
    params.values()(k) = saved;
    const double fd = (up - down) / (2.0 * h);
    CHECK(std::abs(fd - g(k)) <= 1e-4 * std::max(std::abs(g(k)), 1e-6));
  }
}

TEST_CASE("tape gradient of a residual-style loss matches differencing") {
  NetworkParameters params = initialize_parameters(small_arch(), 9);
  Eigen::Matrix3d a;
  a << -0.5, 0.5, 0.0, 0.0, -0.3, 0.3, 0.0, 0.0, 0.0;
  const std::vector<double> inputs = {0.0, 0.5, 1.0};
  const Eigen::VectorXd g =
      loss_gradient(params, [&](ad::Tape&, ad::TapeNetwork& net) {
        std::vector<ad::Var> point_terms;
        for (double t : inputs) {
          const auto eval = net.evaluate(t);
          std::vector<ad::Var> state_terms;
          for (int i = 0; i < 3; ++i) {
            // r_i = du_i/dt - (A^T u)_i, A^T row i = column i of A.
            ad::Var flux = eval.du_dt[i];
            for (int k = 0; k < 3; ++k) {
              if (a(k, i) != 0.0) flux = flux - a(k, i) * eval.u[k];
            }
            state_terms.push_back(ad::square(flux));
          }
          point_terms.push_back(ad::sum(state_terms));
        }
        return ad::mean(point_terms);
      });
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const double saved = params.values()(k);
    params.values()(k) = saved + h;
    const double up = residual_style_loss(params, a, inputs);
    params.values()(k) = saved - h;
    const double down = residual_style_loss(params, a, inputs);
    params.values()(k) = saved;
    const double fd = (up - down) / (2.0 * h);
    CHECK(std::abs(fd - g(k)) <= 1e-4 * std::max(std::abs(g(k)), 1e-6));
  }
}

TEST_CASE("second time derivatives are declared out of scope") {
  const NetworkParameters params = initialize_parameters(small_arch(), 1);
  CHECK_THROWS_AS(
      loss_gradient(params,
                    [](ad::Tape& tape, ad::TapeNetwork& net) {
                      const auto dd = net.second_time_derivative(0.5);
                      (void)dd;
                      return ad::Var{&tape, tape.constant(0.0)};
                    }),
      CapabilityError);
}

TEST_CASE("checkpoints round-trip bitwise") {
  NetworkArchitecture arch;
  arch.output_dim = 3;
  const NetworkParameters params = initialize_parameters(arch, 42);
  const std::string path = temp_path("mssr_ckpt_roundtrip.bin");
  save_checkpoint(path, params, 42, 12345, 60000.0);
  const Checkpoint cp = load_checkpoint(path);
  CHECK(cp.params.architecture() == arch);
  CHECK((cp.params.values() - params.values()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(cp.seed == 42);
  CHECK(cp.iteration == 12345);
  CHECK(cp.time_scale == 60000.0);
  std::remove(path.c_str());
}

TEST_CASE("corrupted checkpoints are rejected, not misread") {
  NetworkArchitecture arch;
  arch.output_dim = 3;
  const NetworkParameters params = initialize_parameters(arch, 8);
  const std::string path = temp_path("mssr_ckpt_corrupt.bin");
  save_checkpoint(path, params, 8, 10, 1.0);

  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in),
                 std::istreambuf_iterator<char>());
  }

  const std::string bad_magic_path = temp_path("mssr_ckpt_badmagic.bin");
  {
    std::string tampered = bytes;
    tampered[0] = 'X';
    std::ofstream out(bad_magic_path, std::ios::binary);
    out.write(tampered.data(), static_cast<std::streamsize>(tampered.size()));
  }
  CHECK_THROWS_AS(load_checkpoint(bad_magic_path), IoError);

  const std::string truncated_path = temp_path("mssr_ckpt_truncated.bin");
  {
    std::ofstream out(truncated_path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 64));
  }
  CHECK_THROWS_AS(load_checkpoint(truncated_path), IoError);

  const std::string version_path = temp_path("mssr_ckpt_version.bin");
  {
    std::string tampered = bytes;
    const std::string needle = "\"format_version\":1";
    const auto pos = tampered.find(needle);
    REQUIRE(pos != std::string::npos);
    tampered[pos + needle.size() - 1] = '9';
    std::ofstream out(version_path, std::ios::binary);
    out.write(tampered.data(), static_cast<std::streamsize>(tampered.size()));
  }
  try {
    load_checkpoint(version_path);
    FAIL("version mismatch was not detected");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }

  CHECK_THROWS_AS(load_checkpoint(temp_path("mssr_ckpt_missing.bin")), IoError);

  for (const std::string& p :
       {path, bad_magic_path, truncated_path, version_path}) {
    std::remove(p.c_str());
  }
}
