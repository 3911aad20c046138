#include "mssr/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mssr {

namespace {

using nlohmann::json;

constexpr char kCheckpointMagic[8] = {'M', 'S', 'S', 'R', 'N', 'E', 'T', '1'};
constexpr int kCheckpointVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

json architecture_to_json(const NetworkArchitecture& arch) {
  return json{{"input_dim", arch.input_dim},
              {"hidden", arch.hidden},
              {"output_dim", arch.output_dim},
              {"hidden_activation", "tanh"},
              {"output_activation", "softmax"}};
}

NetworkArchitecture architecture_from_json(const json& j) {
  NetworkArchitecture arch;
  arch.input_dim = j.at("input_dim").get<int>();
  arch.hidden = j.at("hidden").get<std::vector<int>>();
  arch.output_dim = j.at("output_dim").get<int>();
  return arch;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    fields.push_back(field);
  }
  return fields;
}

double parse_double(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("malformed numeric field '" + s + "' in " + path);
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x00000100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_trajectory_csv(const std::string& path,
                          const TrajectoryTable& table) {
  if (table.rows.rows() != table.times.size() ||
      static_cast<int>(table.channel_names.size()) != table.rows.cols()) {
    throw ContractViolationError("trajectory table is inconsistent");
  }
  std::ostringstream out;
  out << "t";
  for (const auto& name : table.channel_names) {
    out << ',' << name;
  }
  out << '\n';
  for (Eigen::Index i = 0; i < table.times.size(); ++i) {
    out << format_double(table.times[i]);
    for (Eigen::Index j = 0; j < table.rows.cols(); ++j) {
      out << ',' << format_double(table.rows(i, j));
    }
    out << '\n';
  }
  write_text_file(path, out.str());

  json manifest{{"model_id", table.model_id},
                {"provenance", to_string(table.provenance)},
                {"channels", table.channel_names},
                {"num_rows", table.times.size()},
                {"internal_step", table.metadata.internal_step},
                {"max_defect", table.metadata.max_defect},
                {"checkpoint", table.metadata.checkpoint}};
  write_text_file(path + ".json", manifest.dump(2) + "\n");
}

TrajectoryTable read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty trajectory file " + path);
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "t") {
    throw IoError("unexpected trajectory header in " + path);
  }

  TrajectoryTable table;
  table.channel_names.assign(header.begin() + 1, header.end());
  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw IoError("row width mismatch in " + path);
    }
    times.push_back(parse_double(fields[0], path));
    for (std::size_t j = 1; j < fields.size(); ++j) {
      values.push_back(parse_double(fields[j], path));
    }
  }
  const Eigen::Index n = static_cast<Eigen::Index>(times.size());
  const Eigen::Index c = static_cast<Eigen::Index>(table.channel_names.size());
  table.times = Eigen::Map<Eigen::VectorXd>(times.data(), n);
  table.rows =
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                               Eigen::RowMajor>>(values.data(), n, c);

  std::ifstream side(path + ".json");
  if (side) {
    try {
      const json manifest = json::parse(side);
      table.model_id = manifest.value("model_id", "");
      table.provenance =
          provenance_from_string(manifest.value("provenance", "oracle_rk4"));
      table.metadata.internal_step = manifest.value("internal_step", 0.0);
      table.metadata.max_defect = manifest.value("max_defect", 0.0);
      table.metadata.checkpoint = manifest.value("checkpoint", "");
    } catch (const json::exception& e) {
      throw IoError("malformed sidecar manifest for " + path + ": " + e.what());
    }
  }
  return table;
}

TrainingLogWriter::TrainingLogWriter(const std::string& path) : path_(path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw IoError("cannot open " + path + " for writing");
  out_ = f;
  std::fputs("iteration,loss_u,loss_f,total,learning_rate,cos_uf,projections\n",
             f);
}

TrainingLogWriter::~TrainingLogWriter() {
  if (out_ != nullptr) std::fclose(static_cast<std::FILE*>(out_));
}

void TrainingLogWriter::append(const TrainingLogRow& row) {
  std::FILE* f = static_cast<std::FILE*>(out_);
  std::fprintf(f, "%ld,%s,%s,%s,%s,%s,%d\n", row.iteration,
               format_double(row.loss_u).c_str(),
               format_double(row.loss_f).c_str(),
               format_double(row.total).c_str(),
               format_double(row.learning_rate).c_str(),
               format_double(row.cos_uf).c_str(), row.projections);
  if (std::ferror(f)) throw IoError("write failed for " + path_);
  std::fflush(f);
}

std::vector<TrainingLogRow> read_training_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty training log " + path);
  std::vector<TrainingLogRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 7) throw IoError("row width mismatch in " + path);
    TrainingLogRow row;
    row.iteration = static_cast<long>(parse_double(fields[0], path));
    row.loss_u = parse_double(fields[1], path);
    row.loss_f = parse_double(fields[2], path);
    row.total = parse_double(fields[3], path);
    row.learning_rate = parse_double(fields[4], path);
    row.cos_uf = parse_double(fields[5], path);
    row.projections = static_cast<int>(parse_double(fields[6], path));
    rows.push_back(row);
  }
  return rows;
}

void save_checkpoint(const std::string& path, const NetworkParameters& params,
                     std::uint64_t seed, long iteration, double time_scale) {
  json header{{"format_version", kCheckpointVersion},
              {"architecture", architecture_to_json(params.architecture())},
              {"seed", seed},
              {"iteration", iteration},
              {"time_scale", time_scale},
              {"parameter_count", params.values().size()}};
  const std::string header_str = header.dump();
  if (header_str.size() > 0xffffffffULL) {
    throw IoError("checkpoint header too large");
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::uint32_t len = static_cast<std::uint32_t>(header_str.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  out.write(reinterpret_cast<const char*>(params.values().data()),
            static_cast<std::streamsize>(params.values().size() *
                                         sizeof(double)));
  if (!out) throw IoError("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw IoError(path + " is not a network checkpoint");
  }
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in) throw IoError("truncated checkpoint header in " + path);
  std::string header_str(len, '\0');
  in.read(header_str.data(), len);
  if (!in) throw IoError("truncated checkpoint header in " + path);

  json header;
  try {
    header = json::parse(header_str);
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint header in " + path + ": " + e.what());
  }
  const int version = header.at("format_version").get<int>();
  if (version != kCheckpointVersion) {
    throw IoError(path + " has checkpoint format version " +
                  std::to_string(version) + "; this build reads version " +
                  std::to_string(kCheckpointVersion));
  }

  Checkpoint cp{
      NetworkParameters(architecture_from_json(header.at("architecture"))),
      header.at("seed").get<std::uint64_t>(),
      header.at("iteration").get<long>(),
      header.at("time_scale").get<double>()};
  const Eigen::Index expected = header.at("parameter_count").get<Eigen::Index>();
  if (expected != cp.params.values().size()) {
    throw IoError("checkpoint parameter count does not match architecture in " +
                  path);
  }
  in.read(reinterpret_cast<char*>(cp.params.values().data()),
          static_cast<std::streamsize>(expected * sizeof(double)));
  if (!in || in.gcount() !=
                 static_cast<std::streamsize>(expected * sizeof(double))) {
    throw IoError("truncated parameter payload in " + path);
  }
  return cp;
}

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::vector<PlotSeries>& series) {
  if (series.empty()) {
    throw ContractViolationError("line chart needs at least one series");
  }
  double xmin = series[0].x.minCoeff(), xmax = series[0].x.maxCoeff();
  double ymin = series[0].y.minCoeff(), ymax = series[0].y.maxCoeff();
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.size() < 2) {
      throw ContractViolationError("plot series needs matching x/y, >= 2 points");
    }
    xmin = std::min(xmin, s.x.minCoeff());
    xmax = std::max(xmax, s.x.maxCoeff());
    ymin = std::min(ymin, s.y.minCoeff());
    ymax = std::max(ymax, s.y.maxCoeff());
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  constexpr int kW = 960, kH = 540;
  constexpr int kL = 70, kR = 20, kT = 40, kB = 45;
  auto sx = [&](double x) {
    return kL + (x - xmin) / (xmax - xmin) * (kW - kL - kR);
  };
  auto sy = [&](double y) {
    return kH - kB - (y - ymin) / (ymax - ymin) * (kH - kT - kB);
  };
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                           "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH
      << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n"
      << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR
      << "\" y2=\"" << kH - kB << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL
      << "\" y2=\"" << kH - kB << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = xmin + (xmax - xmin) * i / 4.0;
    const double y = ymin + (ymax - ymin) * i / 4.0;
    out << "<text x=\"" << sx(x) << "\" y=\"" << kH - kB + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << x << "</text>\n"
        << "<text x=\"" << kL - 8 << "\" y=\"" << sy(y) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << y << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    out << "<polyline fill=\"none\" stroke=\""
        << palette[s % std::size(palette)] << "\" stroke-width=\"1.5\" "
        << "points=\"";
    for (Eigen::Index i = 0; i < series[s].x.size(); ++i) {
      if (i) out << ' ';
      out << sx(series[s].x[i]) << ',' << sy(series[s].y[i]);
    }
    out << "\"/>\n"
        << "<text x=\"" << kW - kR - 10 << "\" y=\"" << kT + 16 * (s + 1)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
           "fill=\""
        << palette[s % std::size(palette)] << "\">" << series[s].label
        << "</text>\n";
  }
  out << "</svg>\n";
  write_text_file(path, out.str());
}

}  // namespace mssr
