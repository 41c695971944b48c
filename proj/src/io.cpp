// Copyright 2026 The ppmtf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ppmtf/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace ppmtf {
namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
  const auto r = rows.size();
  const auto c = r ? rows[0].size() : 0;
  Eigen::MatrixXd m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  return m;
}

}  // namespace

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  auto out = open_output(path);
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << m(r, c);
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) row.push_back(std::stod(field));
    if (!rows.empty() && rows.front().size() != row.size())
      throw ParseError(path.string() + ": ragged rows");
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<SweepStats>& stats) {
  auto out = open_output(path);
  out << std::setprecision(17);
  out << "sweep,observed_l1_I,observed_l1_II\n";
  for (const SweepStats& s : stats)
    out << s.sweep << ',' << s.observed_l1_trans << ',' << s.observed_l1_visit << '\n';
}

void write_factors(const std::filesystem::path& dir, const GibbsResult& result,
                   const GibbsConfig& cfg, const HyperPriors& priors) {
  std::filesystem::create_directories(dir);
  if (cfg.mode == GibbsMode::shared) {
    write_matrix_csv(dir / "A.csv", result.theta.A);
    write_matrix_csv(dir / "B.csv", result.theta.B);
    write_matrix_csv(dir / "C.csv", result.theta.C);
    write_matrix_csv(dir / "D.csv", result.theta.D);
  } else {
    if (!result.visit_theta) throw Error("independent-mode result is missing the visit system");
    write_matrix_csv(dir / "A_I.csv", result.theta.A);
    write_matrix_csv(dir / "B_I.csv", result.theta.B);
    write_matrix_csv(dir / "C.csv", result.theta.C);
    write_matrix_csv(dir / "A_II.csv", result.visit_theta->A);
    write_matrix_csv(dir / "B_II.csv", result.visit_theta->B);
    write_matrix_csv(dir / "D.csv", result.visit_theta->D);
  }
  write_convergence_csv(dir / "convergence.csv", result.convergence);

  nlohmann::json meta;
  meta["alpha"] = cfg.alpha;
  meta["z"] = cfg.factors;
  meta["iterations"] = cfg.iterations;
  meta["burn_in"] = cfg.burn_in;
  meta["seed"] = cfg.seed;
  meta["mode"] = cfg.mode == GibbsMode::shared ? "shared" : "independent";
  meta["priors"] = {{"mu0", std::vector<double>(priors.mu0.data(), priors.mu0.data() + priors.mu0.size())},
                    {"beta0", priors.beta0},
                    {"nu0", priors.nu0},
                    {"w0", matrix_to_json(priors.w0)}};
  auto out = open_output(dir / "model.json");
  out << meta.dump(2) << '\n';
}

LoadedFactors read_factors(const std::filesystem::path& dir) {
  auto meta_in = open_input(dir / "model.json");
  nlohmann::json meta;
  meta_in >> meta;

  LoadedFactors loaded;
  loaded.cfg.alpha = meta.at("alpha").get<double>();
  loaded.cfg.factors = meta.at("z").get<int>();
  loaded.cfg.iterations = meta.at("iterations").get<int>();
  loaded.cfg.burn_in = meta.at("burn_in").get<int>();
  loaded.cfg.seed = meta.at("seed").get<std::uint64_t>();
  loaded.cfg.mode =
      meta.at("mode").get<std::string>() == "shared" ? GibbsMode::shared : GibbsMode::independent;

  const auto& priors = meta.at("priors");
  const auto mu0 = priors.at("mu0").get<std::vector<double>>();
  loaded.priors.mu0 = Eigen::Map<const Eigen::VectorXd>(mu0.data(), mu0.size());
  loaded.priors.beta0 = priors.at("beta0").get<double>();
  loaded.priors.nu0 = priors.at("nu0").get<double>();
  loaded.priors.w0 = matrix_from_json(priors.at("w0"));

  if (loaded.cfg.mode == GibbsMode::shared) {
    loaded.result.theta.A = read_matrix_csv(dir / "A.csv");
    loaded.result.theta.B = read_matrix_csv(dir / "B.csv");
    loaded.result.theta.C = read_matrix_csv(dir / "C.csv");
    loaded.result.theta.D = read_matrix_csv(dir / "D.csv");
  } else {
    loaded.result.theta.A = read_matrix_csv(dir / "A_I.csv");
    loaded.result.theta.B = read_matrix_csv(dir / "B_I.csv");
    loaded.result.theta.C = read_matrix_csv(dir / "C.csv");
    FactorMatrices visit;
    visit.A = read_matrix_csv(dir / "A_II.csv");
    visit.B = read_matrix_csv(dir / "B_II.csv");
    visit.D = read_matrix_csv(dir / "D.csv");
    loaded.result.visit_theta = std::move(visit);
  }
  return loaded;
}

LocationTable read_locations_file(const std::filesystem::path& path, LocationKind kind) {
  auto in = open_input(path);
  return parse_locations(in, kind);
}

TimeSlotMap read_time_slots_file(const std::filesystem::path& path,
                                 std::optional<int> fallback_instants) {
  auto in = open_input(path);
  return parse_time_slots(in, fallback_instants);
}

TraceDataset read_traces_file(const std::filesystem::path& events_path,
                              const LocationTable& locations, const TimeSlotMap& time) {
  auto in = open_input(events_path);
  return parse_traces(in, locations, time);
}

void write_traces_file(const std::filesystem::path& path, const TraceDataset& data) {
  auto out = open_output(path);
  write_traces(out, data);
}

void write_locations_file(const std::filesystem::path& path, const LocationTable& locations) {
  auto out = open_output(path);
  out << "location,x,y,category\n";
  out << std::setprecision(17);
  for (int i = 0; i < locations.count(); ++i)
    out << locations.names[i] << ',' << locations.x[i] << ',' << locations.y[i] << ','
        << locations.category[i] << '\n';
}

void write_time_slots_file(const std::filesystem::path& path, const TimeSlotMap& time) {
  auto out = open_output(path);
  out << "instant,slot\n";
  for (int t = 0; t < time.instant_count(); ++t) out << t << ',' << time.slot_of(t) << '\n';
}

SparseCountTensor read_tensor_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_tensor(in);
}

void write_tensor_file(const std::filesystem::path& path, const SparseCountTensor& tensor) {
  auto out = open_output(path);
  write_tensor(out, tensor);
}

}  // namespace ppmtf
