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

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "ppmtf/generator.hpp"
#include "ppmtf/io.hpp"
#include "ppmtf/pipeline.hpp"
#include "ppmtf/serial_ref.hpp"

namespace fs = std::filesystem;
using namespace ppmtf;

namespace {

struct DatasetArgs {
  std::string events;
  std::string locations;
  std::string time;
  int instants = 0;  // fallback for rule-based time configs
  std::string location_kind = "grid";

  void add(CLI::App* cmd, const char* events_flag = "--traces") {
    cmd->add_option(events_flag, events, "Event CSV (user,instant,location)")->required();
    cmd->add_option("--locations", locations, "Location CSV (location,x,y[,category])")
        ->required();
    cmd->add_option("--time", time,
                    "Time-slot config (instant,slot lines or cycle:/contiguous: rule)")
        ->required();
    cmd->add_option("--instants", instants, "Instant count for rule-based time configs");
    cmd->add_option("--location-kind", location_kind, "grid or poi")
        ->check(CLI::IsMember({"grid", "poi"}));
  }

  TraceDataset load() const {
    const LocationTable locs = read_locations_file(
        locations, location_kind == "poi" ? LocationKind::poi : LocationKind::grid);
    const TimeSlotMap slots = read_time_slots_file(
        time, instants > 0 ? std::optional<int>(instants) : std::nullopt);
    return read_traces_file(events, locs, slots);
  }
};

struct TrimArgs {
  TrimConfig cfg;
  void add(CLI::App* cmd) {
    cmd->add_option("--lambda-i", cfg.lambda_trans, "Max positive transition cells per user");
    cmd->add_option("--lambda-ii", cfg.lambda_visit, "Max positive visit cells per user");
    cmd->add_option("--rmax-i", cfg.rmax_trans, "Max transition count per cell");
    cmd->add_option("--rmax-ii", cfg.rmax_visit, "Max visit count per cell");
    cmd->add_option("--rho-i", cfg.rho_trans, "Observed transition zeros per user");
    cmd->add_option("--rho-ii", cfg.rho_visit, "Observed visit zeros per user");
  }
};

struct PdArgs {
  PDConfig cfg;
  void add(CLI::App* cmd) {
    cmd->add_option("--k", cfg.k, "Required bucket-mate count");
    cmd->add_option("--eta", cfg.eta, "Bucket width (log scale)");
    cmd->add_option("--subset", cfg.subset_size, "Test subset size |U*|");
    cmd->add_option("--pd-seed", cfg.seed, "Subset selection seed");
  }
};

void write_pd_report(const fs::path& path, const TraceDataset& synthetic,
                     const std::vector<int>& input_users, const std::vector<PDResult>& results) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "trace_id,input_user,bucket,k_found,pass\n";
  for (std::size_t t = 0; t < results.size(); ++t)
    out << synthetic.user_names[t] << ',' << input_users[t] << ',' << results[t].bucket << ','
        << results[t].count << ',' << (results[t].pass ? 1 : 0) << '\n';
}

int run(int argc, char** argv) {
  CLI::App app{"Synthetic location traces via coupled tensor factorization"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI config ([subcommand] sections, key=value)");
  app.allow_config_extras(CLI::config_extras_mode::ignore_all);
  int threads = 0;
  app.add_option("--threads", threads, "Max worker threads (1 = serial)");
  app.parse_complete_callback([&] { set_max_threads(threads); });

  // ---------------------------------------------------------------- gen-demo
  auto* gen_demo = app.add_subcommand("gen-demo", "Generate the clustered demo dataset");
  std::string demo_out = "demo";
  DemoSpec demo_spec;
  gen_demo->add_option("--out", demo_out, "Output directory");
  gen_demo->add_option("--users", demo_spec.train_users, "Training users");
  gen_demo->add_option("--test-users", demo_spec.test_users, "Testing users");
  gen_demo->add_option("--grid-width", demo_spec.grid_width, "Grid columns");
  gen_demo->add_option("--grid-height", demo_spec.grid_height, "Grid rows");
  gen_demo->add_option("--instants", demo_spec.instants, "Time instants per trace");
  gen_demo->add_option("--instants-per-slot", demo_spec.instants_per_slot, "Slot width");
  gen_demo->add_option("--clusters", demo_spec.clusters, "Planted clusters");
  gen_demo->add_option("--concentration", demo_spec.concentration, "Cluster tightness");
  gen_demo->add_option("--missing-rate", demo_spec.missing_rate, "Event dropout rate");
  gen_demo->add_option("--seed", demo_spec.seed, "Seed");
  gen_demo->callback([&] {
    const DemoData demo = generate_demo_data(demo_spec);
    const fs::path dir = demo_out;
    write_traces_file(dir / "train_events.csv", demo.train);
    write_traces_file(dir / "test_events.csv", demo.test);
    write_locations_file(dir / "locations.csv", demo.train.locations);
    write_time_slots_file(dir / "timeslots.csv", demo.train.time);
    std::ofstream labels(dir / "cluster_labels.csv");
    labels << "user,cluster\n";
    for (int n = 0; n < demo.train.users(); ++n)
      labels << demo.train.user_names[n] << ',' << demo.train_cluster[n] << '\n';
    std::cout << "wrote demo data (" << demo.train.users() << " train / " << demo.test.users()
              << " test users) to " << dir.string() << '\n';
  });

  // ------------------------------------------------------------ build-tensors
  auto* build = app.add_subcommand("build-tensors", "Count, trim and subsample both tensors");
  DatasetArgs build_data;
  build_data.add(build);
  TrimArgs build_trim;
  build_trim.add(build);
  std::string build_out = ".";
  std::uint64_t build_seed = 1;
  build->add_option("--out", build_out, "Output directory");
  build->add_option("--seed", build_seed, "Trim / zero-selection seed");
  build->callback([&] {
    const TraceDataset data = build_data.load();
    build_trim.cfg.seed = build_seed;
    const TensorPair tensors = build_count_tensors(data, build_trim.cfg);
    write_tensor_file(fs::path(build_out) / "tensor_I.csv", tensors.trans);
    write_tensor_file(fs::path(build_out) / "tensor_II.csv", tensors.visit);
    // sidecar dictionary: tensor dumps refer to users by dense index
    std::ofstream users(fs::path(build_out) / "users.csv");
    users << "user,index\n";
    for (int n = 0; n < data.users(); ++n) users << data.user_names[n] << ',' << n << '\n';
    std::cout << "tensor_I positives " << tensors.trans.total_positive_cells()
              << ", tensor_II positives " << tensors.visit.total_positive_cells() << '\n';
  });

  // ------------------------------------------------------------------- train
  auto* train = app.add_subcommand("train", "Gibbs-sample the factor matrices");
  std::string train_tensor_i = "tensor_I.csv";
  std::string train_tensor_ii = "tensor_II.csv";
  std::string train_out = "factors";
  std::string train_mode = "shared";
  GibbsConfig gibbs_cfg;
  train->add_option("--tensor-i", train_tensor_i, "Transition tensor dump");
  train->add_option("--tensor-ii", train_tensor_ii, "Visit tensor dump");
  train->add_option("--out", train_out, "Output directory");
  train->add_option("--alpha", gibbs_cfg.alpha, "Observation precision");
  train->add_option("--z", gibbs_cfg.factors, "Factor count");
  train->add_option("--iters", gibbs_cfg.iterations, "Gibbs sweeps");
  train->add_option("--burn-in", gibbs_cfg.burn_in, "Discarded sweeps");
  train->add_option("--seed", gibbs_cfg.seed, "Seed");
  train->add_option("--mode", train_mode, "shared (coupled) or independent (ablation)")
      ->check(CLI::IsMember({"shared", "independent"}));
  train->callback([&] {
    TensorPair tensors;
    tensors.trans = read_tensor_file(train_tensor_i);
    tensors.visit = read_tensor_file(train_tensor_ii);
    gibbs_cfg.mode = train_mode == "shared" ? GibbsMode::shared : GibbsMode::independent;
    const HyperPriors priors = HyperPriors::defaults(gibbs_cfg.factors);
    const GibbsResult result = gibbs_train(tensors, priors, gibbs_cfg);
    write_factors(train_out, result, gibbs_cfg, priors);
    std::cout << "trained " << gibbs_cfg.iterations << " sweeps; final observed L1 "
              << result.convergence.back().observed_l1_trans << " / "
              << result.convergence.back().observed_l1_visit << '\n';
  });

  // -------------------------------------------------------------- synthesize
  auto* synth = app.add_subcommand("synthesize", "Generate synthetic traces from factors");
  DatasetArgs synth_data;
  synth_data.add(synth);
  std::string synth_factors = "factors";
  std::string synth_out = "syn_traces.csv";
  std::string synth_quarantine = "quarantine.csv";
  std::string synth_pd_report = "pd_report.csv";
  bool synth_pd_gate = false;
  SynthesisConfig synth_cfg;
  PdArgs synth_pd;
  synth->add_option("--factors", synth_factors, "Trained factor directory");
  synth->add_option("--out", synth_out, "Released trace CSV");
  synth->add_option("--phi", synth_cfg.phi, "Probability floor");
  synth->add_option("--replicas", synth_cfg.replicas, "Synthetic traces per user");
  synth->add_option("--length", synth_cfg.length, "Trace length (0 = all instants)");
  synth->add_option("--seed", synth_cfg.seed, "Synthesis seed");
  synth->add_flag("--pd-gate", synth_pd_gate, "Release only traces that pass the PD test");
  synth->add_option("--quarantine", synth_quarantine, "Rejected trace CSV (with --pd-gate)");
  synth->add_option("--pd-report", synth_pd_report, "PD result CSV (with --pd-gate)");
  synth_pd.add(synth);
  synth->callback([&] {
    const TraceDataset train_set = synth_data.load();
    const LoadedFactors loaded = read_factors(synth_factors);
    const FactorMatrices& theta = loaded.result.theta;
    const FactorMatrices& visit_theta =
        loaded.result.visit_theta ? *loaded.result.visit_theta : loaded.result.theta;
    const SynthesisResult result = synthesize_dataset(
        theta, visit_theta, train_set, synth_cfg, synth_pd_gate ? &synth_pd.cfg : nullptr);
    write_traces_file(synth_out, result.released);
    std::cout << "released " << result.released.users() << " traces";
    if (synth_pd_gate) {
      write_traces_file(synth_quarantine, result.quarantined);
      std::cout << ", quarantined " << result.quarantined.users() << " (pass rate "
                << pd_pass_rate(result.pd_results) << ")";
      TraceDataset all;
      all.locations = train_set.locations;
      all.time = train_set.time;
      std::vector<int> inputs;
      int rel = 0;
      int quar = 0;
      for (const PDResult& r : result.pd_results) {
        if (r.pass) {
          all.user_names.push_back(result.released.user_names[rel]);
          inputs.push_back(result.released_input_user[rel++]);
        } else {
          all.user_names.push_back(result.quarantined.user_names[quar]);
          inputs.push_back(result.quarantined_input_user[quar++]);
        }
      }
      write_pd_report(synth_pd_report, all, inputs, result.pd_results);
    }
    std::cout << '\n';
  });

  // ----------------------------------------------------------------- pd-test
  auto* pd_cmd = app.add_subcommand("pd-test", "Bucket test for existing synthetic traces");
  DatasetArgs pd_data;
  pd_data.add(pd_cmd);
  std::string pd_factors = "factors";
  std::string pd_synth = "syn_traces.csv";
  std::string pd_out = "pd_report.csv";
  double pd_phi = 1e-8;
  PdArgs pd_args;
  pd_cmd->add_option("--factors", pd_factors, "Trained factor directory");
  pd_cmd->add_option("--synthetic", pd_synth, "Synthetic trace CSV");
  pd_cmd->add_option("--out", pd_out, "Report CSV");
  pd_cmd->add_option("--phi", pd_phi, "Probability floor");
  pd_args.add(pd_cmd);
  pd_cmd->callback([&] {
    const TraceDataset train_set = pd_data.load();
    const TraceDataset synthetic =
        read_traces_file(pd_synth, train_set.locations, train_set.time);
    const std::vector<int> input_users = input_users_from_names(synthetic, train_set);
    const LoadedFactors loaded = read_factors(pd_factors);
    const FactorMatrices& theta = loaded.result.theta;
    const FactorMatrices& visit_theta =
        loaded.result.visit_theta ? *loaded.result.visit_theta : loaded.result.theta;
    const std::vector<PDResult> results =
        pd_test_dataset(theta, visit_theta, train_set, synthetic, input_users, pd_phi,
                        pd_args.cfg);
    write_pd_report(pd_out, synthetic, input_users, results);
    std::cout << "pass rate " << pd_pass_rate(results) << " over " << results.size()
              << " traces\n";
  });

  // ---------------------------------------------------------------- evaluate
  auto* eval = app.add_subcommand("evaluate", "Utility metrics against testing traces");
  DatasetArgs eval_data;
  eval_data.add(eval, "--test");
  std::string eval_synth = "syn_traces.csv";
  std::string eval_train;
  std::string eval_out = "utility_report.csv";
  std::string eval_factors;
  std::string eval_clusters_out = "clusters.csv";
  double eval_fraction = 0.1;
  std::uint64_t eval_seed = 1;
  eval->add_option("--synthetic", eval_synth, "Synthetic trace CSV")->required();
  eval->add_option("--train", eval_train, "Training event CSV (adds the Training baseline)");
  eval->add_option("--out", eval_out, "Report CSV");
  eval->add_option("--factors", eval_factors, "Factor directory (adds cluster dumps)");
  eval->add_option("--clusters-out", eval_clusters_out, "Cluster frequency CSV");
  eval->add_option("--cluster-fraction", eval_fraction, "Top user fraction per column");
  eval->add_option("--uniform-seed", eval_seed, "Uniform baseline seed");
  eval->callback([&] {
    const TraceDataset test_set = eval_data.load();
    const TraceDataset synthetic =
        read_traces_file(eval_synth, test_set.locations, test_set.time);

    std::ofstream out(eval_out);
    if (!out) throw Error("cannot write " + eval_out);
    out << std::setprecision(17) << "dataset,metric,value\n";
    auto emit = [&](const std::string& name, const UtilityReport& r) {
      out << name << ",tp_tv," << r.tp_tv << '\n'
          << name << ",tp_tv_top50," << r.tp_tv_top50 << '\n'
          << name << ",tm_emd_x," << r.tm_emd_x << '\n'
          << name << ",tm_emd_y," << r.tm_emd_y << '\n'
          << name << ",vf_tv," << r.vf_tv << '\n';
      std::cout << std::setw(10) << name << "  tp_tv " << r.tp_tv << "  top50 " << r.tp_tv_top50
                << "  emd_x " << r.tm_emd_x << "  emd_y " << r.tm_emd_y << "  vf_tv " << r.vf_tv
                << '\n';
    };
    emit("synthetic", evaluate_utility(test_set, synthetic));
    emit("uniform", evaluate_utility(test_set, uniform_baseline(test_set.users(),
                                                                test_set.locations,
                                                                test_set.time, eval_seed)));
    if (!eval_train.empty()) {
      const TraceDataset train_set =
          read_traces_file(eval_train, test_set.locations, test_set.time);
      emit("training", evaluate_utility(test_set, training_baseline(train_set)));
    }

    if (!eval_factors.empty()) {
      if (eval_train.empty())
        throw ConfigError("cluster dumps need --train (factor rows index training users)");
      const LoadedFactors loaded = read_factors(eval_factors);
      std::ofstream clusters(eval_clusters_out);
      clusters << "cluster_k,location,freq\n";
      const Eigen::MatrixXd& a = loaded.result.theta.A;
      // cluster columns index training users, so dump their frequencies
      const TraceDataset cluster_source =
          read_traces_file(eval_train, test_set.locations, test_set.time);
      for (int k = 0; k < a.cols(); ++k) {
        const std::vector<int> members = extract_cluster(a, k, eval_fraction);
        Eigen::VectorXd freq = Eigen::VectorXd::Zero(test_set.locations.count());
        for (int n : members)
          if (n < cluster_source.users())
            for (const Event& e : cluster_source.traces[n].events) freq(e.location) += 1.0;
        if (freq.sum() > 0) freq /= freq.sum();
        for (int x = 0; x < freq.size(); ++x)
          if (freq(x) > 0) clusters << k << ',' << test_set.locations.names[x] << ',' << freq(x)
                                    << '\n';
      }
    }
  });

  // ------------------------------------------------------------------ attack
  auto* attack = app.add_subcommand("attack", "Re-identification and membership inference");
  DatasetArgs attack_data;
  attack_data.add(attack, "--train");
  std::string attack_test;
  std::string attack_synth = "syn_traces.csv";
  std::string attack_out = "attack";
  attack->add_option("--test", attack_test, "Testing event CSV (non-members)")->required();
  attack->add_option("--synthetic", attack_synth, "Synthetic trace CSV")->required();
  attack->add_option("--out", attack_out, "Output prefix (_reid.csv, _membership.csv)");
  attack->callback([&] {
    const TraceDataset train_set = attack_data.load();
    const TraceDataset test_set =
        read_traces_file(attack_test, train_set.locations, train_set.time);
    const TraceDataset synthetic =
        read_traces_file(attack_synth, train_set.locations, train_set.time);
    const std::vector<int> input_users = input_users_from_names(synthetic, train_set);
    const AttackSummary summary = run_attacks(train_set, test_set, synthetic, input_users);

    // per-trace re-identification outcomes
    std::vector<Trace> known = train_set.traces;
    known.insert(known.end(), test_set.traces.begin(), test_set.traces.end());
    for (std::size_t n = 0; n < known.size(); ++n) known[n].user = static_cast<int>(n);
    const AttackModel model = build_attack_model(known, train_set.locations.count());
    std::ofstream reid(attack_out + "_reid.csv");
    reid << "trace_id,predicted_user,true_user,correct\n";
    for (int t = 0; t < synthetic.users(); ++t) {
      bool has_transition = false;
      const auto& events = synthetic.traces[t].events;
      for (std::size_t e = 1; e < events.size(); ++e)
        if (events[e - 1].instant + 1 == events[e].instant) has_transition = true;
      if (!has_transition) {
        reid << synthetic.user_names[t] << ",,," << '\n';
        continue;
      }
      const int predicted = reidentify(synthetic.traces[t], model, train_set.users());
      reid << synthetic.user_names[t] << ',' << train_set.user_names[predicted] << ','
           << train_set.user_names[input_users[t]] << ',' << (predicted == input_users[t])
           << '\n';
    }
    std::ofstream member(attack_out + "_membership.csv");
    member << std::setprecision(17) << "psi,advantage\n";
    for (const auto& [psi, adv] : summary.membership.curve)
      member << psi << ',' << adv << '\n';
    std::cout << "reid rate " << summary.reid_rate << " over " << summary.reid_traces
              << " traces (" << summary.reid_skipped << " skipped); membership advantage "
              << summary.membership.best_advantage << " at psi "
              << summary.membership.best_threshold << '\n';
  });

  // --------------------------------------------------------------- dp-report
  auto* dp = app.add_subcommand("dp-report", "Privacy budgets for the trained factors");
  std::string dp_factors = "factors";
  TrimArgs dp_trim;
  dp_trim.add(dp);
  std::string dp_out = "dp_report.txt";
  int dp_samples = 0;
  dp->add_option("--factors", dp_factors, "Trained factor directory");
  dp->add_option("--out", dp_out, "Report file");
  dp->add_option("--sample-cells", dp_samples,
                 "Sampled cells per user for kappa (0 = exact scan)");
  dp->callback([&] {
    const LoadedFactors loaded = read_factors(dp_factors);
    if (loaded.result.visit_theta)
      throw Error("dp-report applies to the shared (coupled) model only");
    const KappaResult kappa = compute_kappa(
        loaded.result.theta, dp_trim.cfg.rmax_trans, dp_trim.cfg.rmax_visit,
        dp_samples > 0 ? std::optional<int>(dp_samples) : std::nullopt, loaded.cfg.seed);
    const double eps_trace = epsilon_trace(
        loaded.cfg.alpha, dp_trim.cfg.lambda_trans, dp_trim.cfg.rho_trans,
        dp_trim.cfg.rmax_trans, dp_trim.cfg.lambda_visit, dp_trim.cfg.rho_visit,
        dp_trim.cfg.rmax_visit, kappa.kappa);
    const double eps_single = epsilon_single_location(
        loaded.cfg.alpha, dp_trim.cfg.rmax_trans, dp_trim.cfg.rmax_visit, kappa.kappa);
    const std::uint64_t mem = estimate_memory_bytes(
        loaded.result.theta.A.rows(), loaded.result.theta.B.rows(), loaded.result.theta.D.rows(),
        dp_trim.cfg, loaded.cfg.factors);

    std::ofstream out(dp_out);
    out << std::setprecision(17);
    auto line = [&](const std::string& key, auto value) {
      out << key << ' ' << value << '\n';
      std::cout << key << ' ' << value << '\n';
    };
    line("alpha", loaded.cfg.alpha);
    line("kappa", kappa.kappa);
    line("kappa_exact", kappa.exact ? 1 : 0);
    if (!kappa.exact) line("kappa_note", "sampled scan: kappa and epsilons are lower bounds");
    line("epsilon_trace", eps_trace);
    line("epsilon_single_location", eps_single);
    line("memory_bytes", mem);
  });

  // static --------------------------------------------------- estimate-memory
  auto* mem = app.add_subcommand("estimate-memory", "Training memory footprint");
  std::int64_t mem_users = 0;
  std::int64_t mem_locations = 0;
  std::int64_t mem_slots = 0;
  int mem_z = 16;
  TrimArgs mem_trim;
  mem_trim.add(mem);
  mem->add_option("--users", mem_users, "Training users")->required();
  mem->add_option("--locations", mem_locations, "Locations")->required();
  mem->add_option("--slots", mem_slots, "Time slots")->required();
  mem->add_option("--z", mem_z, "Factor count");
  mem->callback([&] {
    const std::uint64_t bytes =
        estimate_memory_bytes(mem_users, mem_locations, mem_slots, mem_trim.cfg, mem_z);
    std::cout << bytes << " bytes (" << std::setprecision(3)
              << static_cast<double>(bytes) / 1e9 << " GB)\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // 1 = usage error
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;  // runtime failure
  }
}
