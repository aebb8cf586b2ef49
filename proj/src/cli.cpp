// Copyright 2026 The fluctinit Authors
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

#include "fluctinit/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "fluctinit/diagnostics.hpp"
#include "fluctinit/error.hpp"
#include "fluctinit/simulate.hpp"
#include "fluctinit/version.hpp"
#include "fluctinit/weights_io.hpp"

namespace fluctinit {

namespace fs = std::filesystem;

namespace {

constexpr double kShdRateHz = 15.8;
constexpr std::size_t kShdUnits = 700;

RandmanConfig randman_config(const Config& cfg) {
  RandmanConfig r;
  r.classes = static_cast<std::uint32_t>(cfg.get_size("dataset.classes"));
  r.samples_per_class = static_cast<std::uint32_t>(cfg.get_size("dataset.samples_per_class"));
  r.n_units = static_cast<std::uint32_t>(cfg.get_size("dataset.units"));
  r.dim = static_cast<std::uint32_t>(cfg.get_size("dataset.dim"));
  r.alpha = cfg.get_double("dataset.alpha");
  r.harmonics = static_cast<std::uint32_t>(cfg.get_size("dataset.harmonics"));
  r.t_active_ms = cfg.get_double("dataset.t_active_ms");
  r.t_pad_ms = cfg.get_double("dataset.t_pad_ms");
  r.seed = cfg.get_u64("dataset.seed");
  return r;
}

const std::string& dataset_kind(const Config& cfg) {
  const std::string& k = cfg.get("dataset.kind");
  if (k != "randman" && k != "shd" && k != "poisson" && k != "spikepack") {
    throw Error("config: dataset.kind must be randman, shd, poisson or spikepack, got '" + k + "'");
  }
  return k;
}

InitStrategy parse_strategy(const std::string& s) {
  if (s == "fluctuation") return InitStrategy::Fluctuation;
  if (s == "kaiming") return InitStrategy::Kaiming;
  if (s == "dalian-exp") return InitStrategy::DalianExponential;
  if (s == "dalian-lognormal") return InitStrategy::DalianLogNormal;
  throw Error("config: init.strategy must be fluctuation, kaiming, dalian-exp or dalian-lognormal, got '" + s + "'");
}

fs::path output_dir(const Config& cfg) {
  fs::path dir = cfg.get("output.dir");
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

void write_run_files(const Config& cfg, const fs::path& dir, const std::string& command, double seconds) {
  auto echo = open_out(dir / "config.ini");
  cfg.write(echo);
  auto m = open_out(dir / "manifest.txt");
  m << "command = " << command << '\n'
    << "version = " << kVersion << '\n'
    << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n'
    << "config = config.ini\n"
    << "dataset_seed = " << cfg.get("dataset.seed") << '\n'
    << "init_seed = " << cfg.get("init.seed") << '\n'
    << "training_seed = " << cfg.get("training.seed") << '\n'
    << "wall_time_s = " << seconds << '\n';
}

// Network with initialized (or loaded) weights.
Network prepared_network(const Config& cfg, const DatasetShape& shape, std::size_t n_outputs, InitReport* report) {
  Network net = build_network(cfg, shape.n_units, shape.duration_ms, n_outputs);
  const InitConfig ic = init_config(cfg, shape.rate_hz);
  if (cfg.has("init.weights")) {
    load_weights_into(net, cfg.get("init.weights"));
    if (report) *report = plan_initialization(net, ic);
  } else {
    const InitReport r = initialize_network(net, ic);
    if (report) *report = r;
  }
  return net;
}

DatasetShape shape_of(const SpikeBatch& batch) {
  return {batch.n_units, batch.duration_ms, batch.mean_rate_hz()};
}

int cmd_gen_randman(const Config& cfg, std::ostream& out) {
  const SpikeBatch batch = generate_randman(randman_config(cfg));
  const fs::path dir = output_dir(cfg);
  write_spikepack(dir / "randman.spkp", batch);
  out << "wrote " << (dir / "randman.spkp").string() << ": " << batch.size() << " samples, " << batch.n_units
      << " units, " << batch.n_classes << " classes, rate " << batch.mean_rate_hz() << " Hz\n";
  return 0;
}

int cmd_convert_shd(const Config& cfg, std::ostream& out) {
  if (!cfg.has("dataset.path")) throw Error("config: dataset.path is required for convert-shd");
  const SpikeBatch batch = load_shd(cfg.get("dataset.path"), cfg.get_double("dataset.splice_ms"));
  const fs::path dir = output_dir(cfg);
  const fs::path target = dir / (fs::path(cfg.get("dataset.path")).stem().string() + ".spkp");
  write_spikepack(target, batch);
  out << "wrote " << target.string() << ": " << batch.size() << " samples, " << batch.n_units << " units, "
      << batch.n_classes << " classes, rate " << batch.mean_rate_hz() << " Hz\n";
  return 0;
}

int cmd_init_report(const Config& cfg, std::ostream& out) {
  const DatasetShape shape = dataset_shape(cfg);
  std::size_t classes = 10;
  const std::string& kind = dataset_kind(cfg);
  if (kind == "randman") classes = cfg.get_size("dataset.classes");
  if (kind == "shd") classes = 20;
  if (kind == "poisson") classes = 1;
  Network net = build_network(cfg, shape.n_units, shape.duration_ms, classes);
  const InitReport report = plan_initialization(net, init_config(cfg, shape.rate_hz));
  out << "inputs = " << shape.n_units << "\nnu_hz = " << shape.rate_hz << '\n';
  write_init_report(out, report);
  const fs::path dir = output_dir(cfg);
  auto file = open_out(dir / "init_report.txt");
  file << "inputs = " << shape.n_units << "\nnu_hz = " << shape.rate_hz << '\n';
  write_init_report(file, report);
  return 0;
}

int cmd_simulate(const Config& cfg, std::ostream& out) {
  const SpikeBatch batch = load_dataset(cfg);
  const Network net = prepared_network(cfg, shape_of(batch), batch.n_classes, nullptr);
  const DenseSpikes dense = bin_events(batch, cfg.get_double("dataset.dt_ms"));
  RecordFlags rec;
  rec.membrane = cfg.get_bool("output.record_membrane");
  const auto result = simulate(net, dense, rec, {}, cfg.get_size("training.workers"));
  const fs::path dir = output_dir(cfg);
  auto rates = open_out(dir / "layer_rates.csv");
  rates << "layer,rate_hz\n";
  for (std::size_t k = 0; k < result.layer_rates_hz.size(); ++k) {
    rates << k << ',' << result.layer_rates_hz[k] << '\n';
    out << "layer " << k << " rate " << result.layer_rates_hz[k] << " Hz\n";
  }
  if (rec.membrane) {
    auto mem = open_out(dir / "membrane.csv");
    write_membrane_csv(mem, net, result);
  }
  return 0;
}

int cmd_train(const Config& cfg, std::ostream& out) {
  const SpikeBatch batch = load_dataset(cfg);
  Network net = prepared_network(cfg, shape_of(batch), batch.n_classes, nullptr);
  const DenseSpikes dense = bin_events(batch, cfg.get_double("dataset.dt_ms"));
  const Split split = shuffled_split(batch.size(), cfg.get_double("dataset.valid_fraction"),
                                     cfg.get_u64("dataset.split_seed"));
  const DenseSpikes train_set = bin_events(batch.subset(split.second), dense.dt_ms);
  const DenseSpikes valid_set = bin_events(batch.subset(split.first), dense.dt_ms);
  const fs::path dir = output_dir(cfg);
  const TrainingLog log = train(net, train_set, valid_set, train_config(cfg), [&](const EpochRecord& r) {
    out << "epoch " << r.epoch << ' ' << r.phase << ' ' << r.split << " loss " << r.loss << " acc " << r.accuracy
        << '\n';
  });
  auto csv = open_out(dir / "training_log.csv");
  write_training_log_csv(csv, log, net.n_hidden_layers());
  write_weights(dir / "weights.wgts", net);
  return 0;
}

int cmd_diagnose(const Config& cfg, std::ostream& out) {
  SpikeBatch batch = load_dataset(cfg);
  const std::size_t limit = cfg.get_size("diagnose.samples");
  if (limit > 0 && limit < batch.size()) {
    std::vector<std::size_t> idx(limit);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    batch = batch.subset(idx);
  }
  InitReport report;
  const Network net = prepared_network(cfg, shape_of(batch), std::max<std::uint32_t>(batch.n_classes, 1), &report);
  const DenseSpikes counts = bin_counts(batch, cfg.get_double("dataset.dt_ms"));
  std::size_t warmup = cfg.get_size("diagnose.warmup_steps");
  if (warmup == 0) warmup = default_warmup_steps(net);
  const auto stats = measure_membrane_stats(net, counts, warmup);
  const fs::path dir = output_dir(cfg);
  {
    auto f = open_out(dir / "membrane_stats.csv");
    write_membrane_stats_csv(f, stats);
    auto h = open_out(dir / "membrane_hist.csv");
    write_histogram_csv(h, stats);
  }
  {
    auto f = open_out(dir / "predictions.csv");
    f << "population,mu_u,sigma_u,mean_driven_fraction,measured_mu_mean,measured_sigma_mean,measured_mean_driven\n";
    f.precision(10);
    for (const auto& p : report.populations) {
      for (const auto& s : stats) {
        if (s.population != p.population) continue;
        const double driven = s.mu_hat.size() > 0
                                  ? static_cast<double>((s.mu_hat.array() >= cfg.get_double("network.theta")).count()) /
                                        static_cast<double>(s.mu_hat.size())
                                  : 0.0;
        f << p.population << ',' << p.predicted.mu_u << ',' << p.predicted.sigma_u << ',' << p.mean_driven_fraction
          << ',' << s.mu_hat.mean() << ',' << s.sigma_hat.mean() << ',' << driven << '\n';
        out << p.population << ": predicted sigma_u " << p.predicted.sigma_u << ", measured mean sigma_hat "
            << s.sigma_hat.mean() << '\n';
      }
    }
  }
  {
    const DenseSpikes dense = bin_events(batch, cfg.get_double("dataset.dt_ms"));
    RecordFlags rec;
    rec.spikes = true;
    const auto result = simulate(net, dense, rec, {}, cfg.get_size("training.workers"));
    auto f = open_out(dir / "spiketrain_stats.csv");
    f << "population,statistic,index,value\n";
    for (std::size_t p = 0; p < net.populations().size(); ++p) {
      if (!net.populations()[p].spiking) continue;
      std::vector<Eigen::MatrixXd> rasters;
      for (const auto& m : result.spikes[p]) rasters.push_back(m.rightCols(m.cols() - 1));
      write_spiketrain_csv(f, net.populations()[p].name, spiketrain_stats(rasters, net.dt()));
    }
  }
  return 0;
}

}  // namespace

SpikeBatch load_dataset(const Config& cfg) {
  const std::string& kind = dataset_kind(cfg);
  if (kind == "randman") return generate_randman(randman_config(cfg));
  if (kind == "poisson") {
    return generate_poisson(static_cast<std::uint32_t>(cfg.get_size("dataset.units")), cfg.get_double("dataset.nu_hz"),
                            cfg.get_double("dataset.duration_ms"), cfg.get_double("dataset.dt_ms"),
                            cfg.get_u64("dataset.seed"), cfg.get_size("dataset.samples"));
  }
  if (!cfg.has("dataset.path")) throw Error("config: dataset.path is required for dataset.kind = " + kind);
  if (kind == "shd") return load_shd(cfg.get("dataset.path"), cfg.get_double("dataset.splice_ms"));
  return read_spikepack(cfg.get("dataset.path"));
}

DatasetShape dataset_shape(const Config& cfg) {
  const std::string& kind = dataset_kind(cfg);
  if (kind == "randman") {
    const RandmanConfig r = randman_config(cfg);
    const double duration = r.t_active_ms + r.t_pad_ms;
    return {r.n_units, duration, 1000.0 / duration};
  }
  if (kind == "poisson") {
    return {cfg.get_size("dataset.units"), cfg.get_double("dataset.duration_ms"), cfg.get_double("dataset.nu_hz")};
  }
  if (kind == "shd" && !cfg.has("dataset.path")) return {kShdUnits, cfg.get_double("dataset.splice_ms"), kShdRateHz};
  return shape_of(load_dataset(cfg));
}

Network build_network(const Config& cfg, std::size_t n_inputs, double duration_ms, std::size_t n_outputs) {
  const double dt = cfg.get_double("dataset.dt_ms") * 1e-3;
  const double theta = cfg.get_double("network.theta");
  const NeuronParams hidden{cfg.get_double("network.tau_mem_ms") * 1e-3, cfg.get_double("network.tau_syn_ms") * 1e-3,
                            theta, dt};
  std::vector<LayerConfig> layers;
  for (std::size_t n : cfg.get_size_list("network.hidden")) {
    LayerConfig lc;
    lc.n = n;
    lc.neuron = hidden;
    lc.recurrent = cfg.get_bool("network.recurrent");
    lc.skip_to_readout = cfg.get_bool("network.skip");
    if (cfg.get_bool("network.dale")) {
      DaleConfig d;
      d.n_i = cfg.get_size("network.n_inh");
      if (d.n_i == 0) d.n_i = n / 5;
      if (d.n_i == 0 || d.n_i >= n) throw Error("config: network.n_inh must leave both populations non-empty");
      d.n_e = n - d.n_i;
      d.exc = hidden;
      d.inh = NeuronParams{cfg.get_double("network.inh_tau_mem_ms") * 1e-3,
                           cfg.get_double("network.inh_tau_syn_ms") * 1e-3, theta, dt};
      d.exc_recurrence = cfg.get_bool("network.exc_recurrence");
      lc.dale = d;
      lc.recurrent = false;
    }
    layers.push_back(lc);
  }
  if (layers.empty()) throw Error("config: network.hidden must list at least one layer");
  LayerConfig out;
  out.kind = LayerKind::Readout;
  out.n = n_outputs;
  double tau_out = cfg.get_double("network.tau_out_ms");
  if (tau_out <= 0.0) tau_out = duration_ms;
  out.neuron = NeuronParams{tau_out * 1e-3, hidden.tau_syn, theta, dt};
  layers.push_back(out);
  return Network::build(n_inputs, layers);
}

InitConfig init_config(const Config& cfg, double dataset_rate_hz) {
  InitConfig ic;
  ic.strategy = parse_strategy(cfg.get("init.strategy"));
  const double mu = cfg.get_double("init.mu_u");
  ic.target = cfg.has("init.xi") ? FluctuationTarget::with_xi(cfg.get_double("init.xi"), mu)
                                 : FluctuationTarget::with_sigma(cfg.get_double("init.sigma_u"), mu);
  ic.target.alpha = cfg.get_double("init.alpha");
  ic.target.theta = cfg.get_double("network.theta");
  if (cfg.has("init.readout_sigma_u")) {
    FluctuationTarget r = FluctuationTarget::with_sigma(cfg.get_double("init.readout_sigma_u"), 0.0);
    r.theta = ic.target.theta;
    ic.readout_target = r;
  }
  const double nu = cfg.get_double("init.nu_hz");
  ic.nu_hz = nu > 0.0 ? nu : dataset_rate_hz;
  ic.seed = cfg.get_u64("init.seed");
  return ic;
}

TrainConfig train_config(const Config& cfg) {
  TrainConfig t;
  t.epochs = cfg.get_size("training.epochs");
  t.batch_size = cfg.get_size("training.batch_size");
  const std::string& opt = cfg.get("training.optimizer");
  if (opt == "smorms3") {
    t.optimizer = OptimizerKind::Smorms3;
  } else if (opt == "sgd") {
    t.optimizer = OptimizerKind::Sgd;
  } else {
    throw Error("config: training.optimizer must be smorms3 or sgd, got '" + opt + "'");
  }
  t.eta = cfg.get_double("training.eta");
  t.upper = {cfg.get_double("training.lambda_upper"), cfg.get_double("training.v_upper")};
  t.use_upper = t.upper.strength > 0.0;
  t.lower = {cfg.get_double("training.lambda_lower"), cfg.get_double("training.v_lower")};
  t.priming_epochs = cfg.get_size("training.priming_epochs");
  t.ongoing_homeostasis = cfg.get_bool("training.ongoing_homeostasis");
  t.surrogate.beta = cfg.get_double("training.beta");
  t.surrogate.rescaled = cfg.get_bool("training.rescaled_surrogate");
  t.seed = cfg.get_u64("training.seed");
  t.workers = std::max<std::size_t>(1, cfg.get_size("training.workers"));
  return t;
}

void write_init_report(std::ostream& out, const InitReport& report) {
  const auto old = out.precision(8);
  for (const auto& b : report.blocks) {
    out << "block " << b.connection << " [" << b.spec.rows << "x" << b.spec.cols << "] " << b.spec.describe()
        << " mean_w = " << b.spec.mean() << " sigma_w = "
        << std::sqrt(std::max(0.0, b.spec.second_moment() - b.spec.mean() * b.spec.mean())) << '\n';
  }
  for (const auto& p : report.populations) {
    out << "population " << p.population << " eps_bar = " << p.eps.eps_bar << " eps_hat = " << p.eps.eps_hat
        << " mu_u = " << p.predicted.mu_u << " sigma_u = " << p.predicted.sigma_u
        << " mean_driven_fraction = " << p.mean_driven_fraction << '\n';
  }
  out.precision(old);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Initialize, simulate and train leaky integrate-and-fire networks"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  const char* names[][2] = {{"gen-randman", "Generate a Randman dataset as a spike-pack"},
                            {"convert-shd", "Convert an SHD HDF5 file to a spike-pack"},
                            {"init-report", "Print initialization parameters and predictions"},
                            {"simulate", "Simulate the initialized network on the dataset"},
                            {"train", "Train with surrogate gradients"},
                            {"diagnose", "Measure membrane and spike statistics"}};
  for (const auto& [name, help] : names) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "Config file ([section] key = value)");
    sub->add_option("-s,--set", overrides, "Override section.key=value (repeatable)");
    sub->add_option("-o,--out", out_dir, "Output directory (overrides output.dir)");
  }
  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    Config cfg = config_path.empty() ? Config() : Config::from_file(config_path);
    for (const auto& o : overrides) cfg.set(o);
    if (!out_dir.empty()) cfg.set("output.dir", out_dir);
    const std::string command = app.get_subcommands().front()->get_name();
    const auto start = std::chrono::steady_clock::now();
    int status = 0;
    if (command == "gen-randman") status = cmd_gen_randman(cfg, out);
    if (command == "convert-shd") status = cmd_convert_shd(cfg, out);
    if (command == "init-report") status = cmd_init_report(cfg, out);
    if (command == "simulate") status = cmd_simulate(cfg, out);
    if (command == "train") status = cmd_train(cfg, out);
    if (command == "diagnose") status = cmd_diagnose(cfg, out);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_run_files(cfg, output_dir(cfg), command, seconds);
    return status;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg) {
      if (c == '\n') c = ' ';
    }
    err << "error: " << msg << '\n';
    return 1;
  }
}

}  // namespace fluctinit
