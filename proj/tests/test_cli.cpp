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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "fluctinit/cli.hpp"
#include "fluctinit/weights_io.hpp"

using namespace fluctinit;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = run_cli(args, out, err);
  return {status, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fluctinit_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kTinyTrain = R"(# small randman run
[dataset]
kind = randman
classes = 2
samples_per_class = 20
units = 10
t_active_ms = 40
t_pad_ms = 10
valid_fraction = 0.25

[network]
hidden = 8

[training]
epochs = 2
batch_size = 10
eta = 0.01
workers = 2
)";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("init-report with shd defaults") {
    const fs::path dir = fresh_dir("init_report");
    const Run r = run({"init-report", "-s", "dataset.kind=shd", "-o", dir.string()});
    REQUIRE(r.status == 0);
    std::smatch m;
    const std::regex re(R"(block L0\.ff \[128x700\].*sigma_w = ([0-9.eE+-]+))");
    REQUIRE(std::regex_search(r.out, m, re));
    const double sigma = std::stod(m[1]);
    CHECK(sigma >= 0.21);
    CHECK(sigma <= 0.23);
    CHECK(r.out.find("mean_driven_fraction") != std::string::npos);
    CHECK(slurp(dir / "init_report.txt") == r.out);
    CHECK(fs::exists(dir / "manifest.txt"));
  }

  TEST_CASE("unknown keys fail with one error line") {
    const Run r = run({"init-report", "-s", "bogus.key=1", "-o", fresh_dir("unknown").string()});
    CHECK(r.status == 1);
    CHECK(r.err == "error: config: unknown key bogus.key\n");
    CHECK(run({"no-such-command"}).status == 2);
  }

  TEST_CASE("overrides beat file values") {
    const fs::path dir = fresh_dir("override");
    {
      std::ofstream f(dir / "base.ini");
      f << "[network]\nhidden = 32\ntau_mem_ms = 25\n[init]\nsigma_u = 0.5\n";
    }
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"network.hidden", "16"}, {"network.tau_mem_ms", "30"}, {"init.sigma_u", "0.75"}};
    for (const auto& [key, value] : cases) {
      const Run r = run({"init-report", "-c", (dir / "base.ini").string(), "-s", key + "=" + value, "-o",
                         (dir / "out").string()});
      REQUIRE(r.status == 0);
      const Config echo = Config::from_file(dir / "out" / "config.ini");
      CHECK(echo.get(key) == value);
    }
    const Run plain = run({"init-report", "-c", (dir / "base.ini").string(), "-o", (dir / "out").string()});
    REQUIRE(plain.status == 0);
    CHECK(Config::from_file(dir / "out" / "config.ini").get("network.hidden") == "32");
  }

  TEST_CASE("config echo round trip") {
    Config c = Config::from_string(kTinyTrain);
    c.set("init.xi=2.5");
    const Config back = Config::from_string(c.to_string());
    CHECK(back.to_string() == c.to_string());
    CHECK(back.get_size_list("network.hidden") == std::vector<std::size_t>{8});
    CHECK_THROWS(Config::from_string("[network]\nhidden\n"));
    CHECK_THROWS(Config::from_string("hidden = 3\n"));
  }

  TEST_CASE("train is reproducible from the same seed and from its echo") {
    const fs::path dir = fresh_dir("train");
    {
      std::ofstream f(dir / "tiny.ini");
      f << kTinyTrain;
    }
    const Run a = run({"train", "-c", (dir / "tiny.ini").string(), "-o", (dir / "a").string()});
    REQUIRE(a.status == 0);
    const Run b = run({"train", "-c", (dir / "tiny.ini").string(), "-o", (dir / "b").string()});
    REQUIRE(b.status == 0);
    const Run c = run({"train", "-c", (dir / "a" / "config.ini").string(), "-o", (dir / "c").string()});
    REQUIRE(c.status == 0);
    const std::string log = slurp(dir / "a" / "training_log.csv");
    CHECK(log.size() > 100);
    CHECK(log == slurp(dir / "b" / "training_log.csv"));
    CHECK(log == slurp(dir / "c" / "training_log.csv"));
    CHECK(slurp(dir / "a" / "weights.wgts") == slurp(dir / "b" / "weights.wgts"));
    const auto blocks = read_weights(dir / "a" / "weights.wgts");
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].name == "L0.ff");
  }

  TEST_CASE("diagnose on a zero-weight network") {
    const fs::path dir = fresh_dir("diagnose");
    Config cfg;
    cfg.set("dataset.kind=poisson");
    cfg.set("dataset.units=20");
    cfg.set("network.hidden=6");
    const Network net = build_network(cfg, 20, 1000.0, 1);
    write_weights(dir / "zero.wgts", net);
    const Run r = run({"diagnose", "-s", "dataset.kind=poisson", "-s", "dataset.units=20", "-s", "network.hidden=6",
                       "-s", "init.weights=" + (dir / "zero.wgts").string(), "-o", dir.string()});
    REQUIRE(r.status == 0);
    std::istringstream in(slurp(dir / "membrane_stats.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "population,neuron,mu_hat,sigma_hat");
    int rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      CHECK(line.substr(line.size() - 4) == ",0,0");
    }
    CHECK(rows == 7);
    CHECK(fs::exists(dir / "spiketrain_stats.csv"));
    CHECK(fs::exists(dir / "predictions.csv"));
  }

  TEST_CASE("weights file shape mismatch is reported") {
    const fs::path dir = fresh_dir("mismatch");
    Config cfg;
    cfg.set("network.hidden=6");
    write_weights(dir / "w.wgts", build_network(cfg, 20, 200.0, 10));
    const Run r = run({"simulate", "-s", "dataset.samples_per_class=2", "-s",
                       "init.weights=" + (dir / "w.wgts").string(), "-o", dir.string()});
    CHECK(r.status == 1);
    CHECK(r.err.rfind("error: ", 0) == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  }
}
