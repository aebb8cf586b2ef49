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

#include <hdf5.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "fluctinit/datasets.hpp"
#include "fluctinit/error.hpp"

using namespace fluctinit;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fluctinit_tests";
  fs::create_directories(dir);
  return dir / name;
}

struct ShdSample {
  std::vector<float> times_s;
  std::vector<std::uint16_t> units;
  std::uint16_t label;
};

// Writes a file with the layout of the published SHD archives.
void write_shd(const fs::path& path, const std::vector<ShdSample>& samples, bool with_group = true) {
  const hid_t file = H5Fcreate(path.string().c_str(), H5F_ACC_TRUNC, H5P_DEFAULT, H5P_DEFAULT);
  const hsize_t n = samples.size();
  const hid_t space = H5Screate_simple(1, &n, nullptr);
  if (with_group) {
    const hid_t group = H5Gcreate2(file, "spikes", H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
    std::vector<hvl_t> times(n), units(n);
    for (std::size_t s = 0; s < n; ++s) {
      times[s] = {samples[s].times_s.size(), const_cast<float*>(samples[s].times_s.data())};
      units[s] = {samples[s].units.size(), const_cast<std::uint16_t*>(samples[s].units.data())};
    }
    const hid_t tf = H5Tvlen_create(H5T_NATIVE_FLOAT);
    const hid_t tu = H5Tvlen_create(H5T_NATIVE_UINT16);
    const hid_t dt = H5Dcreate2(group, "times", tf, space, H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
    H5Dwrite(dt, tf, H5S_ALL, H5S_ALL, H5P_DEFAULT, times.data());
    const hid_t du = H5Dcreate2(group, "units", tu, space, H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
    H5Dwrite(du, tu, H5S_ALL, H5S_ALL, H5P_DEFAULT, units.data());
    H5Dclose(dt);
    H5Dclose(du);
    H5Tclose(tf);
    H5Tclose(tu);
    H5Gclose(group);
  }
  std::vector<std::uint16_t> labels;
  for (const auto& s : samples) labels.push_back(s.label);
  const hid_t dl = H5Dcreate2(file, "labels", H5T_STD_U16LE, space, H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
  H5Dwrite(dl, H5T_NATIVE_UINT16, H5S_ALL, H5S_ALL, H5P_DEFAULT, labels.data());
  H5Dclose(dl);
  H5Sclose(space);
  H5Fclose(file);
}

SpikeBatch two_samples() {
  SpikeBatch b;
  b.n_units = 3;
  b.duration_ms = 5.0f;
  b.n_classes = 2;
  b.samples = {{{0, 0.0f}, {1, 1.5f}, {1, 1.9f}, {2, 4.5f}}, {{2, 2.0f}}};
  b.labels = {0, 1};
  return b;
}

}  // namespace

TEST_SUITE("datasets") {
  TEST_CASE("randman shape and rate") {
    RandmanConfig rc;
    rc.classes = 4;
    rc.samples_per_class = 25;
    rc.n_units = 20;
    const SpikeBatch b = generate_randman(rc);
    CHECK(b.size() == 100);
    CHECK(b.n_classes == 4);
    CHECK(b.duration_ms == 200.0f);
    for (const auto& s : b.samples) {
      REQUIRE(s.size() == 20);
      std::set<std::uint32_t> units;
      for (const auto& e : s) {
        units.insert(e.unit);
        CHECK(e.time_ms >= 0.0f);
        CHECK(e.time_ms < 100.0f);
      }
      CHECK(units.size() == 20);
      CHECK(std::is_sorted(s.begin(), s.end(), [](auto& a, auto& c) { return a.time_ms < c.time_ms; }));
    }
    CHECK(b.mean_rate_hz() == doctest::Approx(5.0));
    std::vector<std::size_t> per_class(4);
    for (auto l : b.labels) ++per_class[l];
    for (auto c : per_class) CHECK(c == 25);
  }

  TEST_CASE("randman is deterministic in its seed") {
    RandmanConfig rc;
    rc.classes = 2;
    rc.samples_per_class = 5;
    CHECK(generate_randman(rc) == generate_randman(rc));
    RandmanConfig other = rc;
    other.seed = 43;
    CHECK_FALSE(generate_randman(rc) == generate_randman(other));
  }

  TEST_CASE("randman maps are smooth and normalized") {
    for (std::uint32_t dim : {1u, 2u}) {
      RandmanConfig rc;
      rc.dim = dim;
      const RandmanManifold f(rc, 3);
      std::mt19937_64 rng(1);
      std::uniform_real_distribution<double> u(0.0, 1.0 - 1e-3);
      for (int k = 0; k < 200; ++k) {
        std::vector<double> x(dim), y(dim);
        for (std::uint32_t d = 0; d < dim; ++d) x[d] = u(rng);
        y = x;
        y[0] += 1e-3;
        for (std::uint32_t j = 0; j < rc.n_units; j += 5) {
          const double a = f(j, x);
          CHECK(a >= -1e-9);
          CHECK(a <= 1.0 + 1e-9);
          // Lipschitz bound from the harmonic sum: Σ 2πk k^-α / range
          CHECK(std::abs(f(j, y) - a) < 60.0 * 1e-3);
        }
      }
    }
  }

  TEST_CASE("poisson rate and variability") {
    const SpikeBatch b = generate_poisson(1000, 10.0, 1000.0, 2.0, 5);
    CHECK(b.mean_rate_hz() == doctest::Approx(10.0).epsilon(0.05));
    std::vector<double> counts(1000, 0.0);
    for (const auto& e : b.samples[0]) counts[e.unit] += 1.0;
    double mean = 0, var = 0;
    for (double c : counts) mean += c / 1000.0;
    for (double c : counts) var += (c - mean) * (c - mean) / 999.0;
    CHECK(var / mean == doctest::Approx(1.0).epsilon(0.15));
    CHECK(generate_poisson(10, 0.0, 100.0, 2.0, 1).samples[0].empty());
    CHECK(generate_poisson(5, 20.0, 100.0, 2.0, 9, 3) == generate_poisson(5, 20.0, 100.0, 2.0, 9, 3));
    CHECK_THROWS_AS(generate_poisson(5, -1.0, 100.0, 2.0, 1), InvalidArgument);
  }

  TEST_CASE("binning") {
    const SpikeBatch b = two_samples();
    const DenseSpikes e = bin_events(b, 2.0);
    CHECK(e.n_steps == 3);
    CHECK(e.at(0, 0, 0) == 1);
    CHECK(e.at(0, 0, 1) == 1);  // 1.5 and 1.9 share bin 0
    CHECK(e.at(0, 2, 2) == 1);
    CHECK(e.at(1, 1, 2) == 1);  // 2.0 starts bin 1
    CHECK(e.total() == 4);
    const DenseSpikes c = bin_counts(b, 2.0);
    CHECK(c.at(0, 0, 1) == 2);
    CHECK(c.total() == 5);
  }

  TEST_CASE("unbin then bin is the identity on binned data") {
    RandmanConfig rc;
    rc.samples_per_class = 3;
    const DenseSpikes d = bin_events(generate_randman(rc), 2.0);
    const DenseSpikes again = bin_events(unbin(d, rc.classes), 2.0);
    CHECK(again.data == d.data);
    CHECK(again.labels == d.labels);
    CHECK(again.n_steps == d.n_steps);
  }

  TEST_CASE("input steps layout") {
    const DenseSpikes e = bin_events(two_samples(), 2.0);
    const std::vector<std::size_t> idx = {1, 0};
    const auto x = input_steps(e, idx);
    REQUIRE(x.size() == 3);
    CHECK(x[1](2, 0) == 1.0);
    CHECK(x[0](1, 1) == 1.0);
    CHECK(x[0].col(0).isZero());
  }

  TEST_CASE("spike-pack round trip") {
    const fs::path p = temp_file("roundtrip.spkp");
    const SpikeBatch b = two_samples();
    write_spikepack(p, b);
    CHECK(read_spikepack(p) == b);
    SpikeBatch empty;
    empty.n_units = 7;
    empty.duration_ms = 10.0f;
    write_spikepack(p, empty);
    CHECK(fs::file_size(p) == 24);
    CHECK(read_spikepack(p) == empty);
  }

  TEST_CASE("spike-pack rejects malformed files") {
    const fs::path p = temp_file("bad.spkp");
    SpikeBatch empty;
    empty.n_units = 1;
    empty.duration_ms = 1.0f;
    write_spikepack(p, empty);
    fs::resize_file(p, 21);
    CHECK_THROWS_WITH_AS(read_spikepack(p), "spike-pack: truncated file", FormatError);
    {
      std::ofstream out(p, std::ios::binary);
      out << "NOPE0000000000000000000000";
    }
    CHECK_THROWS_WITH_AS(read_spikepack(p), "spike-pack: bad magic", FormatError);
    write_spikepack(p, two_samples());
    {
      std::ofstream out(p, std::ios::binary | std::ios::app);
      out << 'x';
    }
    CHECK_THROWS_WITH_AS(read_spikepack(p), "spike-pack: trailing bytes", FormatError);
    SpikeBatch bad = two_samples();
    bad.samples[0][0].unit = 3;
    CHECK_THROWS_AS(write_spikepack(p, bad), FormatError);
  }

  TEST_CASE("shd hdf5 reader") {
    const fs::path p = temp_file("mini_shd.h5");
    write_shd(p, {{{0.1f, 0.25f, 0.8f}, {3, 699, 5}, 4}, {{}, {}, 19}, {{0.0005f}, {0}, 0}});
    const SpikeBatch b = load_shd(p, 700.0);
    REQUIRE(b.size() == 3);
    CHECK(b.n_units == 700);
    CHECK(b.n_classes == 20);
    CHECK(b.duration_ms == 700.0f);
    CHECK(b.labels == std::vector<std::uint32_t>{4, 19, 0});
    REQUIRE(b.samples[0].size() == 2);  // the event at 800 ms is spliced off
    CHECK(b.samples[0][0].unit == 3);
    CHECK(b.samples[0][0].time_ms == doctest::Approx(100.0));
    CHECK(b.samples[0][1].unit == 699);
    CHECK(b.samples[1].empty());
    CHECK(b.samples[2][0].time_ms == doctest::Approx(0.5));
    CHECK(load_shd(p, 200.0).samples[0].size() == 1);

    const fs::path packed = temp_file("mini_shd.spkp");
    write_spikepack(packed, b);
    CHECK(load_shd(packed, 700.0) == b);
  }

  TEST_CASE("shd reader errors") {
    const fs::path p = temp_file("nogroup.h5");
    write_shd(p, {{{0.1f}, {1}, 0}}, false);
    CHECK_THROWS_WITH_AS(load_shd(p), "shd: missing group spikes", FormatError);
    const fs::path q = temp_file("range.h5");
    write_shd(q, {{{0.1f}, {800}, 0}});
    CHECK_THROWS_AS(load_shd(q), FormatError);
    CHECK_THROWS_AS(load_shd(temp_file("does_not_exist.h5")), Error);
  }

  TEST_CASE("shuffled split") {
    const Split s = shuffled_split(101, 0.1, 7);
    CHECK(s.first.size() == 10);
    CHECK(s.second.size() == 91);
    std::set<std::size_t> all(s.first.begin(), s.first.end());
    all.insert(s.second.begin(), s.second.end());
    CHECK(all.size() == 101);
    CHECK(shuffled_split(101, 0.1, 7).first == s.first);
    CHECK_FALSE(shuffled_split(101, 0.1, 8).first == s.first);
  }
}
