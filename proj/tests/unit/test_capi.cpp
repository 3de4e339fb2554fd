// Copyright 2026 The mapcast Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Exercises the shared library through its C header only.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mapcast/mapcast.h"

namespace fs = std::filesystem;

namespace {

struct Lines {
  std::vector<std::string> lines;

  static void collect(const char* line, void* user) {
    static_cast<Lines*>(user)->lines.emplace_back(line);
  }
  bool contains(const std::string& s) const {
    for (const auto& l : lines) {
      if (l.find(s) != std::string::npos) return true;
    }
    return false;
  }
};

class Config {
 public:
  Config() { REQUIRE(mapcast_config_create(&cfg_) == MAPCAST_OK); }
  ~Config() { mapcast_config_destroy(cfg_); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;

  Config& set(const char* key, const std::string& value) {
    const auto st = mapcast_config_set(cfg_, key, value.c_str());
    INFO(mapcast_last_error());
    REQUIRE(st == MAPCAST_OK);
    return *this;
  }
  mapcast_config* get() const { return cfg_; }

 private:
  mapcast_config* cfg_ = nullptr;
};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mapcast_capi" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t line_count(const fs::path& p) {
  std::size_t n = 0;
  for (char c : slurp(p)) n += c == '\n';
  return n;
}

// A 25 Hz recording whose value is f(sample index).
template <typename F>
void write_recording(const fs::path& path, std::size_t samples, F f) {
  std::ofstream out(path);
  out << "t,aop_mmhg\n";
  for (std::size_t i = 0; i < samples; ++i) out << i << ',' << f(i) << '\n';
}

// Small quiet corpus settings shared by several cases.
void small_corpus(Config& c) {
  c.set("synth.count", "3").set("synth.duration_s", "2400").set("seed", "21");
}

}  // namespace

TEST_CASE("configuration errors") {
  Config c;
  CHECK(mapcast_config_set(c.get(), "no.such.key", "1") == MAPCAST_ERR_USAGE);
  CHECK(std::string(mapcast_last_error()).find("no.such.key") != std::string::npos);
  CHECK(mapcast_config_set(c.get(), "model.seed", "1") == MAPCAST_ERR_USAGE);  // derived
  CHECK(mapcast_config_set(nullptr, "seed", "1") == MAPCAST_ERR_USAGE);

  c.set("train.batch_size", "lots");
  std::size_t needed = 0;
  CHECK(mapcast_config_resolved(c.get(), nullptr, 0, &needed) == MAPCAST_ERR_USAGE);

  Config ok;
  ok.set("seed", "18446744073709551615");
  REQUIRE(mapcast_config_resolved(ok.get(), nullptr, 0, &needed) == MAPCAST_OK);
  std::string text(needed, '\0');
  REQUIRE(mapcast_config_resolved(ok.get(), text.data(), text.size(), &needed) == MAPCAST_OK);
  CHECK(text.find("seed = 18446744073709551615") != std::string::npos);
  CHECK(text.find("train.learning_rate = 0.001") != std::string::npos);
  CHECK(text.find("alert.threshold = 65") != std::string::npos);
}

TEST_CASE("synth writes the requested corpus reproducibly") {
  const auto dir = scratch("synth");
  Config c;
  c.set("synth.count", "2").set("synth.duration_s", "900").set("seed", "3");
  Lines log;
  REQUIRE(mapcast_synth(c.get(), (dir / "a").c_str(), Lines::collect, &log) == MAPCAST_OK);
  REQUIRE(mapcast_synth(c.get(), (dir / "b").c_str(), nullptr, nullptr) == MAPCAST_OK);
  std::size_t csv = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) csv += e.path().extension() == ".csv";
  CHECK(csv == 2);
  CHECK(fs::exists(dir / "a" / "manifest.txt"));
  CHECK(fs::exists(dir / "a" / "config.txt"));
  for (const char* f : {"rec_000.csv", "rec_001.csv", "manifest.txt"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  CHECK(log.contains("rec_001:"));
  CHECK(log.contains("root seed 3"));
}

TEST_CASE("prepare on a constant ten-minute recording") {
  const auto dir = scratch("prepare_constant");
  fs::create_directories(dir / "rec");
  write_recording(dir / "rec" / "flat.csv", 15000, [](std::size_t) { return 80.0; });
  Config c;
  Lines log;
  REQUIRE(mapcast_prepare(c.get(), (dir / "rec").c_str(), (dir / "cache").c_str(),
                          Lines::collect, &log) == MAPCAST_OK);
  CHECK(log.lines.at(1) == "I=0, D=0, S=1");
  for (const char* f : {"train.hfwc", "holdout.hfwc", "test.hfwc", "config.txt"}) {
    CHECK(fs::exists(dir / "cache" / f));
  }
}

TEST_CASE("prepare warns on a short recording and rejects malformed files") {
  const auto dir = scratch("prepare_short");
  fs::create_directories(dir / "short");
  write_recording(dir / "short" / "s.csv", 14999, [](std::size_t) { return 80.0; });
  Config c;
  Lines log;
  CHECK(mapcast_prepare(c.get(), (dir / "short").c_str(), (dir / "cache").c_str(),
                        Lines::collect, &log) == MAPCAST_OK);
  CHECK(log.contains("warning"));
  CHECK(log.contains("I=0, D=0, S=0"));

  fs::create_directories(dir / "bad");
  {
    std::ofstream out(dir / "bad" / "b.csv");
    out << "t,aop_mmhg\n0,80\n1,eighty\n";
  }
  CHECK(mapcast_prepare(c.get(), (dir / "bad").c_str(), (dir / "cache2").c_str(), nullptr,
                        nullptr) == MAPCAST_ERR_DATA);
  CHECK(std::string(mapcast_last_error()).find("b.csv") != std::string::npos);

  fs::create_directories(dir / "empty");
  CHECK(mapcast_prepare(c.get(), (dir / "empty").c_str(), (dir / "cache3").c_str(), nullptr,
                        nullptr) == MAPCAST_ERR_DATA);
}

TEST_CASE("train, eval and report through the C interface") {
  const auto dir = scratch("pipeline");
  Config c;
  small_corpus(c);
  c.set("model.architecture", "lmu").set("model.lmu_order", "8").set("model.lmu_hidden", "8");
  c.set("train.max_epochs", "2");
  const auto corpus = (dir / "corpus").string(), cache = (dir / "cache").string();
  REQUIRE(mapcast_synth(c.get(), corpus.c_str(), nullptr, nullptr) == MAPCAST_OK);
  REQUIRE(mapcast_prepare(c.get(), corpus.c_str(), cache.c_str(), nullptr, nullptr) ==
          MAPCAST_OK);

  SUBCASE("same seed twice gives identical files") {
    for (const char* run : {"m1", "m2"}) {
      const auto st = mapcast_train(c.get(), cache.c_str(), (dir / run).c_str(), 0, nullptr,
                                    nullptr, nullptr);
      INFO(mapcast_last_error());
      REQUIRE(st == MAPCAST_OK);
    }
    for (const char* f : {"history.csv", "checkpoint.hfck", "model.txt", "config.txt"}) {
      CHECK(slurp(dir / "m1" / f) == slurp(dir / "m2" / f));
    }
    CHECK(line_count(dir / "m1" / "history.csv") == 3);

    const char* models[] = {"", ""};
    const auto m1 = (dir / "m1").string(), m2 = (dir / "m2").string();
    models[0] = m1.c_str();
    models[1] = m2.c_str();
    Lines log;
    REQUIRE(mapcast_eval(c.get(), models, 2, cache.c_str(), (dir / "ev").c_str(), Lines::collect,
                         &log) == MAPCAST_OK);
    CHECK(log.contains("lmu: I="));
    CHECK(log.contains("lmu_2: I="));
    CHECK(log.contains("persistence: I="));
    // rows = models x present categories
    const auto table = slurp(dir / "ev" / "table.csv");
    std::size_t present = 0;
    for (const char* cat : {"persistence,I,", "persistence,D,", "persistence,S,",
                            "persistence,I-D-S,"}) {
      present += table.find(cat) != std::string::npos;
    }
    CHECK(present >= 2);
    CHECK(line_count(dir / "ev" / "table.csv") == 1 + 3 * present);

    const auto ev = (dir / "ev").string();
    const char* dirs[] = {ev.c_str()};
    REQUIRE(mapcast_report(c.get(), dirs, 1, (dir / "r1").c_str(), nullptr, nullptr) ==
            MAPCAST_OK);
    REQUIRE(mapcast_report(c.get(), dirs, 1, (dir / "r2").c_str(), nullptr, nullptr) ==
            MAPCAST_OK);
    CHECK(slurp(dir / "r1" / "table.csv") == slurp(dir / "ev" / "table.csv"));
    CHECK(slurp(dir / "r1" / "summary.csv") == slurp(dir / "r2" / "summary.csv"));
  }

  SUBCASE("max_epochs=0 still writes an initialized checkpoint") {
    Config z;
    small_corpus(z);
    z.set("train.max_epochs", "0");
    REQUIRE(mapcast_train(z.get(), cache.c_str(), (dir / "z").c_str(), 0, nullptr, nullptr,
                          nullptr) == MAPCAST_OK);
    CHECK(fs::file_size(dir / "z" / "checkpoint.hfck") > 100);
    CHECK(line_count(dir / "z" / "history.csv") == 1);
  }

  SUBCASE("the debug oracle scores zero everywhere") {
    Config o;
    o.set("model.architecture", "oracle").set("eval.include_persistence", "false");
    REQUIRE(mapcast_train(o.get(), cache.c_str(), (dir / "o").c_str(), 0, nullptr, nullptr,
                          nullptr) == MAPCAST_OK);
    const auto od = (dir / "o").string();
    const char* models[] = {od.c_str()};
    REQUIRE(mapcast_eval(o.get(), models, 1, cache.c_str(), (dir / "oev").c_str(), nullptr,
                         nullptr) == MAPCAST_OK);
    std::istringstream table(slurp(dir / "oev" / "table.csv"));
    std::string line;
    std::getline(table, line);
    std::size_t rows = 0;
    while (std::getline(table, line)) {
      ++rows;
      CHECK(line.find(",0,") != std::string::npos);
    }
    CHECK(rows >= 2);
  }

  SUBCASE("geometry mismatch is a data error") {
    Config g;
    small_corpus(g);
    g.set("signal.in_len", "20").set("train.max_epochs", "0");
    CHECK(mapcast_train(g.get(), cache.c_str(), (dir / "g").c_str(), 0, nullptr, nullptr,
                        nullptr) == MAPCAST_ERR_DATA);
  }

  SUBCASE("rpm models train on caches that carry rpm") {
    Config r;
    r.set("model.features", "pressure+rpm").set("train.max_epochs", "1");
    CHECK(mapcast_train(r.get(), cache.c_str(), (dir / "r").c_str(), 0, nullptr, nullptr,
                        nullptr) == MAPCAST_OK);
  }
}

TEST_CASE("a category missing from the cache leaves its rows out") {
  const auto dir = scratch("missing_category");
  fs::create_directories(dir / "rec");
  // gentle wobble, never a 10 mmHg swing, so every window is stationary
  for (int r = 0; r < 5; ++r) {
    write_recording(dir / "rec" / ("r" + std::to_string(r) + ".csv"), 25 * 1200,
                    [r](std::size_t i) { return 80.0 + r + std::sin(static_cast<double>(i) / 900.0); });
  }
  Config c;
  c.set("model.architecture", "tcn").set("train.max_epochs", "1").set("split.test_fraction", "0.4");
  const auto cache = (dir / "cache").string(), model = (dir / "m").string();
  REQUIRE(mapcast_prepare(c.get(), (dir / "rec").c_str(), cache.c_str(), nullptr, nullptr) ==
          MAPCAST_OK);
  REQUIRE(mapcast_train(c.get(), cache.c_str(), model.c_str(), 0, nullptr, nullptr, nullptr) ==
          MAPCAST_OK);
  const char* models[] = {model.c_str()};
  REQUIRE(mapcast_eval(c.get(), models, 1, cache.c_str(), (dir / "ev").c_str(), nullptr,
                       nullptr) == MAPCAST_OK);
  const auto table = slurp(dir / "ev" / "table.csv");
  CHECK(table.find(",I,") == std::string::npos);
  CHECK(table.find(",D,") == std::string::npos);
  CHECK(table.find("tcn,S,") != std::string::npos);
  CHECK(line_count(dir / "ev" / "table.csv") == 1 + 2 * 2);
}

TEST_CASE("forecast on a flat recording") {
  const auto dir = scratch("forecast");
  Config c;
  c.set("synth.count", "4").set("synth.duration_s", "1800").set("synth.pulse_pressure", "0");
  c.set("synth.drift_sd", "0").set("synth.trend_rate_per_hr", "0").set("synth.baseline_map", "80");
  c.set("model.architecture", "dnn").set("model.dnn_hidden", "16").set("train.max_epochs", "5");
  const auto corpus = (dir / "corpus").string(), cache = (dir / "cache").string();
  const auto model = (dir / "m").string(), csv = (dir / "corpus" / "rec_000.csv").string();
  REQUIRE(mapcast_synth(c.get(), corpus.c_str(), nullptr, nullptr) == MAPCAST_OK);
  REQUIRE(mapcast_prepare(c.get(), corpus.c_str(), cache.c_str(), nullptr, nullptr) == MAPCAST_OK);
  REQUIRE(mapcast_train(c.get(), cache.c_str(), model.c_str(), 0, nullptr, nullptr, nullptr) ==
          MAPCAST_OK);

  std::vector<double> values(64, 0.0);
  std::size_t count = 0;
  Lines log;
  REQUIRE(mapcast_forecast(c.get(), model.c_str(), csv.c_str(), 100, values.data(), values.size(),
                           &count, Lines::collect, &log) == MAPCAST_OK);
  CHECK(count == 30);
  CHECK(log.lines.size() == 30);  // values only, no alerts
  for (std::size_t t = 0; t < count; ++t) CHECK(std::abs(values[t] - 80.0) < 1.0);

  CHECK(mapcast_forecast(c.get(), model.c_str(), csv.c_str(), 29, values.data(), values.size(),
                         &count, nullptr, nullptr) == MAPCAST_ERR_DATA);
  CHECK(mapcast_forecast(c.get(), model.c_str(), csv.c_str(), 10000, values.data(),
                         values.size(), &count, nullptr, nullptr) == MAPCAST_ERR_DATA);

  // the model handle gives the same kind of answer as the command
  mapcast_model* handle = nullptr;
  REQUIRE(mapcast_model_load(model.c_str(), &handle) == MAPCAST_OK);
  std::size_t in_len = 0, out_len = 0;
  int rpm = -1;
  REQUIRE(mapcast_model_geometry(handle, &in_len, &out_len, &rpm) == MAPCAST_OK);
  CHECK(in_len == 30);
  CHECK(out_len == 30);
  CHECK(rpm == 0);
  std::vector<double> window(30, 80.0), out(30, 0.0);
  CHECK(mapcast_model_predict(handle, window.data(), nullptr, 30, out.data(), 30) == MAPCAST_OK);
  for (double v : out) CHECK(std::abs(v - 80.0) < 1.0);
  CHECK(mapcast_model_predict(handle, window.data(), nullptr, 20, out.data(), 30) ==
        MAPCAST_ERR_DATA);
  mapcast_model_destroy(handle);

  CHECK(mapcast_model_load((dir / "nowhere").c_str(), &handle) == MAPCAST_ERR_IO);
}

TEST_CASE("forecast raises alerts below the threshold") {
  const auto dir = scratch("alerts");
  Config c;
  c.set("synth.count", "4").set("synth.duration_s", "1800").set("synth.pulse_pressure", "0");
  c.set("synth.drift_sd", "0").set("synth.trend_rate_per_hr", "0").set("synth.baseline_map", "60");
  c.set("model.architecture", "dnn").set("model.dnn_hidden", "16").set("train.max_epochs", "3");
  const auto corpus = (dir / "corpus").string(), cache = (dir / "cache").string();
  const auto model = (dir / "m").string(), csv = (dir / "corpus" / "rec_000.csv").string();
  REQUIRE(mapcast_synth(c.get(), corpus.c_str(), nullptr, nullptr) == MAPCAST_OK);
  REQUIRE(mapcast_prepare(c.get(), corpus.c_str(), cache.c_str(), nullptr, nullptr) == MAPCAST_OK);
  REQUIRE(mapcast_train(c.get(), cache.c_str(), model.c_str(), 0, nullptr, nullptr, nullptr) ==
          MAPCAST_OK);
  Lines log;
  std::size_t count = 0;
  REQUIRE(mapcast_forecast(c.get(), model.c_str(), csv.c_str(), 60, nullptr, 0, &count,
                           Lines::collect, &log) == MAPCAST_OK);
  CHECK(log.contains("alert: steps 1-30 below 65 mmHg"));
}
