#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "bushvac/config.hpp"
#include "bushvac/io.hpp"
#include "bushvac/synth.hpp"

using namespace bushvac;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("bushvac_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("mission loading") {
  TempDir dir;

  SECTION("door flags scale by the 60% door share") {
    write_file(dir.file("m.csv"),
               "timestamp[iso8601],passenger_count[-],door_open[flag]\n"
               "2022-12-10T08:00:00+01:00,12,1\n"
               "2022-12-10T08:00:01+01:00,12,0\n");
    const MissionTrace t = load_mission(dir.file("m.csv"));
    REQUIRE(t.samples.size() == 2);
    CHECK(t.samples[0].zeta_door == 0.6);
    CHECK(t.samples[1].zeta_door == 0.0);
  }

  SECTION("door fractions pass through unscaled") {
    write_file(dir.file("m.csv"),
               "timestamp[iso8601],passenger_count[-],door_fraction[-]\n"
               "2022-12-10T08:00:00+01:00,12,0.45\n");
    CHECK(load_mission(dir.file("m.csv")).samples[0].zeta_door == 0.45);
  }

  SECTION("malformed rows report their line number") {
    write_file(dir.file("m.csv"),
               "timestamp[iso8601],passenger_count[-],door_open[flag]\n"
               "2022-12-10T08:00:00+01:00,12,1\n"
               "2022-12-10T08:00:01+01:00,oops,0\n");
    try {
      load_mission(dir.file("m.csv"));
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
  }

  SECTION("non-monotone time is rejected") {
    write_file(dir.file("m.csv"),
               "timestamp[iso8601],passenger_count[-],door_open[flag]\n"
               "2022-12-10T08:00:01+01:00,12,1\n"
               "2022-12-10T08:00:00+01:00,12,0\n");
    CHECK_THROWS_AS(load_mission(dir.file("m.csv")), IoError);
  }

  SECTION("missing required columns are named in the error") {
    write_file(dir.file("m.csv"), "timestamp[iso8601],door_open[flag]\n"
                                  "2022-12-10T08:00:00+01:00,1\n");
    try {
      load_mission(dir.file("m.csv"));
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("passenger_count[-]") != std::string::npos);
    }
  }

  SECTION("export then reload round-trips bit-exactly") {
    const MissionTrace orig = synth_mission(SynthProfile::winter_day, 123);
    export_mission(orig, dir.file("trace.csv"));
    const MissionTrace back = load_mission(dir.file("trace.csv"));
    REQUIRE(back.samples.size() == orig.samples.size());
    for (size_t i = 0; i < orig.samples.size(); i += 997) {
      CHECK(back.samples[i].when == orig.samples[i].when);
      CHECK(back.samples[i].t_amb == orig.samples[i].t_amb);
      CHECK(back.samples[i].i_dni == orig.samples[i].i_dni);
      CHECK(back.samples[i].zeta_door == orig.samples[i].zeta_door);
      CHECK(back.samples[i].n_pass == orig.samples[i].n_pass);
    }
    CHECK(back.coords.latitude_deg == orig.coords.latitude_deg);
  }
}

TEST_CASE("weather loading and joining") {
  TempDir dir;
  write_file(dir.file("w.csv"),
             "timestamp[iso8601],t_amb[degC],i_dni[W/m2],i_dhi[W/m2]\n"
             "2022-12-10T07:00:00+01:00,-2.0,100,30\n"
             "2022-12-10T09:00:00+01:00,2.0,300,50\n");
  write_file(dir.file("m.csv"),
             "timestamp[iso8601],passenger_count[-],door_open[flag]\n"
             "2022-12-10T07:30:00+01:00,5,0\n"
             "2022-12-10T08:00:00+01:00,8,1\n"
             "2022-12-10T08:30:00+01:00,9,0\n");

  SECTION("linear interpolation of temperature, hold of irradiance") {
    const auto weather = load_weather(dir.file("w.csv"));
    const MissionTrace joined = join_weather(load_mission(dir.file("m.csv")), weather);
    CHECK_THAT(joined.samples[1].t_amb,
               Catch::Matchers::WithinAbs(celsius_to_kelvin(0.0), 1e-9));  // midpoint
    CHECK(joined.samples[1].i_dni == 100.0);  // zero-order hold from 07:00
    for (const auto& d : joined.samples) REQUIRE_NOTHROW(d.validate());
  }

  SECTION("constant weather joins constant") {
    write_file(dir.file("wc.csv"),
               "timestamp[iso8601],t_amb[degC],i_dni[W/m2],i_dhi[W/m2]\n"
               "2022-12-10T07:00:00+01:00,3.0,0,0\n"
               "2022-12-10T10:00:00+01:00,3.0,0,0\n");
    const MissionTrace joined =
        join_weather(load_mission(dir.file("m.csv")), load_weather(dir.file("wc.csv")));
    for (const auto& d : joined.samples)
      CHECK_THAT(d.t_amb, Catch::Matchers::WithinAbs(celsius_to_kelvin(3.0), 1e-9));
  }

  SECTION("non-overlapping ranges are rejected") {
    write_file(dir.file("wo.csv"),
               "timestamp[iso8601],t_amb[degC],i_dni[W/m2],i_dhi[W/m2]\n"
               "2023-01-01T00:00:00+01:00,0,0,0\n"
               "2023-01-02T00:00:00+01:00,0,0,0\n");
    CHECK_THROWS_AS(join_weather(load_mission(dir.file("m.csv")), load_weather(dir.file("wo.csv"))),
                    IoError);
  }
}

TEST_CASE("synthetic missions") {
  SECTION("same seed, identical trace; different seed differs") {
    const MissionTrace a = synth_mission(SynthProfile::summer_day, 7);
    const MissionTrace b = synth_mission(SynthProfile::summer_day, 7);
    REQUIRE(a.samples.size() == b.samples.size());
    bool all_equal = true;
    for (size_t i = 0; i < a.samples.size(); ++i) {
      all_equal &= a.samples[i].t_amb == b.samples[i].t_amb;
      all_equal &= a.samples[i].zeta_door == b.samples[i].zeta_door;
      all_equal &= a.samples[i].n_pass == b.samples[i].n_pass;
      all_equal &= a.samples[i].i_dni == b.samples[i].i_dni;
    }
    CHECK(all_equal);
    const MissionTrace c = synth_mission(SynthProfile::summer_day, 8);
    bool differs = false;
    for (size_t i = 0; i < a.samples.size(); ++i)
      differs |= a.samples[i].zeta_door != c.samples[i].zeta_door;
    CHECK(differs);
  }

  SECTION("winter day stays below 10 C") {
    const MissionTrace t = synth_mission(SynthProfile::winter_day, 3);
    for (const auto& d : t.samples) CHECK(d.t_amb < celsius_to_kelvin(10.0));
  }

  SECTION("profiles validate and missions start on the hour") {
    for (SynthProfile p :
         {SynthProfile::winter_day, SynthProfile::summer_day, SynthProfile::year_round}) {
      const MissionTrace t = synth_mission(p, 42);
      REQUIRE_NOTHROW(t.validate());
    }
    const MissionTrace w = synth_mission(SynthProfile::winter_day, 42);
    const std::int64_t local =
        w.samples.front().when.epoch_s + w.samples.front().when.tz_offset_min * 60;
    CHECK(local % 3600 == 0);
    CHECK(w.duration_s() == 14 * 3600 - 1);
  }

  SECTION("year-round covers all twelve months with enough samples") {
    const MissionTrace t = synth_mission(SynthProfile::year_round, 42);
    CHECK(t.samples.size() >= 1000);
    std::array<bool, 12> seen{};
    for (const auto& d : t.samples) seen[local_month(d.when) - 1] = true;
    for (int m = 0; m < 12; ++m) {
      INFO("month " << m + 1);
      CHECK(seen[m]);
    }
  }
}

TEST_CASE("run config") {
  TempDir dir;

  SECTION("defaults finalize and hash deterministically") {
    RunConfig cfg;
    cfg.finalize();
    const std::string h1 = config_hash(cfg.effective_json());
    const std::string h2 = config_hash(cfg.effective_json());
    CHECK(h1 == h2);
    CHECK(h1.size() == 16);
    RunConfig other;
    other.seed = 43;
    other.finalize();
    CHECK(config_hash(other.effective_json()) != h1);
  }

  SECTION("unknown keys are rejected") {
    write_file(dir.file("cfg.json"), R"({"dseign": "hp"})");
    CHECK_THROWS_AS(RunConfig::load(dir.file("cfg.json")), ConfigError);
    write_file(dir.file("cfg2.json"), R"({"constants": {"bogus_field": 1.0}})");
    CHECK_THROWS_AS(RunConfig::load(dir.file("cfg2.json")), ConfigError);
  }

  SECTION("constants overrides are validated") {
    // Overriding one geometric quantity without its dependents must fail.
    write_file(dir.file("cfg.json"), R"({"constants": {"len_cab_m": 12.0}})");
    CHECK_THROWS_AS(RunConfig::load(dir.file("cfg.json")), ConfigError);
    // A consistent override set passes.
    write_file(dir.file("cfg_ok.json"), R"({"constants": {
      "len_cab_m": 12.0, "wid_cab_m": 2.5, "hgt_cab_m": 2.3,
      "vol_cab_m3": 69.0, "area_shell_m2": 126.7, "area_roof_m2": 30.0,
      "area_wall_m2": 66.7, "cap_cab_j_per_k": 86681.25}})");
    const RunConfig cfg = RunConfig::load(dir.file("cfg_ok.json"));
    CHECK(cfg.constants.len_cab == 12.0);
  }

  SECTION("design strings configure the hardware switches") {
    write_file(dir.file("cfg.json"), R"({"design": "ptc,+rh"})");
    const RunConfig cfg = RunConfig::load(dir.file("cfg.json"));
    CHECK(cfg.constants.heater_kind == HeaterKind::ptc);
    CHECK(cfg.constants.rh_installed);
    CHECK_FALSE(cfg.constants.curtains_installed);
    CHECK(std::isinf(cfg.constants.p_hc_max_heat));

    write_file(dir.file("bad.json"), R"({"design": "fusion"})");
    CHECK_THROWS_AS(RunConfig::load(dir.file("bad.json")), ConfigError);
  }

  SECTION("comfort boxes parse and validate") {
    write_file(dir.file("cfg.json"), R"({"comfort": [[-0.5, 0.5], [-1, 1]]})");
    const RunConfig cfg = RunConfig::load(dir.file("cfg.json"));
    REQUIRE(cfg.comfort.size() == 2);
    CHECK(cfg.comfort[0].psi_min == -0.5);
    write_file(dir.file("bad.json"), R"({"comfort": [[0.5, -0.5]]})");
    CHECK_THROWS_AS(RunConfig::load(dir.file("bad.json")), ConfigError);
  }

  SECTION("setpoint profiles load from JSON and reject crossings") {
    write_file(dir.file("cfg.json"), R"({"setpoints": {
      "heating": {"c0_degC": 21.0, "c1": 0.05, "c2_per_degC": -0.002},
      "cooling": {"break_degC": 22.0, "value_degC": 24.5, "slope_below": 0.0, "slope_above": 0.2},
      "valid_t_amb_degC": [-15.0, 38.0]}})");
    const RunConfig cfg = RunConfig::load(dir.file("cfg.json"));
    REQUIRE(cfg.setpoints.has_value());
    CHECK(cfg.setpoints->heat_c0 == 21.0);

    write_file(dir.file("bad.json"), R"({"setpoints": {
      "heating": {"c0_degC": 30.0, "c1": 0.0, "c2_per_degC": 0.0},
      "cooling": {"break_degC": 22.0, "value_degC": 24.5, "slope_below": 0.0, "slope_above": 0.2},
      "valid_t_amb_degC": [-15.0, 38.0]}})");
    CHECK_THROWS_AS(RunConfig::load(dir.file("bad.json")), ConfigError);
  }
}

TEST_CASE("solution and trajectory exports carry declared units") {
  TempDir dir;
  MissionTrace year = synth_mission(SynthProfile::year_round, 1);
  year.samples.resize(28);
  SampleSet set = segment_and_average(year);
  sample_weights(set);
  const ModelConstants c = ModelConstants::defaults();
  const ComfortEvaluator eval(c);
  std::vector<SteadyStateSolution> sols;
  for (const auto& ws : set.samples)
    sols.push_back(optimize_sample(ws.d, {-1.0, 1.0}, c, eval));

  export_solutions(set, sols, dir.file("sol.csv"));
  const CsvTable t = read_csv(dir.file("sol.csv"));
  CHECK(t.require_column("p_hvac[W]") >= 0);
  CHECK(t.require_column("pmv[-]") >= 0);
  CHECK(t.require_column("t_cab[degC]") >= 0);
  CHECK(t.column("wall[ms]") < 0);  // timing excluded by default
  REQUIRE(t.rows.size() == sols.size());
  for (size_t i = 0; i < sols.size(); ++i)
    CHECK_THAT(t.number(i, t.column("p_hvac[W]")),
               Catch::Matchers::WithinRel(sols[i].p_hvac, 1e-12));

  export_solutions(set, sols, dir.file("sol_t.csv"), /*with_timing=*/true);
  CHECK(read_csv(dir.file("sol_t.csv")).column("wall[ms]") >= 0);
}
