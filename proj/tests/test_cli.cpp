#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "opo/cli.hpp"
#include "opo/sweep.hpp"

using nlohmann::json;

namespace {

const std::string source_dir{OPO_SOURCE_DIR};
const std::string paper_cfg = source_dir + "/configs/paper_250mW.json";
const std::string power_cfg = source_dir + "/configs/paper_250mW_power.json";

struct Outcome {
  int code{};
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "opo-squeeze");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = opo::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) v.push_back(line);
  return v;
}

std::vector<double> csv_numbers(const std::string& line) {
  std::vector<double> v;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) v.push_back(std::stod(cell));
  return v;
}

int column(const std::string& header, const std::string& name) {
  std::istringstream in(header);
  int i = 0;
  for (std::string cell; std::getline(in, cell, ','); ++i) {
    if (cell == name) return i;
  }
  return -1;
}

}  // namespace

TEST_CASE("predict") {
  SUBCASE("text") {
    const auto r = run({"predict", paper_cfg});
    CHECK(r.code == 0);
    CHECK(r.out.find("R_minus_dB  -8.24834") != std::string::npos);
  }
  SUBCASE("json") {
    const auto r = run({"predict", paper_cfg, "--format", "json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(std::abs(j["R_minus_dB"].get<double>() - -8.20) <= 0.1);
    CHECK(std::abs(j["R_plus_dB"].get<double>() - 13.27) <= 0.1);
    CHECK_FALSE(j.contains("Rm_corr_dB"));
  }
  SUBCASE("corrected") {
    const auto j = json::parse(run({"predict", paper_cfg, "--corrected", "--format", "json"}).out);
    CHECK(std::abs(j["Rm_corr_dB"].get<double>() - -5.68) <= 0.1);
    CHECK(std::abs(j["Rp_corr_dB"].get<double>() - 13.25) <= 0.1);
    CHECK(j["degradation"] == "exact");
    const auto approx = json::parse(run({"predict", paper_cfg, "--corrected", "--approx", "--format", "json"}).out);
    CHECK(approx["degradation"] == "approx");
    CHECK(approx["Rm_corr_dB"].get<double>() == doctest::Approx(-5.7142).epsilon(1e-4));
  }
  SUBCASE("csv, unpumped") {
    const auto r = run({"predict", source_dir + "/configs/unpumped.json", "--format", "csv"});
    REQUIRE(r.code == 0);
    const auto l = lines(r.out);
    REQUIRE(l.size() == 2);
    const auto v = csv_numbers(l[1]);
    CHECK(v[column(l[0], "R_plus_dB")] == 0.0);
    CHECK(v[column(l[0], "R_minus_dB")] == 0.0);
  }
  SUBCASE("power-mode config agrees with gain mode") {
    const auto a = json::parse(run({"predict", paper_cfg, "--format", "json"}).out);
    const auto b = json::parse(run({"predict", power_cfg, "--format", "json"}).out);
    CHECK(a["x"].get<double>() == doctest::Approx(b["x"].get<double>()).epsilon(1e-6));
  }
}

TEST_CASE("sweep") {
  const auto r = run({"sweep", power_cfg, "--pmin", "50", "--pmax", "550", "--steps", "11"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 12);
  CHECK(l[0] == opo::sweep_csv_header);

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 1; i < l.size(); ++i) rows.push_back(csv_numbers(l[i]));
  const int p = column(l[0], "pump_mW"), rp = column(l[0], "R_plus_dB"), rm = column(l[0], "R_minus_dB"),
            rpc = column(l[0], "Rp_corr_dB");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][p] > rows[i - 1][p]);
    CHECK(rows[i][rp] > rows[i - 1][rp]);
    CHECK(rows[i][rm] < rows[i - 1][rm]);
    CHECK(rows[i][rpc] > rows[i - 1][rpc]);
  }
  CHECK(rows.front()[p] == 50.0);
  CHECK(rows.back()[p] == 550.0);

  SUBCASE("single step reproduces predict") {
    const auto s = run({"sweep", power_cfg, "--pmin", "250", "--pmax", "250", "--steps", "1"});
    REQUIRE(s.code == 0);
    const auto sl = lines(s.out);
    REQUIRE(sl.size() == 2);
    const auto row = csv_numbers(sl[1]);
    const auto pred = json::parse(run({"predict", power_cfg, "--corrected", "--format", "json"}).out);
    CHECK(row[rm] == doctest::Approx(pred["R_minus_dB"].get<double>()).epsilon(1e-5));
    CHECK(std::abs(row[column(sl[0], "Rm_corr_dB")] - -5.68) <= 0.1);
  }
  SUBCASE("anchor sets the threshold") {
    const auto a = run({"sweep", paper_cfg, "--anchor", "250:8.83", "--pmin", "250", "--pmax", "250", "--steps", "1"});
    REQUIRE(a.code == 0);
    CHECK(csv_numbers(lines(a.out)[1])[column(l[0], "G")] == doctest::Approx(8.83).epsilon(1e-5));
  }
  SUBCASE("written to a file") {
    const auto path = std::filesystem::temp_directory_path() / "opo_sweep_test.csv";
    REQUIRE(run({"sweep", power_cfg, "--pmin", "50", "--pmax", "550", "--out", path.string()}).code == 0);
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == r.out);
    std::filesystem::remove(path);
  }
  SUBCASE("errors") {
    const auto above = run({"sweep", power_cfg, "--pmin", "50", "--pmax", "600"});
    CHECK(above.code == 2);
    CHECK(above.err.find("threshold") != std::string::npos);
    CHECK(run({"sweep", paper_cfg, "--pmin", "50", "--pmax", "500"}).code == 2);
    CHECK(run({"sweep", power_cfg, "--pmin", "300", "--pmax", "100"}).code == 2);
  }
}

TEST_CASE("correct") {
  CHECK(run({"correct", "--level-db", "-5.6", "--clearance-db", "-17.747"}).out == "-5.799745\n");
  CHECK(run({"correct", "--level-db", "12.72", "--clearance", "0.0168", "--inverse"}).out == "12.650384\n");
  const auto bad = run({"correct", "--level-db", "-20", "--clearance", "0.0168"});
  CHECK(bad.code == 3);
  CHECK(bad.err.find("dark noise") != std::string::npos);
  CHECK(run({"correct", "--level-db", "-3"}).code == 2);
}

TEST_CASE("fit") {
  SUBCASE("jitter only") {
    const auto r = run({"fit", paper_cfg, "--sq-db", "-5.80"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["theta_rms_deg"].get<double>() == doctest::Approx(4.21).epsilon(1e-3));
    CHECK(j["x"].is_null());
    CHECK(j["gain"].is_null());
    CHECK(j["status"] == "ok");
  }
  SUBCASE("joint") {
    const auto j = json::parse(run({"fit", paper_cfg, "--sq-db", "-5.80", "--asq-db", "12.72", "--joint"}).out);
    CHECK(std::abs(j["x"].get<double>() - 0.6457) <= 1e-4);
    CHECK(std::abs(j["theta_rms_deg"].get<double>() - 4.38) <= 0.01);
    CHECK(j["gain"].get<double>() == doctest::Approx(7.964).epsilon(1e-3));
    CHECK(run({"fit", paper_cfg, "--sq-db", "-5.80", "--joint"}).code == 2);
  }
  SUBCASE("raw reading uses the configured dark clearance") {
    const auto raw = json::parse(run({"fit", power_cfg, "--sq-db", "-5.6", "--raw"}).out);
    const auto cooked = json::parse(run({"fit", power_cfg, "--sq-db", "-5.80"}).out);
    CHECK(std::abs(raw["theta_rms_deg"].get<double>() - cooked["theta_rms_deg"].get<double>()) <= 0.05);
    CHECK(run({"fit", paper_cfg, "--sq-db", "-5.6", "--raw"}).code == 2);
  }
  SUBCASE("infeasible reading") {
    const auto r = run({"fit", paper_cfg, "--sq-db", "-9"});
    CHECK(r.code == 3);
    CHECK(json::parse(r.out)["status"] == "infeasible");
  }
  CHECK(run({"fit", paper_cfg, "--sq-db", "1.0"}).code == 2);
}

TEST_CASE("oracle") {
  const auto r = run({"oracle", source_dir + "/configs/unpumped.json", "--segments", "20", "--detuning", "0",
                      "--detuning", "0.5", "--assert", "--threads", "1"});
  CHECK(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 3);
  CHECK(l[0] ==
        "frequency_hz,Omega,x,G,R_plus,R_minus,R_plus_dB,R_minus_dB,model_R_plus_dB,model_R_minus_dB,"
        "stderr_plus,stderr_minus,segments,seed");
  const auto row = csv_numbers(l[2]);
  CHECK(row[column(l[0], "Omega")] == doctest::Approx(0.5));
  CHECK(row[column(l[0], "segments")] == 20);
  CHECK(row[column(l[0], "seed")] == 1);
  CHECK(row[column(l[0], "model_R_minus_dB")] == 0.0);

  const auto again = run({"oracle", source_dir + "/configs/unpumped.json", "--segments", "20", "--detuning", "0",
                          "--detuning", "0.5", "--threads", "1"});
  CHECK(again.out == r.out);

  CHECK(run({"oracle", paper_cfg, "--segments", "4"}).code == 2);
  CHECK(run({"oracle", paper_cfg, "--segments", "20", "--dt", "1e-8"}).code == 2);
}

TEST_CASE("paper") {
  const auto list = run({"paper", "--list"});
  CHECK(list.code == 0);
  CHECK(list.out.find("[crystal-1-250mW]") != std::string::npos);
  CHECK(list.out.find("[crystal-2]") != std::string::npos);

  const auto check = run({"paper", "--check"});
  CHECK(check.code == 0);
  CHECK(check.out.find("ALL PASS") != std::string::npos);
  CHECK(check.out.find("FAIL") == std::string::npos);

  const auto corrupted = run({"paper", "--check", "--dataset", source_dir + "/tests/data/corrupted_dataset.json"});
  CHECK(corrupted.code == 1);
  CHECK(corrupted.out.find("FAIL C4") != std::string::npos);
}

TEST_CASE("argument and config errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"predict"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"predict", paper_cfg, "--format", "xml"}).code == 2);

  const auto path = std::filesystem::temp_directory_path() / "opo_bad_config.json";
  {
    std::ofstream out(path);
    out << R"({"cavity": {"T": 0.15, "L": 0.011, "round_trip_m": 0.214},
              "detection": {"zeta": 1.0, "eta": 1.4, "xi": 0.979},
              "pump": {"mode": "gain", "value": 8.83},
              "noise": {"theta_rms_deg": 4.3},
              "measurement": {"frequency_hz": 1e6}})";
  }
  const auto bad = run({"predict", path.string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("detection.eta") != std::string::npos);
  std::filesystem::remove(path);
}
