#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nvsinglet/io.hpp"
#include "nvsinglet/phase_shift.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_tool;
fs::path g_tmp;

int run(const std::string& cli_args) {
  const std::string cmd = g_tool + " " + cli_args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
#ifdef _WIN32
  return status;
#else
  return WEXITSTATUS(status);
#endif
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string tmp(const std::string& name) { return (g_tmp / name).string(); }

}  // namespace

TEST_CASE("selection-rules exits 0 and lists all six pairs") {
  const std::string out = tmp("rules.json");
  CHECK(run("selection-rules --out " + out) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("\"upper\"") != std::string::npos);
  CHECK(text.find("\"A2\"") != std::string::npos);
  // A1 -> A2 is forbidden: an empty axes list must appear.
  CHECK(text.find("\"axes\": []") != std::string::npos);
}

TEST_CASE("simulate-trace writes the trace schema and conserves population") {
  const std::string out = tmp("trace.csv");
  CHECK(run("simulate-trace --out " + out +
            " --set sim.t_end=2e-7 --set sim.n_samples=20") == 0);
  const nvs::io::CsvTable t = nvs::io::read_csv(out);
  CHECK(t.header.size() == 9);
  CHECK(t.header[0] == "t_s");
  CHECK(t.header[8] == "ir_rate");
  REQUIRE(t.rows.size() == 20);
  for (const auto& row : t.rows) {
    double sum = 0.0;
    for (int j = 1; j <= 6; ++j) sum += row[j];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("square pump waveform produces on/off emission structure") {
  const std::string out = tmp("pulse.csv");
  CHECK(run("simulate-trace --out " + out +
            " --set sim.pump_waveform=square --set sim.t_end=2e-6"
            " --set sim.pump_on_time=1e-6 --set sim.n_samples=40") == 0);
  const nvs::io::CsvTable t = nvs::io::read_csv(out);
  const int c_t = t.column("t_s"), c_vis = t.column("visible_rate");
  double vis_on = 0.0, vis_off = 0.0;
  for (const auto& row : t.rows) {
    if (row[c_t] > 0.5e-6 && row[c_t] < 1.0e-6) vis_on = std::max(vis_on, row[c_vis]);
    if (row[c_t] > 1.8e-6) vis_off = std::max(vis_off, row[c_vis]);
  }
  CHECK(vis_on > 0.0);
  CHECK(vis_off < 0.01 * vis_on);
}

TEST_CASE("thermal-curve is deterministic per seed") {
  const std::string a = tmp("tc_a.csv"), b = tmp("tc_b.csv"), c = tmp("tc_c.csv");
  const std::string base =
      " --set thermal.noise_frac=0.02 --set thermal.n_points=10";
  CHECK(run("thermal-curve --out " + a + base + " --seed 42") == 0);
  CHECK(run("thermal-curve --out " + b + base + " --seed 42") == 0);
  CHECK(run("thermal-curve --out " + c + base + " --seed 43") == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) != slurp(c));
}

TEST_CASE("fit-thermal free structure recovers the generating energy") {
  const std::string data = tmp("tc_clean.csv"), out = tmp("tfit.json");
  CHECK(run("thermal-curve --out " + data + " --set thermal.n_points=12") == 0);
  CHECK(run("fit-thermal --data " + data + " --out " + out +
            " --set thermal.fit_structure=free:1") == 0);
  const std::string text = slurp(out);
  CHECK(text.find("\"epsilon_1\"") != std::string::npos);
  CHECK(text.find("\"converged\": true") != std::string::npos);
}

TEST_CASE("fit-thermal fixed structure reports the degeneracy tuple") {
  const std::string data = tmp("tc_fixed.csv"), out = tmp("tfit_fixed.json");
  CHECK(run("thermal-curve --out " + data + " --set thermal.n_points=12") == 0);
  CHECK(run("fit-thermal --data " + data + " --out " + out +
            " \"--set=thermal.fit_structure=fixed:0.015:3\"") == 0);
  const std::string text = slurp(out);
  CHECK(text.find("\"degeneracies\"") != std::string::npos);
  CHECK(text.find("\"tau0\"") != std::string::npos);
}

TEST_CASE("fit-phase on an analytic dataset recovers tau0 in the sidecar") {
  // Synthesize a cascade phase dataset directly from the closed form.
  std::vector<nvs::phase::PhasePoint> pts;
  for (int i = 0; i < 15; ++i) {
    const double f = 1e6 * std::pow(100.0, i / 14.0);
    pts.push_back({f, nvs::phase::phase_cascade(f, 7.8e-9, 0.9e-9), 1e-4});
  }
  const std::string data = tmp("phase_data.csv");
  nvs::io::write_csv(data, nvs::io::phase_table(pts));

  const std::string out = tmp("phase_out.csv");
  CHECK(run("fit-phase --data " + data + " --out " + out) == 0);
  const std::string fit_json = slurp(tmp("phase_out_fit.json"));
  CHECK(fit_json.find("\"tau0\"") != std::string::npos);
  CHECK(fit_json.find("\"converged\": true") != std::string::npos);
  // Round-trip: the CSV written back matches the dataset.
  const auto back = nvs::io::phase_points_from_table(nvs::io::read_csv(out));
  REQUIRE(back.size() == pts.size());
  CHECK(back[3].phi == doctest::Approx(pts[3].phi).epsilon(1e-12));
}

TEST_CASE("odmr-spectrum writes the grid plus a line sidecar") {
  const std::string out = tmp("odmr.csv");
  CHECK(run("odmr-spectrum --out " + out +
            " --set odmr.n_points=51 \"--set=spin.b_field=0.001,0,0.002\"") == 0);
  const nvs::io::CsvTable t = nvs::io::read_csv(out);
  CHECK(t.header == std::vector<std::string>{"f_hz", "visible", "ir"});
  CHECK(t.rows.size() == 51);
  const std::string lines = slurp(tmp("odmr_lines.json"));
  CHECK(lines.find("\"frequency_hz\"") != std::string::npos);
  CHECK(lines.find("\"vis_contrast\"") != std::string::npos);
  // 8 resonance lines.
  size_t count = 0, pos = 0;
  while ((pos = lines.find("\"branch\"", pos)) != std::string::npos) {
    ++count;
    pos += 8;
  }
  CHECK(count == 8);
}

TEST_CASE("polar-scan writes the curve and the angle fit") {
  const std::string out = tmp("polar.csv");
  CHECK(run("polar-scan --out " + out +
            " \"--set=polar.nv_axis=1,1,0\" \"--set=polar.k=0,0,1\"") == 0);
  const nvs::io::CsvTable t = nvs::io::read_csv(out);
  CHECK(t.header == std::vector<std::string>{"theta_rad", "R", "sigma"});
  const std::string fit_json = slurp(tmp("polar_fit.json"));
  CHECK(fit_json.find("\"phi_nv_deg\"") != std::string::npos);
  CHECK(fit_json.find("\"sin2_preferred\": true") != std::string::npos);
}

TEST_CASE("validation failures exit with code 2") {
  CHECK(run("simulate-trace --set rate.bogus_key=1") == 2);
  CHECK(run("simulate-trace --set rate.pump_rate=abc") == 2);
  CHECK(run("simulate-trace --config " + tmp("no_such_file.cfg")) == 2);
  CHECK(run("fit-thermal") == 2);  // --data is required
  CHECK(run("odmr-spectrum --set odmr.n_points=1") == 2);
}

TEST_CASE("numeric failures exit with code 3") {
  // No pump and no ground-state mixing: the stationary problem is singular.
  CHECK(run("phase-scan --set rate.pump_rate=0 --set rate.g_spin_relax=0"
            " --set phase.n_freq=1") == 3);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-nvtool>\n");
    return 1;
  }
  g_tool = argv[1];
  g_tmp = fs::temp_directory_path() / "nvtool_cli_test";
  fs::create_directories(g_tmp);
  doctest::Context ctx;
  // Strip the tool path before handing the rest to doctest.
  ctx.applyCommandLine(1, argv);
  const int rc = ctx.run();
  fs::remove_all(g_tmp);
  return rc;
}
