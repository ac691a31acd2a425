#include "support.hpp"

#include "rodflow/experiments.hpp"
#include "rodflow/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rodflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rodflow_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

DiagnosticsRecord random_record(std::mt19937_64& rng, long step) {
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  DiagnosticsRecord r;
  r.step = step;
  r.energy = {u(rng), u(rng), u(rng), u(rng), u(rng)};
  r.total_twist = u(rng) * 1e-7;
  if (step % 3) r.uniformity = u(rng);
  r.vy = std::ldexp(u(rng), -40);
  r.vb = u(rng);
  r.violation = u(rng);
  r.wall_ms = u(rng);
  return r;
}

void check_same(const DiagnosticsRecord& a, const DiagnosticsRecord& b) {
  CHECK(a.step == b.step);
  CHECK(a.energy.bending == b.energy.bending);
  CHECK(a.energy.twisting == b.energy.twisting);
  CHECK(a.energy.penalty == b.energy.penalty);
  CHECK(a.energy.tangent_point == b.energy.tangent_point);
  CHECK(a.energy.total == b.energy.total);
  CHECK(a.total_twist == b.total_twist);
  CHECK(a.uniformity.has_value() == b.uniformity.has_value());
  if (a.uniformity && b.uniformity) CHECK(*a.uniformity == *b.uniformity);
  CHECK(a.vy == b.vy);
  CHECK(a.vb == b.vb);
  CHECK(a.violation == b.violation);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(RODFLOW_CLI) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("doubles survive formatting") {
    for (double v : {0.0, -0.0, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5e-17})
      CHECK(parse_double(format_double(v)) == v);
    CHECK(std::isnan(parse_double(format_double(std::nan("")))));
    CHECK(parse_double(format_double(std::numeric_limits<double>::infinity())) ==
          std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(parse_double("1.5x"), IoError);
  }

  TEST_CASE("record files round trip") {
    const fs::path dir = scratch_dir("records");
    std::mt19937_64 rng(1);
    std::vector<DiagnosticsRecord> recs;
    for (long k = 0; k < 1000; ++k) recs.push_back(random_record(rng, k));
    write_records(dir / "r.csv", recs);
    const auto back = read_records(dir / "r.csv");
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) check_same(recs[i], back[i]);

    std::ifstream in(dir / "r.csv");
    std::string line;
    while (std::getline(in, line)) CHECK(std::count(line.begin(), line.end(), ',') == 11);

    truncate_records(dir / "r.csv", 499);
    const auto cut = read_records(dir / "r.csv");
    CHECK(cut.size() == 500);
    CHECK(cut.back().step == 499);
  }

  TEST_CASE("empty record file has only the header") {
    const fs::path dir = scratch_dir("empty");
    write_records(dir / "e.csv", {});
    CHECK(slurp(dir / "e.csv") == std::string(kRecordHeader) + "\n");
    CHECK(read_records(dir / "e.csv").empty());
    CHECK_THROWS_AS(parse_record("1,2,3"), IoError);
  }

  TEST_CASE("frames round trip") {
    const fs::path dir = scratch_dir("frames");
    std::mt19937_64 rng(2);
    for (bool closed : {true, false}) {
      const RodState s = closed ? testing::random_closed_state(rng, 12, 2.0) : testing::random_open_state(rng, 12);
      write_frame(dir / "f.tsv", {42, 1.5, s});
      const FrameDump f = read_frame(dir / "f.tsv");
      CHECK(f.step == 42);
      CHECK(f.kappa == 1.5);
      CHECK(f.state.mesh->periodic() == closed);
      CHECK(f.state.mesh->num_elements() == 12);
      CHECK(pack_curve(f.state.curve) == pack_curve(s.curve));
      CHECK(pack_director(f.state.director) == pack_director(s.director));
    }
    std::ofstream(dir / "bad.tsv") << "# something else\n";
    CHECK_THROWS_AS(read_frame(dir / "bad.tsv"), IoError);
  }

  TEST_CASE("checkpoints") {
    const fs::path dir = scratch_dir("ckpt");
    const Scenario sc = build_scenario("clamped", ScenarioOverrides{.N = 40});
    const Checkpoint c{sc.name, 0, sc.config, sc.bc, sc.initial};
    write_checkpoint(dir / "c.bin", c);
    const Checkpoint r = read_checkpoint(dir / "c.bin");
    CHECK(r.scenario == "clamped");
    CHECK(r.step == 0);
    CHECK(r.config.kappa == sc.config.kappa);
    CHECK(r.config.tau == sc.config.tau);
    CHECK(r.config.epsilon == sc.config.epsilon);
    CHECK(r.bc.kind == sc.bc.kind);
    CHECK(r.bc.yL == sc.bc.yL);
    CHECK(pack_curve(r.state.curve) == pack_curve(sc.initial.curve));
    CHECK(pack_director(r.state.director) == pack_director(sc.initial.director));
    CHECK(std::vector<double>(r.state.mesh->nodes().begin(), r.state.mesh->nodes().end()) ==
          std::vector<double>(sc.initial.mesh->nodes().begin(), sc.initial.mesh->nodes().end()));

    const std::string bytes = slurp(dir / "c.bin");
    {
      std::string flipped = bytes;
      flipped[bytes.size() / 2] ^= 0x10;
      std::ofstream(dir / "flip.bin", std::ios::binary) << flipped;
      CHECK_THROWS_AS(read_checkpoint(dir / "flip.bin"), IoError);
    }
    {
      std::ofstream(dir / "short.bin", std::ios::binary) << bytes.substr(0, bytes.size() - 9);
      CHECK_THROWS_AS(read_checkpoint(dir / "short.bin"), IoError);
    }
    {
      std::string v2 = bytes;
      v2[8] = 2;  // version field follows the 8-byte magic
      std::ofstream(dir / "v2.bin", std::ios::binary) << v2;
      CHECK_THROWS_WITH_AS(read_checkpoint(dir / "v2.bin"), doctest::Contains("version"), IoError);
    }
    CHECK_THROWS_AS(read_checkpoint(dir / "missing.bin"), IoError);
  }

  TEST_CASE("command line driver") {
    const fs::path dir = scratch_dir("cli");
    const std::string out = (dir / "f8").string();
    REQUIRE(cli("run f8 --steps 0 --quiet --out " + out) == 0);
    const auto recs = read_records(dir / "f8" / "records.csv");
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].step == 0);
    CHECK(fs::exists(dir / "f8" / "frames" / "0.tsv"));
    CHECK(fs::exists(dir / "f8" / "checkpoint.bin"));

    CHECK(cli("run nonsense --quiet --out " + (dir / "x").string()) == 2);
    CHECK(cli("run f8 --bogus-flag") == 2);
    CHECK(cli("diag " + (dir / "missing.tsv").string()) == 1);

    // interrupted and resumed run against a straight run
    const std::string a = (dir / "a").string(), b = (dir / "b").string();
    REQUIRE(cli("run uniframe --steps 200 --log-every 1 --dump-every 100 --quiet --out " + a) == 0);
    REQUIRE(cli("run uniframe --steps 100 --log-every 1 --dump-every 100 --quiet --out " + b) == 0);
    REQUIRE(cli("run --resume " + b + "/checkpoint.bin --steps 200 --log-every 1 --dump-every 100 --quiet --out " + b) == 0);
    const auto ra = read_records(fs::path(a) / "records.csv"), rb = read_records(fs::path(b) / "records.csv");
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) check_same(ra[i], rb[i]);

    const std::string json = (dir / "diag.json").string();
    REQUIRE(std::system((std::string(RODFLOW_CLI) + " diag " + a + "/frames/200.tsv > " + json).c_str()) == 0);
    const std::string text = slurp(json);
    CHECK(text.find("\"total_twist\"") != std::string::npos);
    CHECK(text.find("\"step\": 200") != std::string::npos);
  }
}
