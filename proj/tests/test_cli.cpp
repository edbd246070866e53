// Drives the installed CLI binary end to end: exit codes, determinism of the
// written reports, overrides, and the config error paths.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef COVAPPROX_CLI_PATH
#error "COVAPPROX_CLI_PATH must point at the covapprox binary"
#endif

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(COVAPPROX_CLI_PATH) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
}

}  // namespace

TEST_CASE("experiment subcommand writes byte-identical reports on re-run") {
  write_file("/tmp/cli_psi.json",
             R"({"experiment":"psi_decay","marginal":"rademacher","m_values":[1,4],)"
             R"("trials":120000,"seed":11})");
  CHECK(run("experiment psi_decay --config /tmp/cli_psi.json --out /tmp/cli_psi_a.json") == 0);
  CHECK(run("experiment psi_decay --config /tmp/cli_psi.json --out /tmp/cli_psi_b.json") == 0);
  CHECK(slurp("/tmp/cli_psi_a.json") == slurp("/tmp/cli_psi_b.json"));

  const auto body = nlohmann::json::parse(slurp("/tmp/cli_psi_a.json"));
  CHECK(body.at("rows").size() == 2);
  CHECK(body.at("library_version").is_string());
}

TEST_CASE("config errors exit with code 2") {
  CHECK(run("experiment warp_drive --out /tmp/cli_x.json") == 2);
  write_file("/tmp/cli_bad.json", R"({"experiment":"psi_decay","nope":1})");
  CHECK(run("experiment psi_decay --config /tmp/cli_bad.json") == 2);
  write_file("/tmp/cli_bad2.json", R"({"experiment":"slab_gaussian","d":4,"eta":0.7})");
  CHECK(run("experiment slab_gaussian --config /tmp/cli_bad2.json") == 2);
  CHECK(run("certify --out /tmp/cli_x.json") == 2);  // missing N
}

TEST_CASE("--assert exits 3 exactly when a gate fails") {
  // undersized slab run: the gates record whatever really happened
  write_file("/tmp/cli_slab.json",
             R"({"experiment":"slab_gaussian","d":4,"eta":0.2,"n":60,"seeds":2,)"
             R"("directions":400,"seed":2})");
  const int code =
      run("experiment slab_gaussian --config /tmp/cli_slab.json --assert --out /tmp/cli_slab.json.out");
  const auto body = nlohmann::json::parse(slurp("/tmp/cli_slab.json.out"));
  bool all = true;
  for (const auto& [k, v] : body.at("aggregates").at("gates").items()) {
    (void)k;
    all = all && v.get<bool>();
  }
  CHECK(code == (all ? 0 : 3));
}

TEST_CASE("csv output and option overrides") {
  CHECK(run("baseline --config /dev/null 2>/dev/null") == 2);  // not json
  write_file("/tmp/cli_base.json",
             R"({"distribution":"gaussian","d":4,"N":2000,"p":4.0})");
  CHECK(run("baseline --config /tmp/cli_base.json --format csv --seed 9 "
            "--out /tmp/cli_base.csv") == 0);
  const std::string csv = slurp("/tmp/cli_base.csv");
  CHECK(csv.rfind("seed,d,N,p,deviation,", 0) == 0);
  CHECK(run("estimate-m0 --config /tmp/cli_base.json") == 2);  // missing eta
}
