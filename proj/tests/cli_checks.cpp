// Exit-code contract of the installed binary: 0 success, 2 config error,
// 3 infeasible schedule.
#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <string>
#include <sys/wait.h>

namespace {

int run_cli(const std::string& arguments) {
  const std::string command =
      std::string(LERW_CLI_PATH) + " " + arguments + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cli exit codes") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("mixing --graph complete:m=2 --tmax 8 --out /tmp/lerw_cli_mix") == 0);
  CHECK(run_cli("surrogate-run --m 100 --steps 4") == 2);        // seed required
  CHECK(run_cli("mixing --graph complete:m=x") == 2);            // bad graph spec
  CHECK(run_cli("mixing --graph complete:m=2 --bogus 1") == 2);  // unknown key
  CHECK(run_cli("frobnicate --seed 1") == 2);                    // unknown subcommand
  CHECK(run_cli("constants --graph complete:m=256 --case 1 --tau 16 --seed 1 "
                "--replicates 2 --out /tmp/lerw_cli_c") == 3);   // infeasible schedule
  CHECK(run_cli("couple-verify --seed 1 --j 2 --p 0.9 --q 0.5") == 2);  // p >= 1/j
}
