#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path work_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "nblearn_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

CliResult invoke(const std::string& args) {
    const fs::path out = work_dir() / "stdout.txt";
    const fs::path err = work_dir() / "stderr.txt";
    const std::string cmd = std::string(NBLEARN_CLI_PATH) + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = work_dir() / name;
    std::ofstream f(p, std::ios::binary);
    f << text;
    return p;
}

const std::string kRunnable = R"({
  "version": 1,
  "scenario": {"builder": "two_agent"},
  "run": {"seed": 2024, "horizon": 200, "stride": 10}
})";

}  // namespace

TEST_CASE("run writes artifacts and reports convergence") {
    const fs::path cfg = write_config("ok.json", kRunnable);
    const fs::path out = work_dir() / "run_out";
    const CliResult r = invoke("run " + cfg.string() + " --out " + out.string());
    CHECK(r.exit_code == 0);
    CHECK(r.err.empty());
    CHECK(r.out.find("wrote") != std::string::npos);
    CHECK(r.out.find("converged at step") != std::string::npos);

    const std::string traj = slurp(out / "trajectory.csv");
    CHECK(traj.rfind("k,agent,theta,belief,beta", 0) == 0);
    CHECK(slurp(out / "summary.csv").rfind("seed,horizon,epsilon,convergence_time", 0) == 0);
    // The two-agent certificate applies, so the bound curve ships by default.
    CHECK(slurp(out / "bounds.csv").rfind("k,bound,empirical", 0) == 0);

    // Byte-identical artifacts on a repeat invocation.
    const fs::path again = work_dir() / "run_again";
    CHECK(invoke("run " + cfg.string() + " --out " + again.string()).exit_code == 0);
    CHECK(slurp(again / "trajectory.csv") == traj);

    // Quiet mode silences the chatter but still writes files.
    const fs::path silent = work_dir() / "run_quiet";
    const CliResult q = invoke("run " + cfg.string() + " --quiet --out " + silent.string());
    CHECK(q.exit_code == 0);
    CHECK(q.out.empty());
    CHECK(fs::exists(silent / "trajectory.csv"));
}

TEST_CASE("invalid configs exit 1 and name the problem") {
    const fs::path bad = write_config("bad_key.json", R"({
      "version": 1,
      "scenario": {"builder": "two_agent", "flavor": "spicy"},
      "run": {"seed": 1}
    })");
    const CliResult r = invoke("run " + bad.string());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("flavor") != std::string::npos);

    const CliResult missing = invoke("run " + (work_dir() / "nope.json").string());
    CHECK(missing.exit_code == 1);

    const CliResult no_sub = invoke((work_dir() / "nope.json").string());
    CHECK(no_sub.exit_code == 1);

    const CliResult helped = invoke("--help");
    CHECK(helped.exit_code == 0);
    CHECK(helped.out.find("run") != std::string::npos);

    // Sweep requires a sweep block.
    const fs::path no_sweep = write_config("no_sweep.json", kRunnable);
    const CliResult s = invoke("sweep " + no_sweep.string());
    CHECK(s.exit_code == 1);
    CHECK(s.err.find("sweep") != std::string::npos);
}

TEST_CASE("a degenerate run exits 2 with provenance") {
    const fs::path cfg = write_config("degenerate.json", R"({
      "version": 1,
      "scenario": {"builder": "custom", "hypotheses": 2,
        "agents": [
          {"truth": [0.8, 0.2], "conditionals": [[0.8, 0.2], [0.2, 0.8]], "prior": [1.0, 0.0]},
          {"truth": [0.8, 0.2], "conditionals": [[0.8, 0.2], [0.2, 0.8]], "prior": [0.0, 1.0]}
        ]},
      "schedule": {"topology": "complete"},
      "run": {"seed": 5, "horizon": 50}
    })");
    const CliResult r = invoke("run " + cfg.string() + " --out " + (work_dir() / "deg").string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("agent") != std::string::npos);
    CHECK(r.err.find("step") != std::string::npos);
}

TEST_CASE("verify reports per-check lines and exits 3 on a failed bound") {
    const fs::path good = write_config("verify_ok.json", R"({
      "version": 1,
      "scenario": {"builder": "bernoulli_contrast", "agents": 6},
      "schedule": {"topology": "cycle"},
      "run": {"seed": 99, "horizon": 100},
      "verify": {"k_max": 60, "stochasticity_horizon": 32, "coverage_runs": 8}
    })");
    const CliResult ok = invoke("verify " + good.string());
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("[PASS] schedule stochasticity") != std::string::npos);
    CHECK(ok.out.find("[PASS] chain deviation") != std::string::npos);
    CHECK(ok.out.find("verification passed") != std::string::npos);
    CHECK(ok.out.find("[FAIL]") == std::string::npos);

    const fs::path broken = write_config("verify_broken.json", R"({
      "version": 1,
      "scenario": {"builder": "custom", "hypotheses": 2,
        "agents": [
          {"truth": [0.8, 0.2], "conditionals": [[0.8, 0.2], [0.2, 0.8]]},
          {"truth": [0.8, 0.2], "conditionals": [[0.8, 0.2], [0.2, 0.8]]}
        ]},
      "schedule": {"topology": "custom", "edges": [[0, 1]], "weights": "custom",
                   "matrix": [[0.4, 0.5], [0.5, 0.5]]},
      "run": {"seed": 7},
      "verify": {"checks": ["stochasticity"], "stochasticity_horizon": 8}
    })");
    const CliResult bad = invoke("verify " + broken.string());
    CHECK(bad.exit_code == 3);
    CHECK(bad.out.find("[FAIL]") != std::string::npos);
    CHECK(bad.out.find("verification FAILED") != std::string::npos);

    // The same broken matrix cannot even start a simulation run.
    const CliResult sim = invoke("run " + broken.string());
    CHECK(sim.exit_code == 1);
    CHECK(sim.err.find("schedule.matrix") != std::string::npos);

    // Quiet mode still surfaces failures on stderr.
    const CliResult quiet_bad = invoke("verify " + broken.string() + " --quiet");
    CHECK(quiet_bad.exit_code == 3);
    CHECK(quiet_bad.out.empty());
    CHECK(quiet_bad.err.find("[FAIL]") != std::string::npos);
}

TEST_CASE("sweep fills one row per cell and is worker-count invariant") {
    const fs::path cfg = write_config("sweep.json", R"({
      "version": 1,
      "scenario": {"builder": "one_informative", "agents": 4},
      "run": {"seed": 31, "horizon": 3000, "epsilon": 0.05},
      "sweep": {"family": "path", "sizes": [4, 6], "rules": ["geometric"], "runs": 4}
    })");
    const fs::path out1 = work_dir() / "sweep1";
    const fs::path out2 = work_dir() / "sweep2";
    const CliResult a = invoke("sweep " + cfg.string() + " --workers 1 --out " + out1.string());
    CHECK(a.exit_code == 0);
    const CliResult b = invoke("sweep " + cfg.string() + " --workers 4 --out " + out2.string());
    CHECK(b.exit_code == 0);

    const std::string csv = slurp(out1 / "sweep.csv");
    CHECK(csv.rfind("family,size,rule,runs,converged,median_time,mean_time", 0) == 0);
    CHECK(csv.find("path,4,geometric,4,") != std::string::npos);
    CHECK(csv.find("path,6,geometric,4,") != std::string::npos);
    CHECK(csv == slurp(out2 / "sweep.csv"));
}
