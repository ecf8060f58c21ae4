#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int status;
    std::string output;
};

// Runs the CLI with stderr folded into the captured output.
Outcome run_cli(const std::string& args) {
    const std::string cmd = std::string(CRN_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) out += buf.data();
    const int raw = pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "crn_test_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("train, eval and baseline round trip through files") {
    const fs::path dir = scratch_dir();
    const fs::path cfg = dir / "cfg.json";
    std::ofstream(cfg) << R"({"preset": "fig6", "sweep": null, "seeds": [3],
                             "agent": {"warmup": 40, "batch_size": 16}})";

    const Outcome train = run_cli("train --config " + cfg.string() + " --episodes 5 --out " +
                                  (dir / "out").string());
    CHECK(train.status == 0);
    CHECK(train.output.find("final_mean_reward") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "fig6_seed3.csv"));
    CHECK(fs::exists(dir / "out" / "fig6_seed3.params"));
    CHECK(fs::exists(dir / "out" / "summary.csv"));

    const Outcome eval = run_cli("eval --checkpoint " + (dir / "out" / "fig6_seed3.params").string() +
                                 " --config " + cfg.string() + " --episodes 4");
    CHECK(eval.status == 0);
    CHECK(eval.output.find("seed=3 mean_reward=") != std::string::npos);

    const Outcome base = run_cli("baseline --policy random --config " + cfg.string() +
                                 " --episodes 4");
    CHECK(base.status == 0);
    CHECK(base.output.find("final_mean_reward") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("preset subcommand") {
    const fs::path dir = scratch_dir();
    const Outcome ok = run_cli("preset --name fig7 --seeds 1,2 --episodes 3 --out " + dir.string());
    CHECK(ok.status == 0);
    CHECK(fs::exists(dir / "fig7_dqn_seed2.csv"));
    CHECK(fs::exists(dir / "fig7_harvest_transmit_seed1.csv"));

    const Outcome bad = run_cli("preset --name fig9 --out " + dir.string());
    CHECK(bad.status != 0);
    CHECK(bad.output.find("fig9") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("usage errors exit nonzero with a diagnostic") {
    CHECK(run_cli("").status != 0);
    CHECK(run_cli("baseline --policy greedy --config x.json").status != 0);
    const Outcome missing = run_cli("train --config /nonexistent/cfg.json");
    CHECK(missing.status != 0);
    CHECK(missing.output.find("/nonexistent/cfg.json") != std::string::npos);

    const fs::path dir = scratch_dir();
    std::ofstream(dir / "bad.json") << R"({"env": {"theta": 1.5}})";
    const Outcome invalid = run_cli("train --config " + (dir / "bad.json").string());
    CHECK(invalid.status != 0);
    CHECK(invalid.output.find("theta") != std::string::npos);
    fs::remove_all(dir);
}
