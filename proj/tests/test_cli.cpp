#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWorkRoot = fs::temp_directory_path() / "qkdsim_cli_tests";

struct CommandResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

CommandResult run_cli(const std::string& args) {
    fs::create_directories(kWorkRoot);
    const fs::path out_file = kWorkRoot / "stdout.txt";
    const fs::path err_file = kWorkRoot / "stderr.txt";
    const std::string cmd = std::string(QKDSIM_BIN_PATH) + " " + args + " > " +
                            out_file.string() + " 2> " + err_file.string();
    const int raw = std::system(cmd.c_str());
    CommandResult result;
    result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    result.out = slurp(out_file);
    result.err = slurp(err_file);
    return result;
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = kWorkRoot / tag;
    fs::remove_all(dir);
    fs::create_directories(dir.parent_path());
    return dir;
}

std::vector<double> csv_column(const std::string& text, std::size_t index) {
    std::vector<double> values;
    std::stringstream lines(text);
    std::string line;
    bool header = true;
    while (std::getline(lines, line)) {
        if (header) {
            header = false;
            continue;
        }
        std::stringstream cells(line);
        std::string cell;
        for (std::size_t k = 0; k <= index; ++k) std::getline(cells, cell, ',');
        values.push_back(std::stod(cell));
    }
    return values;
}

} // namespace

TEST_CASE("a noiseless run reports zero qber through the summary") {
    const fs::path dir = fresh_dir("noiseless");
    const CommandResult r = run_cli("--iterations 2000 --rho 0 --turbulence off --seed 3 --out " +
                                    dir.string());
    REQUIRE(r.exit_code == 0);
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    REQUIRE(summary["qber"].get<double>() == 0.0);
    REQUIRE(summary["errors"].get<std::int64_t>() == 0);
}

TEST_CASE("reruns and different worker counts are byte-identical") {
    const fs::path dir_a = fresh_dir("det_a");
    const fs::path dir_b = fresh_dir("det_b");
    const fs::path dir_c = fresh_dir("det_c");
    const std::string common = "--iterations 4000 --seed 1337 --out ";
    REQUIRE(run_cli(common + dir_a.string() + " --workers 1").exit_code == 0);
    REQUIRE(run_cli(common + dir_b.string() + " --workers 1").exit_code == 0);
    REQUIRE(run_cli(common + dir_c.string() + " --workers 8").exit_code == 0);

    REQUIRE(slurp(dir_a / "rounds.csv") == slurp(dir_b / "rounds.csv"));
    REQUIRE(slurp(dir_a / "summary.json") == slurp(dir_b / "summary.json"));
    REQUIRE(slurp(dir_a / "rounds.csv") == slurp(dir_c / "rounds.csv"));
}

TEST_CASE("config file plus flag overrides behave by precedence") {
    const fs::path dir = fresh_dir("precedence");
    const fs::path cfg_file = kWorkRoot / "precedence.cfg";
    std::ofstream(cfg_file.string()) << "channel.rotation.theta = pi/4\n"
                                     << "run.iterations = 500\n"
                                     << "channel.turbulence.enabled = off\n";
    const CommandResult r =
        run_cli("--config " + cfg_file.string() + " --theta 0 --rho 1 --seed 9 --out " +
                dir.string());
    REQUIRE(r.exit_code == 0);
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    // theta was overridden to 0, so the armed rotation channel is inert.
    REQUIRE(summary["qber"].get<double>() == 0.0);
    REQUIRE(summary["rounds"].get<std::int64_t>() == 500);
    const std::string echo = summary["config_echo"].get<std::string>();
    REQUIRE(echo.find("channel.rotation.theta = 0\n") != std::string::npos);
}

TEST_CASE("the theta sweep reproduces the monotone qber shape") {
    const fs::path dir = fresh_dir("sweep_theta");
    const CommandResult r = run_cli(
        "--sweep theta=0,pi/8,pi/4,3pi/8,pi/2 --iterations 20000 --turbulence off --seed 6 "
        "--out " +
        dir.string());
    REQUIRE(r.exit_code == 0);
    const std::vector<double> qber = csv_column(slurp(dir / "sweep.csv"), 6);
    REQUIRE(qber.size() == 5);
    for (std::size_t k = 1; k < qber.size(); ++k) {
        REQUIRE(qber[k] >= qber[k - 1]);
    }
    REQUIRE(qber.front() == 0.0);
    REQUIRE(std::abs(qber[2] - 0.5) < 0.02);
    REQUIRE(std::abs(qber[4] - 2.0 / 3.0) < 0.02);
}

TEST_CASE("bad values exit with code 1 and a key-named diagnostic") {
    const CommandResult bad_rho = run_cli("--rho 1.5 --out " + fresh_dir("bad1").string());
    REQUIRE(bad_rho.exit_code == 1);
    REQUIRE(bad_rho.err.find("channel.rotation.rho") != std::string::npos);

    const fs::path cfg_file = kWorkRoot / "unknown_key.cfg";
    std::ofstream(cfg_file.string()) << "channel.rotation.speed = 3\n";
    const CommandResult unknown =
        run_cli("--config " + cfg_file.string() + " --out " + fresh_dir("bad2").string());
    REQUIRE(unknown.exit_code == 1);
    REQUIRE(unknown.err.find("channel.rotation.speed") != std::string::npos);

    const CommandResult bad_flag = run_cli("--no-such-flag 1");
    REQUIRE(bad_flag.exit_code == 1);

    const CommandResult empty_sweep =
        run_cli("--sweep theta= --out " + fresh_dir("bad3").string());
    REQUIRE(empty_sweep.exit_code == 1);
}

TEST_CASE("io failures exit with code 2") {
    const CommandResult missing_cfg = run_cli("--config /no/such/file.cfg --out " +
                                              fresh_dir("io1").string());
    REQUIRE(missing_cfg.exit_code == 2);

    const fs::path blocker = kWorkRoot / "blocking_file";
    std::ofstream(blocker.string()) << "x";
    const CommandResult blocked =
        run_cli("--iterations 10 --out " + (blocker / "nested").string());
    REQUIRE(blocked.exit_code == 2);
}

TEST_CASE("the version flag prints the tool version") {
    const CommandResult r = run_cli("--version");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("contrast sweeps expose both turbulence columns end to end") {
    const fs::path dir = fresh_dir("sweep_contrast");
    const CommandResult r =
        run_cli("--sweep gain=0.5,1.0 --contrast-turbulence --theta 0 --iterations 4000 "
                "--seed 12 --out " +
                dir.string());
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(dir / "sweep.csv");
    REQUIRE(csv.find("qber_turb_on") != std::string::npos);
    const std::vector<double> off_column = csv_column(csv, 6);
    REQUIRE(off_column.size() == 2);
    REQUIRE(off_column[0] == 0.0);
    REQUIRE(off_column[1] == 0.0);
}
