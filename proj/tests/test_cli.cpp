#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "reflectron/chain_io.hpp"
#include "reflectron/stochastic_matrix.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return REFLECTRON_CLI_PATH; }

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + cli_path() + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

// Per-test scratch directory under the system temp root.
class Scratch {
public:
    explicit Scratch(const std::string& tag)
        : dir_(fs::temp_directory_path() / ("reflectron_cli_" + tag)) {
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    ~Scratch() { fs::remove_all(dir_); }

    const fs::path& dir() const { return dir_; }

    fs::path write(const std::string& name, const std::string& text) const {
        const fs::path p = dir_ / name;
        std::ofstream out(p, std::ios::binary);
        out << text;
        return p;
    }

private:
    fs::path dir_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_CASE("cli rejects empty and unknown invocations") {
    CHECK(run_cli("") != 0);
    CHECK(run_cli("frobnicate") != 0);
}

TEST_CASE("spectra on a generated chain is deterministic") {
    Scratch a("spectra_a"), b("spectra_b");
    CHECK(run_cli("--seed 5 --out " + a.dir().string() + " spectra") == 0);
    CHECK(run_cli("--seed 5 --out " + b.dir().string() + " spectra") == 0);

    const std::string csv_a = slurp(a.dir() / "spectra.csv");
    CHECK(first_line(csv_a).rfind("# config_hash=0x", 0) == 0);
    CHECK(csv_a.find("kind,index,value_re,value_im") != std::string::npos);
    CHECK(csv_a == slurp(b.dir() / "spectra.csv"));

    Scratch c("spectra_c");
    CHECK(run_cli("--seed 6 --out " + c.dir().string() + " spectra") == 0);
    CHECK(csv_a != slurp(c.dir() / "spectra.csv"));
}

TEST_CASE("spectra json reports the walk span and the gap bound") {
    Scratch s("spectra_json");
    CHECK(run_cli("--seed 5 --format json --out " + s.dir().string() + " spectra") == 0);
    const nlohmann::json j = nlohmann::json::parse(slurp(s.dir() / "spectra.json"));
    CHECK(j.at("n").get<std::size_t>() == 6);
    CHECK(j.at("chain_eigenvalues").size() == 6);
    CHECK(j.at("walk_eigenphases_on_span").size() == 11);
    CHECK(j.at("phase_gap_ge_2_sqrt_gap").get<bool>());
    CHECK(j.at("phase_gap").get<double>() > 0.0);
}

TEST_CASE("spectra reads a chain from a file") {
    using reflectron::StochasticMatrix;
    Scratch s("spectra_file");
    const fs::path chain =
        s.write("chain.json", reflectron::chain_to_json(StochasticMatrix::rank_one(
                                  reflectron::Distribution({0.25, 0.25, 0.5}))));
    const fs::path config = s.write("run.ini",
                                    "[chain]\n"
                                    "source = file\n"
                                    "file = " + chain.string() + "\n");
    CHECK(run_cli("--config " + config.string() + " --out " + s.dir().string() + " spectra") == 0);
    const std::string csv = slurp(s.dir() / "spectra.csv");
    CHECK(csv.find("chain_eigenvalue,") != std::string::npos);

    const fs::path garbage = s.write("garbage.json", "{broken");
    const fs::path bad = s.write("bad.ini",
                                 "[chain]\n"
                                 "source = file\n"
                                 "file = " + garbage.string() + "\n");
    CHECK(run_cli("--config " + bad.string() + " --out " + s.dir().string() + " spectra") == 2);
}

TEST_CASE("deliberate runs the classical agent") {
    Scratch s("delib_classical");
    const fs::path config = s.write("run.ini",
                                    "seed = 11\n"
                                    "[deliberate]\n"
                                    "agent = classical\n"
                                    "trials = 2000\n"
                                    "flags = 0, 1\n");
    CHECK(run_cli("--config " + config.string() + " --out " + s.dir().string() + " deliberate") ==
          0);
    const std::string csv = slurp(s.dir() / "deliberate.csv");
    CHECK(csv.find("action,frequency") != std::string::npos);
    CHECK(csv.find("ledger_mean_classical_diffusions,") != std::string::npos);
}

TEST_CASE("deliberate maps a capped quantum run to the agent exit code") {
    // One try per deliberation over thousands of trials: some deliberation
    // exhausts its cap with near certainty, whatever the seed.
    Scratch s("delib_capped");
    const fs::path config = s.write("run.ini",
                                    "seed = 11\n"
                                    "[agent]\n"
                                    "k3 = 1\n"
                                    "[deliberate]\n"
                                    "agent = quantum\n"
                                    "engine = span\n"
                                    "trials = 2000\n");
    CHECK(run_cli("--config " + config.string() + " --out " + s.dir().string() + " deliberate") ==
          3);
}

TEST_CASE("bench demands a usable ensemble") {
    Scratch s("bench_empty");
    const fs::path config = s.write("run.ini", "[bench]\ntrials = 5\n");
    CHECK(run_cli("--config " + config.string() + " --out " + s.dir().string() + " bench") == 2);
}

TEST_CASE("bench writes consistent scaling data and fits") {
    Scratch a("bench_a"), b("bench_b");
    const std::string config_text =
        "seed = 7\n"
        "[agent]\n"
        "k1 = 2\n"
        "[bench]\n"
        "n = 4\n"
        "eps = 0.5, 0.25, 0.125\n"
        "gaps = 0.5\n"
        "trials = 30\n";
    const fs::path config_a = a.write("run.ini", config_text);
    CHECK(run_cli("--config " + config_a.string() + " --out " + a.dir().string() + " bench") == 0);

    const std::string csv = slurp(a.dir() / "scaling.csv");
    const std::string head = first_line(csv);
    CHECK(head.rfind("# config_hash=0x", 0) == 0);

    const nlohmann::json fits = nlohmann::json::parse(slurp(a.dir() / "fits.json"));
    CHECK("# config_hash=" + fits.at("config_hash").get<std::string>() == head);
    CHECK(fits.at("fits").contains("classical_diffusions_vs_inv_eps_delta"));
    CHECK(fits.at("fits").contains("speedup_ratio_vs_inv_sqrt_eps_delta"));

    const fs::path config_b = b.write("run.ini", config_text);
    CHECK(run_cli("--config " + config_b.string() + " --out " + b.dir().string() + " bench") == 0);
    CHECK(csv == slurp(b.dir() / "scaling.csv"));
}

TEST_CASE("episode runs write per-agent logs and a summary") {
    Scratch s("episodes");
    const fs::path config = s.write("run.ini",
                                    "seed = 3\n"
                                    "[episodes]\n"
                                    "percepts = 1\n"
                                    "actions = 2\n"
                                    "reward_map = 1\n"
                                    "steps = 50\n"
                                    "agents = standard, classical\n");
    CHECK(run_cli("--config " + config.string() + " --out " + s.dir().string() + " episodes") ==
          0);

    const std::string csv = slurp(s.dir() / "episodes_classical.csv");
    CHECK(csv.find("step,percept,action,reward,internal_ops,timed_out") != std::string::npos);
    CHECK(slurp(s.dir() / "episodes_standard.csv").find("# config_hash=0x") == 0);

    const nlohmann::json summary = nlohmann::json::parse(slurp(s.dir() / "episodes_summary.json"));
    const double rate = summary.at("reward_rate").at("classical").get<double>();
    CHECK(rate >= 0.0);
    CHECK(rate <= 1.0);
    CHECK(summary.at("reward_rate").contains("standard"));

    // The same sweep is reachable through the bench front end.
    Scratch t("episodes_via_bench");
    const fs::path config2 = t.write("run.ini",
                                     "seed = 3\n"
                                     "[episodes]\n"
                                     "percepts = 1\n"
                                     "actions = 2\n"
                                     "reward_map = 1\n"
                                     "steps = 50\n"
                                     "agents = standard\n");
    CHECK(run_cli("--config " + config2.string() + " --out " + t.dir().string() +
                  " bench --episodes") == 0);
    CHECK(fs::exists(t.dir() / "episodes_standard.csv"));
    CHECK(fs::exists(t.dir() / "episodes_summary.json"));
}
