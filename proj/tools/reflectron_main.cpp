// reflectron: spectra / deliberate / bench / episodes front end.
//
// Configuration is an INI-style file (key = value under [section]
// headers); command-line flags override file values. Every output file
// carries the hash of the effective configuration in its header so data
// can be traced to the exact run that produced it. All randomness derives
// from one master seed; a fixed (config, seed) pair reproduces every
// output byte for byte.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "reflectron/bench.hpp"
#include "reflectron/chain_io.hpp"
#include "reflectron/classical_agents.hpp"
#include "reflectron/clip_network.hpp"
#include "reflectron/environment.hpp"
#include "reflectron/errors.hpp"
#include "reflectron/markov.hpp"
#include "reflectron/quantum_agent.hpp"
#include "reflectron/rng.hpp"
#include "reflectron/szegedy.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitAgent = 3;

// Thrown for any bad input (config, flags, files); mapped to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using ConfigMap = std::map<std::string, std::string>;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap out;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw InputError("config line " + std::to_string(lineno) + ": unclosed section");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty())
            throw InputError("config line " + std::to_string(lineno) + ": empty key");
        out[section.empty() ? key : section + "." + key] = trim(t.substr(eq + 1));
    }
    return out;
}

ConfigMap load_config(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string get_str(const ConfigMap& cfg, const std::string& key, const std::string& fallback) {
    const auto it = cfg.find(key);
    return it == cfg.end() ? fallback : it->second;
}

double get_num(const ConfigMap& cfg, const std::string& key, double fallback) {
    const auto it = cfg.find(key);
    if (it == cfg.end()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw InputError("");
        return v;
    } catch (const std::exception&) {
        throw InputError("config key " + key + ": not a number: " + it->second);
    }
}

std::uint64_t get_u64(const ConfigMap& cfg, const std::string& key, std::uint64_t fallback) {
    const double v = get_num(cfg, key, static_cast<double>(fallback));
    if (v < 0 || v != std::floor(v))
        throw InputError("config key " + key + ": expected a nonnegative integer");
    return static_cast<std::uint64_t>(v);
}

std::vector<double> get_list(const ConfigMap& cfg, const std::string& key,
                             const std::vector<double>& fallback) {
    const auto it = cfg.find(key);
    if (it == cfg.end()) return fallback;
    std::vector<double> out;
    std::istringstream is(it->second);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw InputError("config key " + key + ": not a number list: " + it->second);
        }
    }
    return out;
}

// The configuration a run actually used: file values, overridden by
// flags, with the master seed folded in. Hashed into output headers.
std::string canonical_config(const ConfigMap& cfg) {
    std::ostringstream os;
    for (const auto& [k, v] : cfg) os << k << "=" << v << "\n";
    return os.str();
}

std::string hash_hex(std::uint64_t h) {
    std::ostringstream os;
    os << "0x" << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write output file: " + path.string());
    out << text;
}

// ---------------------------------------------------------------------
// chain source: exactly one of a JSON file or a generated family.

reflectron::StochasticMatrix load_chain(const ConfigMap& cfg, std::uint64_t master_seed) {
    using namespace reflectron;
    const std::string file = get_str(cfg, "chain.file", "");
    const std::string source = get_str(cfg, "chain.source", file.empty() ? "random" : "file");
    if (source == "file") {
        if (file.empty()) throw InputError("chain.source=file needs chain.file");
        std::ifstream in(file);
        if (!in) throw InputError("cannot open chain file: " + file);
        std::stringstream buf;
        buf << in.rdbuf();
        try {
            return chain_from_json(buf.str());
        } catch (const Error& e) {
            throw InputError(std::string("bad chain file: ") + e.what());
        }
    }
    if (!file.empty())
        throw InputError("give either chain.file or a random chain spec, not both");
    const auto n = static_cast<std::size_t>(get_u64(cfg, "chain.n", 6));
    const double gap = get_num(cfg, "chain.target_gap", 0.0);
    const std::uint64_t seed = get_u64(cfg, "chain.seed", derive_seed(master_seed, 17));
    if (source == "random") return random_reversible_chain(n, seed, gap);
    throw InputError("chain.source must be file or random");
}

reflectron::AgentConfig agent_config(const ConfigMap& cfg, std::uint64_t master_seed) {
    reflectron::AgentConfig a;
    a.gamma = get_num(cfg, "agent.gamma", a.gamma);
    a.lambda = get_num(cfg, "agent.lambda", a.lambda);
    a.k1 = static_cast<int>(get_u64(cfg, "agent.k1", static_cast<std::uint64_t>(a.k1)));
    a.k3 = static_cast<int>(get_u64(cfg, "agent.k3", static_cast<std::uint64_t>(a.k3)));
    a.rng_seed = get_u64(cfg, "agent.seed", reflectron::derive_seed(master_seed, 23));
    return a;
}

reflectron::ReflectionMode parse_mode(const std::string& s) {
    if (s == "ideal") return reflectron::ReflectionMode::ideal;
    if (s == "approximate") return reflectron::ReflectionMode::approximate;
    throw InputError("reflection mode must be ideal or approximate: " + s);
}

reflectron::RetryMode parse_retry(const std::string& s) {
    if (s == "fresh") return reflectron::RetryMode::fresh;
    if (s == "recycle") return reflectron::RetryMode::recycle;
    throw InputError("retry mode must be fresh or recycle: " + s);
}

reflectron::ActionSet parse_flags(const ConfigMap& cfg, const std::string& key, std::size_t n) {
    const std::vector<double> raw = get_list(cfg, key, {0.0});
    reflectron::ActionSet flags;
    for (double v : raw) {
        if (v < 0 || v != std::floor(v) || static_cast<std::size_t>(v) >= n)
            throw InputError("config key " + key + ": bad action index");
        flags.push_back(static_cast<std::size_t>(v));
    }
    return flags;
}

// ---------------------------------------------------------------------

int cmd_spectra(const ConfigMap& cfg, std::uint64_t master_seed, std::uint64_t config_hash,
                const std::string& out_dir, const std::string& format) {
    using namespace reflectron;
    const StochasticMatrix P = load_chain(cfg, master_seed);
    const SpectralInfo info = spectral_info(P);
    const WalkSpec walk = make_walk_spec(P);
    const std::vector<double> phases = walk_eigenphases_on_span(walk);
    const bool gap_bound_ok = walk.phase_gap >= 2.0 * std::sqrt(walk.delta) - 1e-9;

    std::string text;
    if (format == "json") {
        nlohmann::json j;
        j["config_hash"] = hash_hex(config_hash);
        j["chain_hash"] = chain_hash(P);
        j["n"] = P.n();
        auto& evs = j["chain_eigenvalues"] = nlohmann::json::array();
        for (const auto& ev : info.eigenvalues)
            evs.push_back({{"re", ev.real()}, {"im", ev.imag()}});
        j["walk_eigenphases_on_span"] = phases;
        j["spectral_gap"] = walk.delta;
        j["phase_gap"] = walk.phase_gap;
        j["phase_gap_ge_2_sqrt_gap"] = gap_bound_ok;
        text = j.dump(2) + "\n";
    } else {
        std::ostringstream os;
        os << "# config_hash=" << hash_hex(config_hash) << "\n";
        os << "# chain_hash=" << chain_hash(P) << " n=" << P.n() << " spectral_gap="
           << format_double(walk.delta) << " phase_gap=" << format_double(walk.phase_gap)
           << " phase_gap_ge_2_sqrt_gap=" << (gap_bound_ok ? 1 : 0) << "\n";
        os << "kind,index,value_re,value_im\n";
        for (std::size_t i = 0; i < info.eigenvalues.size(); ++i)
            os << "chain_eigenvalue," << i << ',' << format_double(info.eigenvalues[i].real())
               << ',' << format_double(info.eigenvalues[i].imag()) << '\n';
        for (std::size_t i = 0; i < phases.size(); ++i)
            os << "walk_eigenphase," << i << ',' << format_double(phases[i]) << ",0\n";
        text = os.str();
    }
    write_file(std::filesystem::path(out_dir) / ("spectra." + format), text);
    std::cout << text;
    return kExitOk;
}

int cmd_deliberate(const ConfigMap& cfg, std::uint64_t master_seed, std::uint64_t config_hash,
                   const std::string& out_dir, const std::string& format) {
    using namespace reflectron;
    const StochasticMatrix P = load_chain(cfg, master_seed);
    const AgentConfig acfg = agent_config(cfg, master_seed);
    const std::string agent = get_str(cfg, "deliberate.agent", "classical");
    const std::uint64_t trials = get_u64(cfg, "deliberate.trials", 10000);
    if (trials == 0) throw InputError("deliberate.trials must be positive");
    ActionSet flags = parse_flags(cfg, "deliberate.flags", P.n());
    std::sort(flags.begin(), flags.end());
    const ReflectionMode mode = parse_mode(get_str(cfg, "deliberate.mode", "ideal"));
    const RetryMode retry = parse_retry(get_str(cfg, "deliberate.retry", "fresh"));
    const std::string engine = get_str(cfg, "deliberate.engine", "statevector");

    std::vector<std::uint64_t> counts(P.n(), 0);
    CostLedger total;
    std::mt19937_64 rng(derive_seed(master_seed, 29));

    if (agent == "classical") {
        const ClassicalDeliberator d(P, acfg);
        for (std::uint64_t t = 0; t < trials; ++t) counts[d.deliberate(flags, rng, &total).action] += 1;
    } else if (agent == "quantum" && engine == "statevector") {
        const QuantumDeliberator d(P, acfg, mode, retry);
        for (std::uint64_t t = 0; t < trials; ++t) counts[d.deliberate(flags, rng, &total).action] += 1;
    } else if (agent == "quantum" && engine == "span") {
        const SpanDeliberator d(P, acfg, mode, retry);
        for (std::uint64_t t = 0; t < trials; ++t) counts[d.deliberate(flags, rng, &total).action] += 1;
    } else {
        throw InputError("deliberate.agent must be classical or quantum (engine statevector|span)");
    }

    std::string text;
    if (format == "json") {
        nlohmann::json j;
        j["config_hash"] = hash_hex(config_hash);
        j["chain_hash"] = chain_hash(P);
        j["agent"] = agent;
        j["trials"] = trials;
        auto& freq = j["action_frequency"] = nlohmann::json::array();
        for (std::uint64_t c : counts)
            freq.push_back(static_cast<double>(c) / static_cast<double>(trials));
        j["ledger_means"] = nlohmann::json::parse(ledger_to_json(total));
        for (auto& [key, value] : j["ledger_means"].items())
            value = value.get<double>() / static_cast<double>(trials);
        text = j.dump(2) + "\n";
    } else {
        std::ostringstream os;
        os << "# config_hash=" << hash_hex(config_hash) << "\n";
        os << "# chain_hash=" << chain_hash(P) << " agent=" << agent << " trials=" << trials
           << "\n";
        os << "action,frequency\n";
        for (std::size_t i = 0; i < counts.size(); ++i)
            os << i << ','
               << format_double(static_cast<double>(counts[i]) / static_cast<double>(trials))
               << '\n';
        os << "ledger_mean_classical_diffusions,"
           << format_double(static_cast<double>(total.classical_diffusions) /
                            static_cast<double>(trials))
           << '\n';
        os << "ledger_mean_classical_checks,"
           << format_double(static_cast<double>(total.classical_checks) /
                            static_cast<double>(trials))
           << '\n';
        os << "ledger_mean_quantum_diffusion_calls,"
           << format_double(static_cast<double>(total.quantum_diffusion_calls) /
                            static_cast<double>(trials))
           << '\n';
        os << "ledger_mean_quantum_check_reflections,"
           << format_double(static_cast<double>(total.quantum_check_reflections) /
                            static_cast<double>(trials))
           << '\n';
        text = os.str();
    }
    write_file(std::filesystem::path(out_dir) / ("deliberate." + format), text);
    std::cout << text;
    return kExitOk;
}

int run_episodes(const ConfigMap& cfg, std::uint64_t master_seed, std::uint64_t config_hash,
                 const std::string& out_dir);

int cmd_bench(const ConfigMap& cfg, std::uint64_t master_seed, std::uint64_t config_hash,
              const std::string& out_dir, bool episodes_sweep) {
    using namespace reflectron;
    if (episodes_sweep) return run_episodes(cfg, master_seed, config_hash, out_dir);

    const auto n = static_cast<std::size_t>(get_u64(cfg, "bench.n", 8));
    const std::vector<double> eps = get_list(cfg, "bench.eps", {});
    const std::vector<double> gaps = get_list(cfg, "bench.gaps", {});
    if (eps.empty() || gaps.empty())
        throw InputError("bench needs nonempty bench.eps and bench.gaps lists");
    const std::uint64_t trials = get_u64(cfg, "bench.trials", 400);
    const ReflectionMode pricing = parse_mode(get_str(cfg, "bench.pricing", "approximate"));
    const double t_constant = get_num(cfg, "bench.t_constant", kCheckCapConstant);
    const AgentConfig acfg = agent_config(cfg, master_seed);

    std::vector<EnsemblePoint> ensemble;
    for (double g : gaps)
        for (double e : eps) ensemble.push_back({n, g, e});

    try {
        const std::vector<ScalingRecord> records = scaling_experiment(
            ensemble, trials, acfg, derive_seed(master_seed, 31), pricing, t_constant);
        const ScalingFits fits = fit_scaling(records);
        write_file(std::filesystem::path(out_dir) / "scaling.csv",
                   scaling_to_csv(records, config_hash));
        write_file(std::filesystem::path(out_dir) / "fits.json",
                   scaling_fits_to_json(fits, config_hash));
        std::cout << scaling_fits_to_json(fits, config_hash);
    } catch (const DegenerateData& e) {
        throw InputError(std::string("bench ensemble unusable: ") + e.what());
    }
    return kExitOk;
}

int run_episodes(const ConfigMap& cfg, std::uint64_t master_seed, std::uint64_t config_hash,
                 const std::string& out_dir) {
    using namespace reflectron;
    EnvironmentSpec env_spec;
    env_spec.percepts = static_cast<std::size_t>(get_u64(cfg, "episodes.percepts", 1));
    env_spec.actions = static_cast<std::size_t>(get_u64(cfg, "episodes.actions", 2));
    env_spec.switch_period = get_u64(cfg, "episodes.switch_period", 0);
    env_spec.time_budget = get_u64(cfg, "episodes.time_budget", 0);
    env_spec.seed = get_u64(cfg, "episodes.env_seed", derive_seed(master_seed, 37));
    const std::string order = get_str(cfg, "episodes.order", "round_robin");
    if (order == "uniform")
        env_spec.order = PerceptOrder::uniform;
    else if (order != "round_robin")
        throw InputError("episodes.order must be round_robin or uniform");
    {
        const std::vector<double> raw =
            get_list(cfg, "episodes.reward_map", std::vector<double>(env_spec.percepts, 0.0));
        for (double v : raw) {
            if (v < 0 || v != std::floor(v)) throw InputError("episodes.reward_map: bad action");
            env_spec.reward_map.push_back(static_cast<std::size_t>(v));
        }
    }
    const std::uint64_t steps = get_u64(cfg, "episodes.steps", 1000);

    const std::string kind_str = get_str(cfg, "episodes.subchain", "rank-one");
    SubchainKind kind;
    if (kind_str == "rank-one")
        kind = SubchainKind::rank_one;
    else if (kind_str == "steered-gap")
        kind = SubchainKind::steered_gap;
    else
        throw InputError("episodes.subchain must be rank-one or steered-gap");
    const double subchain_gap = get_num(cfg, "episodes.subchain_gap", 0.0);

    const AgentConfig acfg = agent_config(cfg, master_seed);
    const ReflectionMode pricing = parse_mode(get_str(cfg, "episodes.pricing", "approximate"));

    std::istringstream agents(get_str(cfg, "episodes.agents", "classical,quantum"));
    std::string name;
    nlohmann::json summary;
    summary["config_hash"] = hash_hex(config_hash);
    while (std::getline(agents, name, ',')) {
        name = trim(name);
        if (name.empty()) continue;
        const ClipNetwork net =
            ClipNetwork::two_layer(env_spec.percepts, env_spec.actions, kind, subchain_gap);
        std::unique_ptr<Agent> agent;
        if (name == "standard")
            agent = std::make_unique<StandardPsAgent>(net, acfg);
        else if (name == "classical")
            agent = std::make_unique<ClassicalRpsAgent>(net, acfg);
        else if (name == "quantum")
            agent = std::make_unique<QuantumRpsAgent>(net, acfg, pricing);
        else
            throw InputError("episodes.agents entries must be standard, classical or quantum");

        Environment env(env_spec);
        const EpisodeRecord rec = run_episode(*agent, env, steps);
        write_file(std::filesystem::path(out_dir) / ("episodes_" + name + ".csv"),
                   "# config_hash=" + hash_hex(config_hash) + "\n" + episode_to_csv(rec));
        summary["reward_rate"][name] = rec.reward_rate();
    }
    const std::string text = summary.dump(2) + "\n";
    write_file(std::filesystem::path(out_dir) / "episodes_summary.json", text);
    std::cout << text;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reflecting projective-simulation agents: spectra, deliberation, benchmarks"};
    app.require_subcommand(1);
    app.fallthrough();  // accept the global options after the subcommand too

    std::string config_path, out_dir = ".", format = "csv";
    std::int64_t seed_flag = -1;  // -1 = not given
    app.add_option("--config", config_path, "INI-style configuration file");
    app.add_option("--seed", seed_flag, "master seed (overrides config key 'seed')");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--format", format, "output encoding")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    CLI::App* spectra = app.add_subcommand("spectra", "chain and walk spectra, gap check");
    CLI::App* deliberate = app.add_subcommand("deliberate", "empirical deliberation output law");
    CLI::App* bench = app.add_subcommand("bench", "scaling experiment and log-log fits");
    bool episodes_sweep = false;
    bench->add_flag("--episodes", episodes_sweep, "run the episode sweep instead of scaling");
    CLI::App* episodes = app.add_subcommand("episodes", "agent-environment episodes");

    CLI11_PARSE(app, argc, argv);

    try {
        ConfigMap cfg = load_config(config_path);
        if (seed_flag >= 0) cfg["seed"] = std::to_string(seed_flag);
        const std::uint64_t master_seed = get_u64(cfg, "seed", 0);
        const std::uint64_t config_hash = reflectron::fnv1a64(canonical_config(cfg));
        std::filesystem::create_directories(out_dir);

        if (spectra->parsed()) return cmd_spectra(cfg, master_seed, config_hash, out_dir, format);
        if (deliberate->parsed())
            return cmd_deliberate(cfg, master_seed, config_hash, out_dir, format);
        if (bench->parsed())
            return cmd_bench(cfg, master_seed, config_hash, out_dir, episodes_sweep);
        if (episodes->parsed()) return run_episodes(cfg, master_seed, config_hash, out_dir);
        std::cerr << "no subcommand given\n";
        return kExitInput;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const reflectron::RetryCapExceeded& e) {
        std::cerr << "agent error: " << e.what() << "\n";
        return kExitAgent;
    } catch (const reflectron::Error& e) {
        std::cerr << "agent error: " << e.what() << "\n";
        return kExitAgent;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAgent;
    }
}
