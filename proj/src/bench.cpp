#include "reflectron/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "reflectron/clip_network.hpp"
#include "reflectron/errors.hpp"
#include "reflectron/markov.hpp"
#include "reflectron/rng.hpp"

namespace reflectron {

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

unsigned bench_threads() {
    const char* raw = std::getenv("REFLECTRON_THREADS");
    if (raw == nullptr) return 1;
    const long v = std::strtol(raw, nullptr, 10);
    return v > 1 ? static_cast<unsigned>(v) : 1u;
}

namespace {

// pi_i ~ 2^{-(i+1)}, last entry doubled so the masses sum to exactly 1.
Distribution dyadic_stationary(std::size_t n) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i + 1 < n; ++i) p[i] = std::ldexp(1.0, -static_cast<int>(i) - 1);
    p[n - 1] = std::ldexp(1.0, -static_cast<int>(n) + 1);
    return Distribution(std::move(p));
}

// Runs `body(trial)` for every trial index, sharded over bench_threads()
// contiguous blocks. `body` must only touch its own shard's accumulator.
template <typename Body>
void for_each_trial(std::uint64_t trials, const Body& body) {
    const unsigned workers = std::min<std::uint64_t>(bench_threads(), trials ? trials : 1);
    if (workers <= 1) {
        for (std::uint64_t t = 0; t < trials; ++t) body(t);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::uint64_t chunk = (trials + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t lo = w * chunk;
        const std::uint64_t hi = std::min(trials, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::uint64_t t = lo; t < hi; ++t) body(t);
        });
    }
    for (std::thread& th : pool) th.join();
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string hash_hex(std::uint64_t h) {
    std::ostringstream os;
    os << "0x" << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

}  // namespace

ActionSet flags_for_fraction(const Distribution& pi, double target) {
    if (!(target > 0.0) || target > 1.0)
        throw DegenerateData("flags_for_fraction: target mass outside (0, 1]");
    std::vector<std::size_t> order(pi.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&pi](std::size_t a, std::size_t b) { return pi[a] > pi[b]; });

    ActionSet flags;
    double mass = 0.0;
    for (std::size_t i : order) {
        if (mass >= 0.8 * target) break;
        if (mass + pi[i] <= 1.2 * target) {
            flags.push_back(i);
            mass += pi[i];
        }
    }
    if (!(mass >= 0.8 * target))
        throw DegenerateData("flags_for_fraction: no flag set reaches the target mass window");
    std::sort(flags.begin(), flags.end());
    return flags;
}

std::vector<ScalingRecord> scaling_experiment(const std::vector<EnsemblePoint>& ensemble,
                                              std::uint64_t trials, const AgentConfig& cfg,
                                              std::uint64_t seed, ReflectionMode pricing,
                                              double t_constant) {
    if (trials == 0) throw DegenerateData("scaling_experiment: need at least one trial");
    std::vector<ScalingRecord> records;
    records.reserve(ensemble.size());

    for (std::size_t idx = 0; idx < ensemble.size(); ++idx) {
        const EnsemblePoint& pt = ensemble[idx];
        const StochasticMatrix P =
            reversible_chain_with_stationary(dyadic_stationary(pt.n), pt.target_gap);
        const SpectralInfo info = spectral_info(P);
        const ActionSet flags = flags_for_fraction(info.stationary, pt.flag_fraction);

        const ClassicalDeliberator classical(P, cfg);
        const SpanDeliberator quantum(P, cfg, pricing, RetryMode::fresh, t_constant);

        const std::uint64_t point_seed = derive_seed(seed, idx);
        const unsigned workers = std::min<std::uint64_t>(bench_threads(), trials);
        std::vector<CostLedger> c_sums(std::max(1u, workers));
        std::vector<CostLedger> q_sums(std::max(1u, workers));
        const std::uint64_t chunk = (trials + std::max(1u, workers) - 1) / std::max(1u, workers);

        for_each_trial(trials, [&](std::uint64_t t) {
            const std::size_t shard = static_cast<std::size_t>(t / chunk);
            std::mt19937_64 rng_c(derive_seed(point_seed, 2 * t));
            std::mt19937_64 rng_q(derive_seed(point_seed, 2 * t + 1));
            // A capped deliberation's cost is still cost: the ledger is
            // flushed before RetryCapExceeded leaves the deliberator.
            try {
                classical.deliberate(flags, rng_c, &c_sums[shard]);
            } catch (const RetryCapExceeded&) {
            }
            try {
                quantum.deliberate(flags, rng_q, &q_sums[shard]);
            } catch (const RetryCapExceeded&) {
            }
        });

        CostLedger c_total, q_total;
        for (const CostLedger& c : c_sums) c_total += c;
        for (const CostLedger& q : q_sums) q_total += q;

        double eps = 0.0;
        for (std::size_t a : flags) eps += info.stationary[a];

        ScalingRecord rec;
        {
            std::ostringstream id;
            id << "n" << pt.n << "_gap" << std::setprecision(6) << pt.target_gap << "_eps"
               << std::setprecision(6) << pt.flag_fraction;
            rec.chain_id = id.str();
        }
        rec.n = pt.n;
        rec.eps = eps;
        rec.delta = info.gap;
        const double den = static_cast<double>(trials);
        rec.classical_diffusions = static_cast<double>(c_total.classical_diffusions) / den;
        rec.quantum_diffusion_calls = static_cast<double>(q_total.quantum_diffusion_calls) / den;
        rec.classical_checks = static_cast<double>(c_total.classical_checks) / den;
        rec.quantum_check_reflections =
            static_cast<double>(q_total.quantum_check_reflections) / den;
        rec.trials = trials;
        records.push_back(std::move(rec));
    }
    return records;
}

BehaviorResult behavior_experiment(const StochasticMatrix& P, const ActionSet& flagged,
                                   std::uint64_t trials, const AgentConfig& cfg,
                                   std::uint64_t seed, ReflectionMode mode, RetryMode retry) {
    if (trials == 0) throw DegenerateData("behavior_experiment: need at least one trial");
    ActionSet flags = flagged;
    std::sort(flags.begin(), flags.end());

    const SpectralInfo info = spectral_info(P);
    const Distribution tailed = tailed_distribution(info.stationary, flags);
    const std::size_t n = P.n();

    const ClassicalDeliberator classical(P, cfg);

    struct Shard {
        std::vector<std::uint64_t> counts_c, counts_q;
        std::uint64_t capped_c = 0, capped_q = 0;
    };
    const unsigned workers =
        static_cast<unsigned>(std::min<std::uint64_t>(bench_threads(), trials));
    std::vector<Shard> shards(std::max(1u, workers));
    for (Shard& s : shards) {
        s.counts_c.assign(n, 0);
        s.counts_q.assign(n, 0);
    }
    const std::uint64_t chunk = (trials + std::max(1u, workers) - 1) / std::max(1u, workers);
    const std::uint64_t seed_c = derive_seed(seed, 0);
    const std::uint64_t seed_q = derive_seed(seed, 1);

    // One state-vector deliberator per worker: its marginal cache is
    // mutable and must not be shared across threads.
    std::vector<std::unique_ptr<QuantumDeliberator>> quantum(std::max(1u, workers));
    for (auto& q : quantum) q = std::make_unique<QuantumDeliberator>(P, cfg, mode, retry);

    for_each_trial(trials, [&](std::uint64_t t) {
        const std::size_t shard = static_cast<std::size_t>(t / chunk);
        Shard& s = shards[shard];
        std::mt19937_64 rng_c(derive_seed(seed_c, t));
        std::mt19937_64 rng_q(derive_seed(seed_q, t));
        try {
            s.counts_c[classical.deliberate(flags, rng_c).action] += 1;
        } catch (const RetryCapExceeded&) {
            s.capped_c += 1;
        }
        try {
            s.counts_q[quantum[shard]->deliberate(flags, rng_q).action] += 1;
        } catch (const RetryCapExceeded&) {
            s.capped_q += 1;
        }
    });

    std::vector<std::uint64_t> counts_c(n, 0), counts_q(n, 0);
    BehaviorResult out;
    for (const Shard& s : shards) {
        for (std::size_t i = 0; i < n; ++i) {
            counts_c[i] += s.counts_c[i];
            counts_q[i] += s.counts_q[i];
        }
        out.capped_classical += s.capped_c;
        out.capped_quantum += s.capped_q;
    }
    out.trials_classical = trials - out.capped_classical;
    out.trials_quantum = trials - out.capped_quantum;
    if (out.trials_classical == 0 || out.trials_quantum == 0)
        throw DegenerateData("behavior_experiment: every deliberation hit the retry cap");

    auto empirical = [n](const std::vector<std::uint64_t>& counts, std::uint64_t total) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i)
            p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
        return Distribution(std::move(p));
    };
    const Distribution emp_c = empirical(counts_c, out.trials_classical);
    const Distribution emp_q = empirical(counts_q, out.trials_quantum);

    auto tv_sigma = [&tailed](std::uint64_t total) {
        double s = 0.0;
        for (std::size_t i = 0; i < tailed.size(); ++i) s += tailed[i] * (1.0 - tailed[i]);
        return 0.5 * std::sqrt(s / static_cast<double>(total));
    };
    out.tv_classical = variational_distance(emp_c, tailed);
    out.tv_quantum = variational_distance(emp_q, tailed);
    out.tv_between = variational_distance(emp_c, emp_q);
    out.sigma_classical = tv_sigma(out.trials_classical);
    out.sigma_quantum = tv_sigma(out.trials_quantum);
    return out;
}

FitResult fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw DegenerateData("fit_loglog: size mismatch");
    if (xs.size() < 3) throw DegenerateData("fit_loglog: need at least 3 points");
    const std::size_t n = xs.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw DegenerateData("fit_loglog: values must be positive");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw DegenerateData("fit_loglog: x values carry no spread");

    FitResult fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
    return fit;
}

ScalingFits fit_scaling(const std::vector<ScalingRecord>& records) {
    std::vector<double> inv_ed, inv_sqrt_ed, inv_e, inv_sqrt_e;
    std::vector<double> cd, qd, cc, qc, ratio;
    for (const ScalingRecord& r : records) {
        inv_ed.push_back(1.0 / (r.eps * r.delta));
        inv_sqrt_ed.push_back(1.0 / std::sqrt(r.eps * r.delta));
        inv_e.push_back(1.0 / r.eps);
        inv_sqrt_e.push_back(1.0 / std::sqrt(r.eps));
        cd.push_back(r.classical_diffusions);
        qd.push_back(r.quantum_diffusion_calls);
        cc.push_back(r.classical_checks);
        qc.push_back(r.quantum_check_reflections);
        ratio.push_back(r.classical_diffusions / r.quantum_diffusion_calls);
    }
    ScalingFits fits;
    fits.classical_diffusions = fit_loglog(inv_ed, cd);
    fits.quantum_diffusions = fit_loglog(inv_sqrt_ed, qd);
    fits.classical_checks = fit_loglog(inv_e, cc);
    fits.quantum_checks = fit_loglog(inv_sqrt_e, qc);
    fits.speedup_ratio = fit_loglog(inv_sqrt_ed, ratio);
    return fits;
}

std::string scaling_to_csv(const std::vector<ScalingRecord>& records, std::uint64_t config_hash) {
    std::ostringstream os;
    os << "# config_hash=" << hash_hex(config_hash) << '\n';
    os << "chain_id,n,eps,delta,classical_diffusions,quantum_diffusion_calls,"
          "classical_checks,quantum_check_reflections,trials\n";
    for (const ScalingRecord& r : records) {
        os << r.chain_id << ',' << r.n << ',' << format_double(r.eps) << ','
           << format_double(r.delta) << ',' << format_double(r.classical_diffusions) << ','
           << format_double(r.quantum_diffusion_calls) << ',' << format_double(r.classical_checks)
           << ',' << format_double(r.quantum_check_reflections) << ',' << r.trials << '\n';
    }
    return os.str();
}

std::string scaling_fits_to_json(const ScalingFits& fits, std::uint64_t config_hash) {
    auto fit_json = [](const FitResult& f) {
        return nlohmann::json{
            {"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
    };
    nlohmann::json j{
        {"config_hash", hash_hex(config_hash)},
        {"fits",
         {{"classical_diffusions_vs_inv_eps_delta", fit_json(fits.classical_diffusions)},
          {"quantum_diffusions_vs_inv_sqrt_eps_delta", fit_json(fits.quantum_diffusions)},
          {"classical_checks_vs_inv_eps", fit_json(fits.classical_checks)},
          {"quantum_checks_vs_inv_sqrt_eps", fit_json(fits.quantum_checks)},
          {"speedup_ratio_vs_inv_sqrt_eps_delta", fit_json(fits.speedup_ratio)}}},
    };
    return j.dump(2) + "\n";
}

}  // namespace reflectron
