#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "reflectron/bench.hpp"
#include "reflectron/distribution.hpp"
#include "reflectron/errors.hpp"
#include "reflectron/markov.hpp"

using namespace reflectron;

namespace {

Distribution dist(std::vector<double> p) { return Distribution(std::move(p)); }

StochasticMatrix behavior_chain() {
    return reversible_chain_with_stationary(
        dist({0.04, 0.06, 0.225, 0.225, 0.225, 0.225}), 0.5);
}

bool records_equal(const std::vector<ScalingRecord>& a, const std::vector<ScalingRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].chain_id != b[i].chain_id || a[i].n != b[i].n || a[i].eps != b[i].eps ||
            a[i].delta != b[i].delta ||
            a[i].classical_diffusions != b[i].classical_diffusions ||
            a[i].quantum_diffusion_calls != b[i].quantum_diffusion_calls ||
            a[i].classical_checks != b[i].classical_checks ||
            a[i].quantum_check_reflections != b[i].quantum_check_reflections ||
            a[i].trials != b[i].trials)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("fnv1a64 reference vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("worker count comes from the environment") {
    unsetenv("REFLECTRON_THREADS");
    CHECK(bench_threads() == 1);
    setenv("REFLECTRON_THREADS", "3", 1);
    CHECK(bench_threads() == 3);
    setenv("REFLECTRON_THREADS", "0", 1);
    CHECK(bench_threads() == 1);
    setenv("REFLECTRON_THREADS", "-2", 1);
    CHECK(bench_threads() == 1);
    unsetenv("REFLECTRON_THREADS");
}

TEST_CASE("greedy flag choice hits dyadic targets exactly") {
    const Distribution pi = dist({0.5, 0.25, 0.125, 0.125});
    CHECK(flags_for_fraction(pi, 0.5) == ActionSet{0});
    CHECK(flags_for_fraction(pi, 0.25) == ActionSet{1});
    CHECK(flags_for_fraction(pi, 0.75) == ActionSet{0, 1});

    const ActionSet eighth = flags_for_fraction(pi, 0.125);
    REQUIRE(eighth.size() == 1);
    CHECK(pi[eighth[0]] == 0.125);

    const ActionSet half_uniform = flags_for_fraction(Distribution::uniform(4), 0.5);
    CHECK(half_uniform.size() == 2);

    CHECK_THROWS_AS(flags_for_fraction(pi, 1e-9), DegenerateData);
}

TEST_CASE("scaling runs are reproducible for any worker count") {
    const std::vector<EnsemblePoint> ensemble = {
        {4, 0.5, 0.5},
        {4, 0.5, 0.25},
    };
    AgentConfig cfg;
    cfg.k1 = 2;
    cfg.k3 = 8;

    unsetenv("REFLECTRON_THREADS");
    const auto solo = scaling_experiment(ensemble, 60, cfg, 19);
    const auto again = scaling_experiment(ensemble, 60, cfg, 19);
    CHECK(records_equal(solo, again));

    setenv("REFLECTRON_THREADS", "3", 1);
    const auto sharded = scaling_experiment(ensemble, 60, cfg, 19);
    unsetenv("REFLECTRON_THREADS");
    CHECK(records_equal(solo, sharded));

    const auto other_seed = scaling_experiment(ensemble, 60, cfg, 20);
    CHECK_FALSE(records_equal(solo, other_seed));
}

TEST_CASE("scaling records measure what they claim") {
    const std::vector<EnsemblePoint> ensemble = {{4, 0.5, 0.5}};
    AgentConfig cfg;
    cfg.k1 = 2;
    cfg.k3 = 8;
    const auto records = scaling_experiment(ensemble, 400, cfg, 3);
    REQUIRE(records.size() == 1);
    const ScalingRecord& r = records[0];

    CHECK(r.n == 4);
    CHECK(r.trials == 400);
    CHECK(r.eps == doctest::Approx(0.5).epsilon(1e-12));    // dyadic target is exact
    CHECK(r.delta == doctest::Approx(0.5).epsilon(1e-9));   // steered gap
    // Mean checks per deliberation for success chance eps is about 1/eps.
    CHECK(r.classical_checks > 1.5);
    CHECK(r.classical_checks < 2.5);
    CHECK(r.classical_diffusions > 0.0);
    CHECK(r.quantum_diffusion_calls > 0.0);
    CHECK(r.quantum_check_reflections > 0.0);
    // One mixing block per check, so the ratio is exactly t_mix.
    CHECK(r.classical_diffusions / r.classical_checks ==
          doctest::Approx(static_cast<double>(
              mixing_time_upper_bound(reversible_chain_with_stationary(
                                          dist({0.5, 0.25, 0.125, 0.125}), 0.5),
                                      std::exp(-2.0)))));

    CHECK_THROWS_AS(scaling_experiment(ensemble, 0, cfg, 3), DegenerateData);
}

TEST_CASE("behavior experiment matches the tailed law within noise") {
    const StochasticMatrix P = behavior_chain();
    AgentConfig cfg;
    cfg.k1 = 4;
    cfg.k3 = 8;
    const BehaviorResult res = behavior_experiment(P, {0, 1}, 20000, cfg, 7);

    CHECK(res.trials_classical + res.capped_classical == 20000);
    CHECK(res.trials_quantum + res.capped_quantum == 20000);
    CHECK(res.capped_classical == 0);
    CHECK(res.capped_quantum < 200);

    CHECK(res.sigma_classical > 0.0);
    CHECK(res.sigma_quantum > 0.0);
    CHECK(res.tv_classical <= 5.0 * res.sigma_classical);
    CHECK(res.tv_quantum <= 5.0 * res.sigma_quantum);
    CHECK(res.tv_between <= 7.0 * res.sigma_quantum);

    const BehaviorResult rerun = behavior_experiment(P, {0, 1}, 20000, cfg, 7);
    CHECK(res.tv_classical == rerun.tv_classical);
    CHECK(res.tv_quantum == rerun.tv_quantum);
    CHECK(res.tv_between == rerun.tv_between);
}

TEST_CASE("log-log fits recover exact power laws") {
    const std::vector<double> xs = {1.0, 2.0, 4.0, 8.0, 16.0};
    std::vector<double> linear, quadratic, root;
    for (double x : xs) {
        linear.push_back(3.0 * x);
        quadratic.push_back(0.5 * x * x);
        root.push_back(2.0 * std::sqrt(x));
    }

    const FitResult f1 = fit_loglog(xs, linear);
    CHECK(f1.slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f1.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(f1.r_squared == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(fit_loglog(xs, quadratic).slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit_loglog(xs, root).slope == doctest::Approx(0.5).epsilon(1e-12));

    std::vector<double> noisy = linear;
    for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] *= (i % 2 == 0) ? 1.05 : 0.95;
    const FitResult fn = fit_loglog(xs, noisy);
    CHECK(fn.slope > 0.9);
    CHECK(fn.slope < 1.1);
    CHECK(fn.r_squared > 0.95);
}

TEST_CASE("degenerate fit inputs are rejected") {
    CHECK_THROWS_AS(fit_loglog({1.0, 2.0}, {1.0, 2.0}), DegenerateData);
    CHECK_THROWS_AS(fit_loglog({1.0, 2.0, 3.0}, {1.0, 2.0}), DegenerateData);
    CHECK_THROWS_AS(fit_loglog({1.0, 2.0, 3.0}, {1.0, -2.0, 3.0}), DegenerateData);
    CHECK_THROWS_AS(fit_loglog({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0}), DegenerateData);
}

TEST_CASE("scaling fits read the right columns") {
    std::vector<ScalingRecord> records;
    const std::vector<double> epses = {0.5, 0.25, 0.125};
    const std::vector<double> deltas = {1.0, 0.25};
    for (double e : epses)
        for (double d : deltas) {
            ScalingRecord r;
            r.chain_id = "synthetic";
            r.n = 4;
            r.eps = e;
            r.delta = d;
            r.classical_diffusions = 10.0 / (e * d);
            r.quantum_diffusion_calls = 10.0 / std::sqrt(e * d);
            r.classical_checks = 3.0 / e;
            r.quantum_check_reflections = 2.0 / std::sqrt(e);
            r.trials = 100;
            records.push_back(r);
        }

    const ScalingFits fits = fit_scaling(records);
    CHECK(fits.classical_diffusions.slope == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fits.quantum_diffusions.slope == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fits.classical_checks.slope == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fits.quantum_checks.slope == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fits.speedup_ratio.slope == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fits.classical_diffusions.r_squared == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("scaling CSV and fits JSON formats") {
    ScalingRecord r;
    r.chain_id = "n4_gap0.5_eps0.5";
    r.n = 4;
    r.eps = 0.5;
    r.delta = 0.5;
    r.classical_diffusions = 18.0;
    r.quantum_diffusion_calls = 12.0;
    r.classical_checks = 2.0;
    r.quantum_check_reflections = 1.5;
    r.trials = 100;

    const std::string csv = scaling_to_csv({r}, 0xdeadbeefULL);
    CHECK(csv.rfind("# config_hash=0x00000000deadbeef\n", 0) == 0);
    CHECK(csv.find("chain_id,n,eps,delta,classical_diffusions,quantum_diffusion_calls,"
                   "classical_checks,quantum_check_reflections,trials\n") != std::string::npos);
    CHECK(csv.find("n4_gap0.5_eps0.5,4,") != std::string::npos);
    CHECK(csv == scaling_to_csv({r}, 0xdeadbeefULL));

    ScalingFits fits;
    fits.classical_diffusions = {1.02, 0.3, 0.999};
    fits.quantum_diffusions = {0.98, 0.2, 0.998};
    fits.classical_checks = {1.0, 0.1, 1.0};
    fits.quantum_checks = {1.0, 0.1, 1.0};
    fits.speedup_ratio = {0.95, 0.4, 0.97};
    const nlohmann::json j = nlohmann::json::parse(scaling_fits_to_json(fits, 0xdeadbeefULL));
    CHECK(j.at("config_hash").get<std::string>() == "0x00000000deadbeef");
    CHECK(j.at("fits").at("classical_diffusions_vs_inv_eps_delta").at("slope").get<double>() ==
          doctest::Approx(1.02));
    CHECK(j.at("fits").at("speedup_ratio_vs_inv_sqrt_eps_delta").at("r_squared").get<double>() ==
          doctest::Approx(0.97));
}
