#include "reflectron/markov.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "reflectron/errors.hpp"
#include "reflectron/rng.hpp"
#include "reflectron/tolerances.hpp"

namespace reflectron {

namespace {

constexpr std::size_t kDenseLimit = 64;       // dense eigensolve up to here
constexpr std::uint64_t kPowerIterCap = 1000000;  // sweeps before giving up

Eigen::MatrixXd to_eigen(const StochasticMatrix& P) {
    const auto n = static_cast<Eigen::Index>(P.n());
    Eigen::MatrixXd M(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            M(j, i) = P.p(static_cast<std::size_t>(j), static_cast<std::size_t>(i));
    return M;
}

void require_ergodic(const StochasticMatrix& P, const char* who) {
    if (!P.is_irreducible())
        throw NonErgodic(std::string(who) + ": chain is reducible");
    if (!P.is_aperiodic())
        throw NonErgodic(std::string(who) + ": chain is periodic");
}

// Extract a probability vector from the (possibly complex) eigenvector
// attached to the eigenvalue nearest 1, then verify the fixed-point residual.
Distribution stationary_from_dense(const StochasticMatrix& P, const Eigen::MatrixXcd& vectors,
                                   const Eigen::VectorXcd& values) {
    const auto n = static_cast<Eigen::Index>(P.n());
    Eigen::Index lead = 0;
    double best = std::abs(values(0) - std::complex<double>(1.0, 0.0));
    for (Eigen::Index i = 1; i < n; ++i) {
        const double d = std::abs(values(i) - std::complex<double>(1.0, 0.0));
        if (d < best) {
            best = d;
            lead = i;
        }
    }
    if (best > tol().leading_eigenvalue)
        throw NumericalFailure("stationary_distribution: leading eigenvalue off by " +
                               std::to_string(best));

    Eigen::VectorXcd v = vectors.col(lead);
    // Rotate the global phase so the dominant component is real positive.
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    v *= std::conj(v(big)) / std::abs(v(big));

    std::vector<double> pi(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double x = v(i).real();
        if (x < 0.0) x = (x > -1e-9) ? 0.0 : x;  // tolerate eigensolver dust
        pi[static_cast<std::size_t>(i)] = x;
        sum += x;
    }
    if (!(sum > 0.0))
        throw NumericalFailure("stationary_distribution: degenerate eigenvector");
    for (double& x : pi) x /= sum;

    Distribution out(std::move(pi));
    const Distribution mapped = P.apply(out);
    double residual = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) residual += std::abs(mapped[i] - out[i]);
    if (residual > tol().stationary_residual)
        throw NumericalFailure("stationary_distribution: residual " + std::to_string(residual));
    return out;
}

Distribution stationary_by_power_iteration(const StochasticMatrix& P) {
    Distribution v = Distribution::uniform(P.n());
    // Half the acceptance tolerance per sweep so the final answer clears it.
    const double step_tol = 0.5 * tol().stationary_residual;
    for (std::uint64_t it = 0; it < kPowerIterCap; ++it) {
        Distribution next = P.apply(v);
        double moved = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) moved += std::abs(next[i] - v[i]);
        v = std::move(next);
        if (moved <= step_tol) {
            v.renormalize();
            return v;
        }
    }
    throw NoConvergence("stationary_distribution: power iteration cap hit");
}

}  // namespace

SpectralInfo spectral_info(const StochasticMatrix& P) {
    require_ergodic(P, "spectral_info");
    const Eigen::MatrixXd M = to_eigen(P);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(M, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success)
        throw NumericalFailure("spectral_info: eigensolver did not converge");

    SpectralInfo info;
    info.stationary = stationary_from_dense(P, solver.eigenvectors(), solver.eigenvalues());

    const auto n = static_cast<Eigen::Index>(P.n());
    info.eigenvalues.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) info.eigenvalues.push_back(solver.eigenvalues()(i));
    std::sort(info.eigenvalues.begin(), info.eigenvalues.end(),
              [](const std::complex<double>& a, const std::complex<double>& b) {
                  const double ma = std::abs(a), mb = std::abs(b);
                  if (ma != mb) return ma > mb;
                  if (a.real() != b.real()) return a.real() > b.real();
                  return a.imag() > b.imag();
              });

    if (std::abs(info.eigenvalues.front() - std::complex<double>(1.0, 0.0)) >
        tol().leading_eigenvalue)
        throw NumericalFailure("spectral_info: leading eigenvalue is not 1");
    // A stochastic matrix has leading eigenvalue exactly 1. The solver returns it
    // with a few ulps of error, which arccos(|lambda|) amplifies to ~1e-8 because
    // its derivative is unbounded at 1, so store the exact value instead.
    info.eigenvalues.front() = std::complex<double>(1.0, 0.0);
    info.gap = (P.n() == 1) ? 1.0 : 1.0 - std::abs(info.eigenvalues[1]);
    return info;
}

Distribution stationary_distribution(const StochasticMatrix& P) {
    require_ergodic(P, "stationary_distribution");
    if (P.n() <= kDenseLimit) {
        const Eigen::MatrixXd M = to_eigen(P);
        Eigen::EigenSolver<Eigen::MatrixXd> solver(M, true);
        if (solver.info() != Eigen::Success)
            throw NumericalFailure("stationary_distribution: eigensolver failed");
        return stationary_from_dense(P, solver.eigenvectors(), solver.eigenvalues());
    }
    return stationary_by_power_iteration(P);
}

bool is_reversible(const StochasticMatrix& P, const Distribution& pi) {
    if (pi.size() != P.n()) throw DimensionMismatch("is_reversible: size mismatch");
    for (std::size_t i = 0; i < P.n(); ++i)
        for (std::size_t j = i + 1; j < P.n(); ++j)
            if (std::abs(pi[i] * P.p(j, i) - pi[j] * P.p(i, j)) > tol().reversibility)
                return false;
    return true;
}

StochasticMatrix time_reversal(const StochasticMatrix& P, const Distribution& pi) {
    if (pi.size() != P.n()) throw DimensionMismatch("time_reversal: size mismatch");
    const std::size_t n = P.n();
    std::vector<double> data(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        if (pi[j] <= tol().branch_floor)
            throw ZeroStationaryMass("time_reversal: stationary mass ~0 at state " +
                                     std::to_string(j));
        // P*(i|j) = pi_i P(j|i) / pi_j
        for (std::size_t i = 0; i < n; ++i) data[j * n + i] = pi[i] * P.p(j, i) / pi[j];
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += data[j * n + i];
        // pi is a fixed point, so each column already sums to 1 up to
        // rounding; scrub the rounding so the constructor's check passes.
        for (std::size_t i = 0; i < n; ++i) data[j * n + i] /= sum;
    }
    return StochasticMatrix(n, std::move(data));
}

Distribution mix(const StochasticMatrix& P, const Distribution& pi0, std::uint64_t t,
                 CostLedger* ledger) {
    if (pi0.size() != P.n()) throw DimensionMismatch("mix: size mismatch");
    Distribution v = pi0;
    for (std::uint64_t i = 0; i < t; ++i) v = P.apply(v);
    if (ledger) ledger->classical_diffusions += t;
    return v;
}

std::uint64_t mixing_time_upper_bound(const SpectralInfo& info, double eps_prime) {
    if (!(eps_prime > 0.0) || eps_prime > 1.0)
        throw DimensionMismatch("mixing_time_upper_bound: eps' must be in (0, 1]");
    if (!(info.gap > 0.0))
        throw NonErgodic("mixing_time_upper_bound: zero spectral gap");
    double k0 = 0.0;
    for (std::size_t i = 0; i < info.stationary.size(); ++i) {
        const double pi_i = info.stationary[i];
        if (pi_i <= 0.0)
            throw ZeroStationaryMass("mixing_time_upper_bound: pi has a zero entry");
        k0 = std::max(k0, std::log(1.0 / pi_i));
    }
    const double bound = (k0 + std::log(1.0 / eps_prime)) / info.gap;
    return static_cast<std::uint64_t>(std::ceil(bound));
}

std::uint64_t mixing_time_upper_bound(const StochasticMatrix& P, double eps_prime) {
    return mixing_time_upper_bound(spectral_info(P), eps_prime);
}

StochasticMatrix chain_power(const StochasticMatrix& P, std::uint64_t t) {
    const auto n = static_cast<Eigen::Index>(P.n());
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd base = to_eigen(P);
    while (t > 0) {
        if (t & 1) acc = base * acc;
        t >>= 1;
        if (t > 0) base = base * base;
    }
    std::vector<double> data(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) sum += std::max(0.0, acc(j, i));
        for (Eigen::Index j = 0; j < n; ++j)
            data[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                 static_cast<std::size_t>(j)] = std::max(0.0, acc(j, i)) / sum;
    }
    return StochasticMatrix(P.n(), std::move(data));
}

namespace {

// Convex-mix a nonnegative-spectrum chain toward the identity (shrinks the
// gap) or toward the rank-1 chain on its stationary vector (widens it),
// landing |lambda_2| exactly at 1 - target. Both mixes preserve pi and
// reversibility.
StochasticMatrix steer_gap(const StochasticMatrix& lazy, double target_gap) {
    const SpectralInfo info = spectral_info(lazy);
    const double have = info.gap;
    const std::size_t nn = lazy.n();
    std::vector<double> out(nn * nn);
    if (target_gap >= have) {
        const double beta = (1.0 - target_gap) / (1.0 - have);
        for (std::size_t i = 0; i < nn; ++i)
            for (std::size_t j = 0; j < nn; ++j)
                out[i * nn + j] = beta * lazy.p(j, i) + (1.0 - beta) * info.stationary[j];
    } else {
        const double c = target_gap / have;
        for (std::size_t i = 0; i < nn; ++i)
            for (std::size_t j = 0; j < nn; ++j)
                out[i * nn + j] = c * lazy.p(j, i) + (i == j ? 1.0 - c : 0.0);
    }
    StochasticMatrix chain(nn, std::move(out));

    const double achieved = spectral_info(chain).gap;
    if (std::abs(achieved - target_gap) > tol().gap_target_rel * target_gap)
        throw GapUnreachable("steer_gap: achieved gap " + std::to_string(achieved) +
                             " misses target " + std::to_string(target_gap));
    return chain;
}

StochasticMatrix half_lazy(const StochasticMatrix& P) {
    const std::size_t n = P.n();
    std::vector<double> half(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            half[i * n + j] = 0.5 * P.p(j, i) + (i == j ? 0.5 : 0.0);
    return StochasticMatrix(n, std::move(half));
}

}  // namespace

StochasticMatrix reversible_chain_with_stationary(const Distribution& pi, double target_gap) {
    const std::size_t n = pi.size();
    if (n < 2) throw DimensionMismatch("reversible_chain_with_stationary: need n >= 2");
    for (std::size_t i = 0; i < n; ++i)
        if (!(pi[i] > 0.0))
            throw DimensionMismatch("reversible_chain_with_stationary: pi must be positive");
    if (target_gap != 0.0 && (!(target_gap > 0.0) || target_gap > 1.0))
        throw GapUnreachable("reversible_chain_with_stationary: target gap outside (0, 1]");

    // Metropolis over the uniform complete-graph proposal.
    std::vector<double> data(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double stay = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double move = std::min(1.0, pi[j] / pi[i]) / static_cast<double>(n);
            data[i * n + j] = move;
            stay -= move;
        }
        data[i * n + i] = stay;
    }
    StochasticMatrix lazy = half_lazy(StochasticMatrix(n, std::move(data)));
    if (target_gap == 0.0) return lazy;
    return steer_gap(lazy, target_gap);
}

StochasticMatrix random_reversible_chain(std::size_t n, std::uint64_t seed, double target_gap) {
    if (n < 2) throw DimensionMismatch("random_reversible_chain: need n >= 2");
    if (target_gap != 0.0 && (!(target_gap > 0.0) || target_gap > 1.0))
        throw GapUnreachable("random_reversible_chain: target gap outside (0, 1]");

    std::mt19937_64 rng(seed);

    // Random walk on a complete weighted graph: symmetric positive weights
    // give reversibility with respect to pi_i ~ sum_k w(i,k).
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double v = 0.5 + uniform01(rng);
            w[i][j] = v;
            w[j][i] = v;
        }

    std::vector<std::vector<double>> cols(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += w[i][j];
        for (std::size_t j = 0; j < n; ++j) cols[i][j] = w[i][j] / sum;
    }

    // Half-lazy step pushes the (real, reversible) spectrum into [0, 1] so
    // the second eigenvalue can be steered by convex mixing alone.
    StochasticMatrix lazy = half_lazy(StochasticMatrix::from_columns(cols));
    if (target_gap == 0.0) return lazy;
    return steer_gap(lazy, target_gap);
}

StochasticMatrix metropolis_ring_chain(const std::vector<double>& w) {
    const std::size_t n = w.size();
    if (n < 3) throw DimensionMismatch("metropolis_ring_chain: need n >= 3");
    for (double v : w)
        if (!(v > 0.0)) throw DimensionMismatch("metropolis_ring_chain: weights must be > 0");

    std::vector<double> data(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t left = (i + n - 1) % n;
        const std::size_t right = (i + 1) % n;
        // Lazy proposal (stay with prob 1/2) keeps the chain aperiodic even
        // for uniform weights on an even cycle.
        const double to_left = 0.25 * std::min(1.0, w[left] / w[i]);
        const double to_right = 0.25 * std::min(1.0, w[right] / w[i]);
        data[i * n + left] += to_left;
        data[i * n + right] += to_right;
        data[i * n + i] += 1.0 - to_left - to_right;
    }
    return StochasticMatrix(n, std::move(data));
}

}  // namespace reflectron
