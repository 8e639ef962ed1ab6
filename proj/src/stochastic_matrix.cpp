#include "reflectron/stochastic_matrix.hpp"

#include <cmath>
#include <numeric>
#include <queue>

#include "reflectron/errors.hpp"
#include "reflectron/tolerances.hpp"

namespace reflectron {

Distribution Distribution::checked(std::vector<double> values) {
    double sum = 0.0;
    for (double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw DimensionMismatch("Distribution: negative or non-finite entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > tol().column_sum)
        throw DimensionMismatch("Distribution: entries sum to " + std::to_string(sum));
    return Distribution(std::move(values));
}

Distribution Distribution::point_mass(std::size_t n, std::size_t at) {
    std::vector<double> v(n, 0.0);
    v.at(at) = 1.0;
    return Distribution(std::move(v));
}

Distribution Distribution::uniform(std::size_t n) {
    return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

void Distribution::renormalize() {
    double sum = std::accumulate(p.begin(), p.end(), 0.0);
    if (!(sum > 0.0)) throw DegenerateBranch("Distribution::renormalize: zero mass");
    for (double& v : p) v /= sum;
}

double variational_distance(const Distribution& a, const Distribution& b) {
    if (a.size() != b.size())
        throw DimensionMismatch("variational_distance: sizes " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return 0.5 * acc;
}

StochasticMatrix::StochasticMatrix(std::size_t n, std::vector<double> column_major)
    : n_(n), data_(std::move(column_major)) {
    if (data_.size() != n_ * n_)
        throw DimensionMismatch("StochasticMatrix: buffer size does not match n^2");
    validate();
}

StochasticMatrix StochasticMatrix::from_columns(const std::vector<std::vector<double>>& cols) {
    const std::size_t n = cols.size();
    std::vector<double> data(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        if (cols[i].size() != n)
            throw DimensionMismatch("StochasticMatrix::from_columns: ragged column");
        for (std::size_t j = 0; j < n; ++j) data[i * n + j] = cols[i][j];
    }
    return StochasticMatrix(n, std::move(data));
}

StochasticMatrix StochasticMatrix::rank_one(const Distribution& pi) {
    const std::size_t n = pi.size();
    std::vector<double> data(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) data[i * n + j] = pi[j];
    return StochasticMatrix(n, std::move(data));
}

StochasticMatrix StochasticMatrix::uniform(std::size_t n) {
    return rank_one(Distribution::uniform(n));
}

void StochasticMatrix::validate() const {
    if (n_ == 0) throw DimensionMismatch("StochasticMatrix: empty");
    for (std::size_t i = 0; i < n_; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            const double v = data_[i * n_ + j];
            if (!std::isfinite(v) || v < 0.0 || v > 1.0 + tol().column_sum)
                throw DimensionMismatch("StochasticMatrix: entry outside [0,1]");
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol().column_sum)
            throw DimensionMismatch("StochasticMatrix: column " + std::to_string(i) +
                                    " sums to " + std::to_string(sum));
    }
}

Distribution StochasticMatrix::apply(const Distribution& v) const {
    if (v.size() != n_) throw DimensionMismatch("StochasticMatrix::apply: size mismatch");
    std::vector<double> out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const double vi = v[i];
        if (vi == 0.0) continue;
        const double* col = column(i);
        for (std::size_t j = 0; j < n_; ++j) out[j] += col[j] * vi;
    }
    return Distribution(std::move(out));
}

namespace {

// BFS over the support graph; `forward` follows i -> j edges (P(j|i) > 0).
std::vector<int> reach(const StochasticMatrix& P, std::size_t start, bool forward) {
    const std::size_t n = P.n();
    std::vector<int> seen(n, 0);
    std::queue<std::size_t> q;
    seen[start] = 1;
    q.push(start);
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (std::size_t v = 0; v < n; ++v) {
            const double w = forward ? P.p(v, u) : P.p(u, v);
            if (w > 0.0 && !seen[v]) {
                seen[v] = 1;
                q.push(v);
            }
        }
    }
    return seen;
}

}  // namespace

bool StochasticMatrix::is_irreducible() const {
    const auto fwd = reach(*this, 0, true);
    const auto bwd = reach(*this, 0, false);
    for (std::size_t v = 0; v < n_; ++v)
        if (!fwd[v] || !bwd[v]) return false;
    return true;
}

bool StochasticMatrix::is_aperiodic() const {
    // Period of a strongly connected chain: gcd over all support edges (u,v)
    // of d(u) + 1 - d(v), where d is BFS depth from state 0. Aperiodic iff 1.
    const std::size_t n = n_;
    std::vector<long long> depth(n, -1);
    std::queue<std::size_t> q;
    depth[0] = 0;
    q.push(0);
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (std::size_t v = 0; v < n; ++v) {
            if (p(v, u) > 0.0 && depth[v] < 0) {
                depth[v] = depth[u] + 1;
                q.push(v);
            }
        }
    }
    long long g = 0;
    for (std::size_t u = 0; u < n; ++u) {
        if (depth[u] < 0) continue;
        for (std::size_t v = 0; v < n; ++v) {
            if (p(v, u) > 0.0 && depth[v] >= 0)
                g = std::gcd(g, depth[u] + 1 - depth[v]);
        }
    }
    return std::abs(g) == 1;
}

}  // namespace reflectron
