#pragma once

#include <cstddef>
#include <vector>

#include "reflectron/distribution.hpp"

namespace reflectron {

/**
 * @brief Column-stochastic transition matrix.
 *
 * Convention, fixed project-wide: entry (j, i) is Prob(j | i), the
 * probability of hopping from state i to state j. Columns are the
 * conditional distributions and sum to 1 within Tolerances::column_sum;
 * propagation of a distribution is the ordinary product P * v.
 *
 * Storage is column-major so the outgoing distribution of a state is
 * contiguous (`column(i)` is a pointer into the buffer).
 */
class StochasticMatrix {
public:
    StochasticMatrix() = default;

    /* Validating constructor from column-major data (data[i*n + j] = P(j|i)). */
    StochasticMatrix(std::size_t n, std::vector<double> column_major);

    /* Build from explicit columns; each column is one state's outgoing law. */
    static StochasticMatrix from_columns(const std::vector<std::vector<double>>& cols);

    /* All columns equal to pi: the rank-1 chain that mixes in one step. */
    static StochasticMatrix rank_one(const Distribution& pi);

    /* Uniform chain: every entry 1/n. */
    static StochasticMatrix uniform(std::size_t n);

    std::size_t n() const { return n_; }

    double p(std::size_t to, std::size_t from) const { return data_[from * n_ + to]; }

    const double* column(std::size_t from) const { return data_.data() + from * n_; }

    const std::vector<double>& raw() const { return data_; }

    /* One diffusion step: returns P * v. */
    Distribution apply(const Distribution& v) const;

    /* Support-graph tests used by the ergodicity precondition. */
    bool is_irreducible() const;
    bool is_aperiodic() const;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;  // column-major

    void validate() const;
};

}  // namespace reflectron
