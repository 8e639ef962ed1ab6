#pragma once

#include <cstddef>
#include <vector>

namespace reflectron {

/**
 * @brief Probability vector over clip / state indices.
 *
 * Entries are nonnegative and sum to 1 within Tolerances::column_sum.
 * Construction through `Distribution::checked` validates; the raw
 * constructor trusts the caller (used on hot paths that renormalize).
 */
struct Distribution {
    std::vector<double> p;

    Distribution() = default;
    explicit Distribution(std::vector<double> values) : p(std::move(values)) {}

    static Distribution checked(std::vector<double> values);
    static Distribution point_mass(std::size_t n, std::size_t at);
    static Distribution uniform(std::size_t n);

    std::size_t size() const { return p.size(); }
    double operator[](std::size_t i) const { return p[i]; }
    double& operator[](std::size_t i) { return p[i]; }

    /* L1-normalize in place; throws DegenerateBranch on zero mass. */
    void renormalize();
};

/**
 * @brief Total variation distance, (1/2) * sum_i |a_i - b_i|.
 * @throws DimensionMismatch if sizes differ.
 */
double variational_distance(const Distribution& a, const Distribution& b);

}  // namespace reflectron
