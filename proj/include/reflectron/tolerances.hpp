#pragma once

namespace reflectron {

/*
 * Central numeric tolerance record. Every module pulls its thresholds from
 * here instead of scattering magic numbers; tests pin against these values.
 */
struct Tolerances {
    double column_sum        = 1e-12;  // stochastic column normalization
    double stationary_residual = 1e-10;  // ||P pi - pi||_1 for accepted pi
    double leading_eigenvalue  = 1e-10;  // |lambda_1 - 1|
    double reversibility     = 1e-10;  // detailed-balance residual
    double unitarity         = 1e-9;   // ||U U^dag - I||_max on dense checks
    double span_confinement  = 1e-9;   // leakage outside the walk span
    double state_norm        = 1e-10;  // quantum state normalization
    double phase_match       = 1e-9;   // eigenphase identities
    double branch_floor      = 1e-14;  // POVM branch renormalization floor
    double gap_target_rel    = 0.10;   // relative miss allowed on target gaps
};

inline const Tolerances& tol() {
    static const Tolerances t{};
    return t;
}

}  // namespace reflectron
