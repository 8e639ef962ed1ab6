#pragma once

#include <cstdint>

namespace reflectron {

/*
 * Operation counters shared by every deliberation path. One classical
 * diffusion (a single application of P to a distribution) and one quantum
 * diffusion call (a single application of U_P or V_P, or their inverses)
 * are the same unit of account; a walk-operator application therefore
 * books 4 quantum diffusion calls.
 */
struct CostLedger {
    std::uint64_t classical_diffusions = 0;
    std::uint64_t classical_checks = 0;
    std::uint64_t quantum_diffusion_calls = 0;
    std::uint64_t quantum_check_reflections = 0;
    std::uint64_t aro_invocations = 0;
    std::uint64_t measurements = 0;
    std::uint64_t state_preparations = 0;

    CostLedger& operator+=(const CostLedger& o) {
        classical_diffusions += o.classical_diffusions;
        classical_checks += o.classical_checks;
        quantum_diffusion_calls += o.quantum_diffusion_calls;
        quantum_check_reflections += o.quantum_check_reflections;
        aro_invocations += o.aro_invocations;
        measurements += o.measurements;
        state_preparations += o.state_preparations;
        return *this;
    }

    bool operator==(const CostLedger&) const = default;
};

/*
 * Total primitive operations an impatient environment charges against its
 * time budget. aro_invocations is a meta-counter (each invocation's real
 * work is already priced into quantum_diffusion_calls), so it is excluded
 * to avoid double counting.
 */
inline std::uint64_t primitive_ops(const CostLedger& c) {
    return c.classical_diffusions + c.classical_checks + c.quantum_diffusion_calls +
           c.quantum_check_reflections + c.measurements + c.state_preparations;
}

}  // namespace reflectron
