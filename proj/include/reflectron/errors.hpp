#pragma once

#include <stdexcept>
#include <string>

namespace reflectron {

/* Base class for all artifact errors so callers can catch the whole family. */
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/* Chain is reducible or periodic; no unique stationary distribution. */
class NonErgodic : public Error {
public:
    explicit NonErgodic(const std::string& what) : Error(what) {}
};

/* Iterative solver exhausted its budget without meeting tolerance. */
class NoConvergence : public Error {
public:
    explicit NoConvergence(const std::string& what) : Error(what) {}
};

/* Dense eigensolver failed to converge or returned unusable output. */
class NumericalFailure : public Error {
public:
    explicit NumericalFailure(const std::string& what) : Error(what) {}
};

/* Time reversal requested where some stationary component is ~0. */
class ZeroStationaryMass : public Error {
public:
    explicit ZeroStationaryMass(const std::string& what) : Error(what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

/* random_reversible_chain cannot reach the requested spectral gap. */
class GapUnreachable : public Error {
public:
    explicit GapUnreachable(const std::string& what) : Error(what) {}
};

/* Detailed balance fails where an operation requires a reversible chain. */
class NotReversible : public Error {
public:
    explicit NotReversible(const std::string& what) : Error(what) {}
};

/* A clip inside a percept subnetwork has zero outgoing weight. */
class DanglingClip : public Error {
public:
    explicit DanglingClip(const std::string& what) : Error(what) {}
};

/* Flagged set carries no stationary mass; tailing is undefined. */
class ZeroFlagMass : public Error {
public:
    explicit ZeroFlagMass(const std::string& what) : Error(what) {}
};

/* Deliberation loop exceeded its retry cap. */
class RetryCapExceeded : public Error {
public:
    explicit RetryCapExceeded(const std::string& what) : Error(what) {}
};

/* flag_update called with an action not currently flagged. */
class ActionNotFlagged : public Error {
public:
    explicit ActionNotFlagged(const std::string& what) : Error(what) {}
};

/* Approximate reflection applied to a state whose ancillas are not |0...0>. */
class AncillaNotClean : public Error {
public:
    explicit AncillaNotClean(const std::string& what) : Error(what) {}
};

/* Projective branch has vanishing probability; renormalization undefined. */
class DegenerateBranch : public Error {
public:
    explicit DegenerateBranch(const std::string& what) : Error(what) {}
};

/* Log-log fit asked for on fewer than 3 points or nonpositive data. */
class DegenerateData : public Error {
public:
    explicit DegenerateData(const std::string& what) : Error(what) {}
};

}  // namespace reflectron
