#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace elab {

// Base class for all arithmetic-layer failures.
struct RingError : std::runtime_error {
    explicit RingError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ZeroPolyError : RingError {
    explicit ZeroPolyError(const std::string& msg = "operation undefined for the zero polynomial")
        : RingError(msg) {}
};

struct NotHomogeneous : RingError {
    explicit NotHomogeneous(const std::string& msg = "terms of unequal total degree")
        : RingError(msg) {}
};

struct NotDivisible : RingError {
    explicit NotDivisible(const std::string& msg = "exact division has a nonzero remainder")
        : RingError(msg) {}
};

struct SubstitutionError : RingError {
    explicit SubstitutionError(const std::string& msg) : RingError(msg) {}
};

struct FitUnstable : std::runtime_error {
    explicit FitUnstable(const std::string& msg) : std::runtime_error(msg) {}
};

struct RootNotFound : std::runtime_error {
    explicit RootNotFound(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when the two chain-extension modes disagree or an exact division
// inside a chain recurrence fails.  Carries enough context to reproduce.
struct IdentityViolation : std::runtime_error {
    int k;
    int n;
    std::string mode;
    IdentityViolation(int k_, int n_, std::string mode_, const std::string& msg)
        : std::runtime_error("identity violation at k=" + std::to_string(k_) +
                             " n=" + std::to_string(n_) + " mode=" + mode_ + ": " + msg),
          k(k_), n(n_), mode(std::move(mode_)) {}
};

struct DegenerateGauge : std::runtime_error {
    explicit DegenerateGauge(const std::string& msg) : std::runtime_error(msg) {}
};

struct TruncationError : std::runtime_error {
    int needed;
    int have;
    TruncationError(int needed_, int have_)
        : std::runtime_error("series window too short: need order " + std::to_string(needed_) +
                             ", have " + std::to_string(have_)),
          needed(needed_), have(have_) {}
};

struct ParseError : std::runtime_error {
    std::size_t position;
    std::string expected;
    ParseError(std::size_t pos, std::string expected_, const std::string& got)
        : std::runtime_error("parse error at position " + std::to_string(pos) +
                             ": expected " + expected_ + ", got " + got),
          position(pos), expected(std::move(expected_)) {}
};

struct SemanticError : std::runtime_error {
    explicit SemanticError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularOrbit : std::runtime_error {
    int step;
    explicit SingularOrbit(int step_)
        : std::runtime_error("orbit hits a zero denominator at step " + std::to_string(step_)),
          step(step_) {}
};

}  // namespace elab
