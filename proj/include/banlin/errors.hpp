#pragma once

#include <stdexcept>
#include <string>

namespace banlin {

// Error taxonomy shared by all modules. Every failure mode a caller can
// reasonably branch on gets its own type; everything else is a plain
// std::runtime_error from the site that detected it.

struct NotSymmetric : std::runtime_error {
    explicit NotSymmetric(const std::string& what) : std::runtime_error(what) {}
};

struct NotPSD : std::runtime_error {
    explicit NotPSD(const std::string& what) : std::runtime_error(what) {}
};

struct EmptySet : std::runtime_error {
    explicit EmptySet(const std::string& what) : std::runtime_error(what) {}
};

struct Degenerate : std::runtime_error {
    explicit Degenerate(const std::string& what) : std::runtime_error(what) {}
};

struct NoConvergence : std::runtime_error {
    explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

struct ResidualTooLarge : std::runtime_error {
    explicit ResidualTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct HorizonTooSmall : std::runtime_error {
    explicit HorizonTooSmall(const std::string& what) : std::runtime_error(what) {}
};

struct RangeViolation : std::runtime_error {
    explicit RangeViolation(const std::string& what) : std::runtime_error(what) {}
};

struct SingularCovariance : std::runtime_error {
    explicit SingularCovariance(const std::string& what) : std::runtime_error(what) {}
};

struct DomainEscape : std::runtime_error {
    explicit DomainEscape(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalBlowup : std::runtime_error {
    explicit NumericalBlowup(const std::string& what) : std::runtime_error(what) {}
};

struct SequenceExhausted : std::runtime_error {
    explicit SequenceExhausted(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace banlin
