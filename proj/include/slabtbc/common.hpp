#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace slabtbc {

using cdouble = std::complex<double>;
inline constexpr double kPi = 3.14159265358979323846;

// Error taxonomy. Construction-time invariants throw; runtime checks that
// indicate misuse of an operation throw the more specific types below.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct GridMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidFrequencyError : std::domain_error {
    using std::domain_error::domain_error;
};
struct DegenerateConstantError : std::domain_error {
    using std::domain_error::domain_error;
};
struct KernelTooShortError : std::out_of_range {
    using std::out_of_range::out_of_range;
};
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};
struct ConfigurationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DataError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct UndefinedRatioError : std::domain_error {
    using std::domain_error::domain_error;
};
struct IllConditionedSolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Laplace variable s = s1 + i s2, restricted to the right half-plane.
// Everything downstream (symbols, CQ weights, s-domain solves) relies on
// s1 > 0, so it is enforced here once.
class ComplexFrequency {
  public:
    ComplexFrequency(double s1, double s2) : s1_(s1), s2_(s2) {
        if (!(s1 > 0.0) || !std::isfinite(s1) || !std::isfinite(s2))
            throw InvalidFrequencyError("ComplexFrequency: require finite s with Re s > 0");
    }
    double s1() const { return s1_; }
    double s2() const { return s2_; }
    cdouble value() const { return {s1_, s2_}; }

  private:
    double s1_;
    double s2_;
};

// Lateral wavenumber pair.
struct Xi {
    double xi1 = 0.0;
    double xi2 = 0.0;
    double norm2() const { return xi1 * xi1 + xi2 * xi2; }
};

}  // namespace slabtbc
