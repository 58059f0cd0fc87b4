#pragma once

#include <stdexcept>
#include <string>

namespace wishart {

// Base class for every domain error thrown by this library. Callers that do
// not care about the precise failure can catch this one type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define WISHART_DEFINE_ERROR(Name)                                     \
    class Name : public Error {                                        \
    public:                                                            \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

// operator algebra
WISHART_DEFINE_ERROR(NonPsdInput);
WISHART_DEFINE_ERROR(DimMismatch);
WISHART_DEFINE_ERROR(SingularDeterminant);
WISHART_DEFINE_ERROR(InvalidOrder);

// model configuration
WISHART_DEFINE_ERROR(NegativeTime);
WISHART_DEFINE_ERROR(RankExceedsAlpha);

// simulation
WISHART_DEFINE_ERROR(InadmissibleParameters);
WISHART_DEFINE_ERROR(GridNotIncreasing);
WISHART_DEFINE_ERROR(IncompatiblePlans);

// transforms
WISHART_DEFINE_ERROR(BallConditionViolated);
WISHART_DEFINE_ERROR(NonIntegerAlpha);
WISHART_DEFINE_ERROR(NonOrthonormalBasis);
WISHART_DEFINE_ERROR(InvalidShift);

// Riccati solutions
WISHART_DEFINE_ERROR(NotSignDefinite);
WISHART_DEFINE_ERROR(NotJointlyDiagonal);
WISHART_DEFINE_ERROR(StepOverflow);

// validation
WISHART_DEFINE_ERROR(TimeNotOnGrid);

// metric
WISHART_DEFINE_ERROR(EmptyFamily);
WISHART_DEFINE_ERROR(NotStrictlyPositive);

// CLI / configuration driver
WISHART_DEFINE_ERROR(ConfigParseError);

#undef WISHART_DEFINE_ERROR

} // namespace wishart
