#pragma once

#include <stdexcept>
#include <string>

namespace regrasp {

// Base for all library errors so callers can catch regrasp failures in one place.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateInputError : Error {
    using Error::Error;
};
struct NoStablePlacementError : Error {
    using Error::Error;
};
struct OutOfRangeError : Error {
    using Error::Error;
};
struct InfeasibleGraspError : Error {
    using Error::Error;
};
struct OutOfTableBoundsError : Error {
    using Error::Error;
};
struct UnknownNodeError : Error {
    using Error::Error;
};
struct UnknownEdgeError : Error {
    using Error::Error;
};
struct UnclassifiableConfigError : Error {
    using Error::Error;
};
struct MixedPlanLengthsError : Error {
    using Error::Error;
};
struct DisconnectedError : Error {
    using Error::Error;
};
struct EndpointMismatchError : Error {
    using Error::Error;
};
struct NotIrreducibleError : Error {
    using Error::Error;
};
struct OutOfDomainError : Error {
    using Error::Error;
};
struct JointLimitError : Error {
    using Error::Error;
};
struct DimensionMismatchError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};

}  // namespace regrasp
