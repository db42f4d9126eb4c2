#pragma once

#include <stdexcept>
#include <string>

namespace dmsc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// params
class BoundaryDegeneracy : public Error {
public:
    using Error::Error;
};

// renewal
class NonFiniteSample : public Error {
public:
    using Error::Error;
};
class OutOfHorizon : public Error {
public:
    using Error::Error;
};
class DenominatorVanishes : public Error {
public:
    using Error::Error;
};
class MissingRegularityData : public Error {
public:
    using Error::Error;
};

// complex
class CapacityExceeded : public Error {
public:
    using Error::Error;
};

// homology
class TruncatedSnapshot : public Error {
public:
    using Error::Error;
};
class FaceAbsent : public Error {
public:
    using Error::Error;
};
class IsolatedVertex : public Error {
public:
    using Error::Error;
};

// theory
class DimensionBelowQ : public Error {
public:
    using Error::Error;
};
class FactorizationFailure : public Error {
public:
    using Error::Error;
};
class BasicAssumptionFails : public Error {
public:
    using Error::Error;
};

} // namespace dmsc
