#pragma once

#include <stdexcept>
#include <string>

namespace rotmap {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A NaN or Inf reached a public entry point.
struct NonFinite : Error {
    explicit NonFinite(const std::string& what) : Error(what) {}
};

// Input claimed to be a rotation matrix but is not one at tolerance.
struct InvalidRotation : Error {
    explicit InvalidRotation(const std::string& what) : Error(what) {}
};

// Input lies in (or too close to) the measure-zero set where a mapping
// is not uniquely defined.
struct DegenerateInput : Error {
    explicit DegenerateInput(const std::string& what) : Error(what) {}
};

// The closed-form Procrustes derivative hit an underflowing denominator;
// the caller may fall back to finite differences.
struct NearSingularDerivative : Error {
    explicit NearSingularDerivative(const std::string& what) : Error(what) {}
};

// Target rotation is outside the range a restricted mapping can reach.
struct OutOfRange : Error {
    explicit OutOfRange(const std::string& what) : Error(what) {}
};

// Requested operation is not defined for this mapping kind.
struct UnsupportedMapping : Error {
    explicit UnsupportedMapping(const std::string& what) : Error(what) {}
};

// Marker raised when asking for distinct pre-images of an injective mapping.
struct InjectiveMapping : Error {
    explicit InjectiveMapping(const std::string& what) : Error(what) {}
};

struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& what) : Error(what) {}
};

struct EmptyPointSet : Error {
    explicit EmptyPointSet(const std::string& what) : Error(what) {}
};

struct ZeroDiameter : Error {
    explicit ZeroDiameter(const std::string& what) : Error(what) {}
};

// A parameter of a network became NaN/Inf during training.
struct NonFiniteParameters : Error {
    explicit NonFiniteParameters(const std::string& what) : Error(what) {}
};

}  // namespace rotmap
