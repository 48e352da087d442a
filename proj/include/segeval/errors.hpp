#pragma once

#include <stdexcept>
#include <string>

namespace segeval {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// geometry / label model
struct GeometryMismatch : Error { using Error::Error; };
struct UnmappedCode : Error {
  int code;
  explicit UnmappedCode(int c)
      : Error("label code " + std::to_string(c) + " has no remap entry"), code(c) {}
};

// nifti_io
struct BadMagic : Error { using Error::Error; };
struct UnsupportedDatatype : Error {
  int datatype;
  explicit UnsupportedDatatype(int dt)
      : Error("unsupported NIfTI datatype code " + std::to_string(dt)), datatype(dt) {}
};
struct TruncatedFile : Error { using Error::Error; };
struct DimMismatch : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };
struct ChannelCountMismatch : Error { using Error::Error; };
struct ProbabilityOutOfRange : Error { using Error::Error; };

// morphology
struct EmptyMask : Error { using Error::Error; };
struct ComponentOverflow : Error { using Error::Error; };

// postproc
struct EmptyEnsemble : Error { using Error::Error; };

// fixtures
struct PrimitiveOutOfBounds : Error { using Error::Error; };

// harness
struct NoPairsFound : Error { using Error::Error; };
struct DuplicateCaseId : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace segeval
