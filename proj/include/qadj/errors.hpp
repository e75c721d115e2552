#pragma once

#include <stdexcept>
#include <string>

namespace qadj {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// rotations / quaternions
struct NotUnit : Error { using Error::Error; };
struct AxisNotUnit : Error { using Error::Error; };
struct NotOnCircle : Error { using Error::Error; };

// eigen solver
struct NonConvergence : Error { using Error::Error; };

// extraction
struct DegenerateAdjugate : Error { using Error::Error; };
struct DegenerateInput : Error { using Error::Error; };

// matching / pose
struct ShapeMismatch : Error { using Error::Error; };
struct DegenerateData : Error { using Error::Error; };
struct DegenerateReference : Error { using Error::Error; };
struct AmbiguousPose : Error { using Error::Error; };
struct CameraInsideCloud : Error { using Error::Error; };
struct DepthDegenerate : Error { using Error::Error; };
struct NoRootInBracket : Error { using Error::Error; };

// harness / IO
struct ParseError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct InvalidArgument : Error { using Error::Error; };

} // namespace qadj
