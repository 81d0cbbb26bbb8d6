#pragma once

#include <stdexcept>
#include <string>

namespace qra {

/// Base class of every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input validation (broken invariants, NaN/inf payloads, bad construction).
struct ValidationError : Error { using Error::Error; };
struct DimensionMismatchError : Error { using Error::Error; };
struct AlignmentError : Error { using Error::Error; };

// Data ingestion.
struct ParseError : Error { using Error::Error; };
struct GapError : Error { using Error::Error; };
struct AuthError : Error { using Error::Error; };
struct BadIntervalError : Error { using Error::Error; };
struct RateLimitedError : Error { using Error::Error; };
struct NetworkError : Error { using Error::Error; };
struct MalformedDocumentError : Error { using Error::Error; };

// Transforms.
struct ScaleError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct ParamError : Error { using Error::Error; };

// Solvers and models.
struct RankDeficientError : Error { using Error::Error; };
struct NotConvergedError : Error { using Error::Error; };
struct CoverageError : Error { using Error::Error; };
struct DegenerateRowError : Error { using Error::Error; };
struct RankError : Error { using Error::Error; };

// Evaluation and orchestration.
struct MissingLevelError : Error { using Error::Error; };
struct SpanMismatchError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace qra
