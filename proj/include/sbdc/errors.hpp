#pragma once

#include <stdexcept>
#include <string>

namespace sbdc {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DisconnectedGraph : Error { using Error::Error; };
struct NonPositiveWeight : Error { using Error::Error; };
struct DuplicateEdge : Error { using Error::Error; };
struct UnknownEdge : Error { using Error::Error; };
struct SingularTreeGram : Error { using Error::Error; };

struct NonPositiveGain : Error { using Error::Error; };
struct WeightOutOfImage : Error { using Error::Error; };
struct DomainViolation : Error { using Error::Error; };

struct EmptyAttackSet : Error { using Error::Error; };
struct EmptySupport : Error { using Error::Error; };
struct UnknownVariant : Error { using Error::Error; };

struct NonPositiveLipschitz : Error { using Error::Error; };
struct EpsilonTooLarge : Error { using Error::Error; };

struct NonFiniteState : Error { using Error::Error; };

struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };

}
