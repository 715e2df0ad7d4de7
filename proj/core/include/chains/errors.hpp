#pragma once

#include <stdexcept>
#include <string>

namespace chains {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// reasons are part of the message; types are part of the contract
struct InvalidParams : Error { using Error::Error; };
struct UnsupportedPast : Error { using Error::Error; };
struct NotAttractive : Error { using Error::Error; };
struct StateSpaceTooLarge : Error { using Error::Error; };
struct LevelOutOfRange : Error { using Error::Error; };
struct NotDiscrete : Error { using Error::Error; };
struct InsufficientTail : Error { using Error::Error; };
struct BlockTooLong : Error { using Error::Error; };
struct InfiniteMeanBlock : Error { using Error::Error; };
struct NumericalIntegrity : Error { using Error::Error; };
struct MonotonicityUnverified : Error { using Error::Error; };

}  // namespace chains
