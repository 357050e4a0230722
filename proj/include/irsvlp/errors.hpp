#pragma once

#include <stdexcept>
#include <string>

namespace irsvlp {

/// Coincident points, collinear cross products, and other degenerate configurations.
struct GeometryError : std::runtime_error {
    explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

/// An IRS grid that does not fit inside its wall.
struct GridOverflowError : std::runtime_error {
    explicit GridOverflowError(const std::string& what) : std::runtime_error(what) {}
};

/// Singular or ill-conditioned matrix where an inverse is required.
struct IllConditionedError : std::runtime_error {
    explicit IllConditionedError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed configuration files or values outside their documented ranges.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace irsvlp
