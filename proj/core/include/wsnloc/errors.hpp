#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace wsnloc {

/// Invalid argument value (non-positive dimensions, k = 0, bad parameters).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A position lies outside the field.
class BoundsError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Unknown node id.
class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Degenerate numerics that cannot be recovered locally.
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::size_t node, const std::string& what)
        : std::runtime_error("node " + std::to_string(node) + ": " + what), node_(node) {}

    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

/// Rank-deficient linear system (e.g. collinear anchors).
class RankError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scenario or run configuration that cannot be executed (e.g. no anchors).
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Config-file or flag problem; always names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// File could not be written or read.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wsnloc
