#pragma once

#include <stdexcept>
#include <string>

namespace xsdist {

/// Raised when an iterative evaluation fails to reach its tolerance.
class NonConvergence : public std::runtime_error {
public:
    explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a training run produces non-finite losses.
class TrainDiverged : public std::runtime_error {
public:
    explicit TrainDiverged(const std::string& what) : std::runtime_error(what) {}
};

/// Raised on malformed or unreadable input files.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace xsdist
