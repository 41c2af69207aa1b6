#pragma once

#include <stdexcept>
#include <string>

namespace crowdnav {

// Linear system of the spline construction is numerically singular, usually
// because of degenerate piece durations.
class SingularSystem : public std::runtime_error {
 public:
  explicit SingularSystem(const std::string& what) : std::runtime_error(what) {}
};

// Trajectory queried outside [0, T].
class OutOfDomain : public std::runtime_error {
 public:
  explicit OutOfDomain(const std::string& what) : std::runtime_error(what) {}
};

// Network activation or loss overflowed.
class NonFinite : public std::runtime_error {
 public:
  explicit NonFinite(const std::string& what) : std::runtime_error(what) {}
};

// Malformed scenario / agent / checkpoint input.
class ScenarioInvalid : public std::runtime_error {
 public:
  explicit ScenarioInvalid(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace crowdnav
