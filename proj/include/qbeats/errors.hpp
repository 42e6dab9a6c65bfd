#ifndef QBEATS_ERRORS_HPP
#define QBEATS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qbeats {

// Thrown when the Bloch generator has a null space of dimension > 1, i.e.
// no unique stationary state (always the case for Omega = 0, where any
// mixture of the two ground states is stationary).
class DegenerateSteadyState : public std::runtime_error {
 public:
  explicit DegenerateSteadyState(const std::string& what)
      : std::runtime_error(what) {}
};

// Thrown when a resolvent solve (z*I - M) is requested at a point where the
// matrix is singular, e.g. the elastic delta component of the stationary
// spectrum at zero broadening.
class SingularResolvent : public std::runtime_error {
 public:
  explicit SingularResolvent(const std::string& what)
      : std::runtime_error(what) {}
};

// Thrown when the adaptive quadrature hits its panel cap without meeting the
// relative-change convergence contract.
class QuadratureNotConverged : public std::runtime_error {
 public:
  explicit QuadratureNotConverged(const std::string& what)
      : std::runtime_error(what) {}
};

// Configuration / scenario document errors. `field` is the offending key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& reason)
      : std::runtime_error(field.empty() ? reason : field + ": " + reason),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace qbeats

#endif
