#pragma once

#include <stdexcept>
#include <string>

namespace driftbench {

/// A constraint, schema or assignment does not fit the domain it is used with.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke an operation's precondition (e.g. MUS on a satisfiable set).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The brute-force oracle refuses spaces above its enumeration bound.
class OracleRefusal : public std::runtime_error {
 public:
  OracleRefusal(const std::string& what, double bound)
      : std::runtime_error(what), bound_(bound) {}
  double bound() const { return bound_; }

 private:
  double bound_;
};

}  // namespace driftbench
