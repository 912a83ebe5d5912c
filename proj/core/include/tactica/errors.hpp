#pragma once

#include <stdexcept>
#include <string>

namespace tactica {

/// Caller broke an operation's contract: bad dimensions, inconsistent
/// arguments, out-of-range parameters. Always a programming or wiring error,
/// never a data-dependent runtime condition.
class contract_error : public std::runtime_error {
public:
  explicit contract_error(const std::string& what) : std::runtime_error(what) {}
};

/// A scenario document failed to parse or validate. Messages carry the key
/// path and, for syntax errors, line and column.
class validation_error : public std::runtime_error {
public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// A run produced non-finite values or otherwise failed numerically. Messages
/// carry the time, node or window index, and the offending quantity.
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

/// Replay found a hash mismatch between a manifest and a re-executed run.
class replay_mismatch : public std::runtime_error {
public:
  explicit replay_mismatch(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tactica
