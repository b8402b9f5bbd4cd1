#pragma once

#include <stdexcept>
#include <string>

namespace convpow {

/// Failure categories surfaced by the library. Callers that want to branch on
/// the cause (tests, the CLI exit-code mapping) inspect Error::kind().
enum class errc {
  input,           ///< malformed or inconsistent argument
  precondition,    ///< documented caller obligation violated
  resource,        ///< a budget (grid cells, nodes, series order) was exceeded
  numerical,       ///< an iteration failed to converge or diverged
  internal,        ///< invariant the library itself maintains was broken
  unsupported,     ///< valid input outside the implemented scope
  classification,  ///< expansion does not admit the required structure
  comparison,      ///< two-sided bound could not be certified
};

class Error : public std::runtime_error {
 public:
  Error(errc kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  errc kind() const noexcept { return kind_; }

 private:
  errc kind_;
};

[[noreturn]] inline void fail(errc kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline const char* errc_name(errc k) {
  switch (k) {
    case errc::input: return "input";
    case errc::precondition: return "precondition";
    case errc::resource: return "resource";
    case errc::numerical: return "numerical";
    case errc::internal: return "internal";
    case errc::unsupported: return "unsupported";
    case errc::classification: return "classification";
    case errc::comparison: return "comparison";
  }
  return "unknown";
}

}  // namespace convpow
