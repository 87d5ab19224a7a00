#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lloydcvt {

// Error codes used throughout the library. The CLI maps them to exit codes:
// config/io -> 2, everything else (precondition, backend, seeding,
// infeasible, numerical) -> 3.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline Error config_error(const std::string& msg) { return Error("config", msg); }
inline Error io_error(const std::string& msg) { return Error("io", msg); }
inline Error precondition_error(const std::string& msg) { return Error("precondition", msg); }
inline Error backend_error(const std::string& msg) { return Error("backend", msg); }
inline Error seeding_error(const std::string& msg) { return Error("seeding", msg); }
inline Error infeasible_error(const std::string& msg) { return Error("infeasible", msg); }
inline Error numerical_error(const std::string& msg) { return Error("numerical", msg); }

}  // namespace lloydcvt
