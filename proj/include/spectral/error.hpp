#pragma once

#include <stdexcept>
#include <string>

namespace spectral {

// Error categories double as CLI exit codes.
enum class Errc : int {
  numerical = 1,
  io = 2,
  data_quality = 3,
  contract = 4,
  calibration_refused = 5,
  config = 6,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(Errc::contract, what);
}

const char* errc_name(Errc code) noexcept;

}  // namespace spectral
