#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nlft {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

enum class ErrorKind {
  input,        // malformed or non-finite data
  domain,       // argument outside the operation's domain
  config,       // invalid configuration / parameters
  numerical,    // blow-up or loss of finiteness
  pole,         // evaluation at or too close to a singularity
  consistency,  // two independent computations disagree
  convergence,  // iterative method failed to converge
  io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nlft
