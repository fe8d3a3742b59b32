#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace rp {

enum class Errc {
  invalid_argument,  // bad parameter value (rho, t, k <= 0, ...)
  infeasible,        // request cannot be satisfied by the data (k > n)
  shape_mismatch,    // canvas / tensor dimension disagreement
  degenerate,        // degenerate geometry (tangent, collinear markers)
  unquantized_input, // stroke values not drawn from the given palette
  io,                // file system failure
  parse,             // malformed input file
};

class Error : public std::runtime_error {
public:
  Error(Errc code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

} // namespace rp
