#pragma once

#include <stdexcept>
#include <string>

namespace sbs {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// model/section mismatch, bad coefficients, bad config values
struct ConfigError : Error {
  using Error::Error;
};

// requested chart undefined at the point (homogeneous coordinate vanishes)
struct ChartError : Error {
  using Error::Error;
};

// non-closed loops, unsupported model for an area computation
struct GeometryError : Error {
  using Error::Error;
};

// evaluation at or inside the divisor guard tube; carries |s|^2 at the point
struct DivisorError : Error {
  double norm_sq;
  explicit DivisorError(double nsq)
      : Error("evaluation on or too near the zero divisor"), norm_sq(nsq) {}
};

// a sample entered the divisor tube during a loop/cycle computation
struct StabilityError : Error {
  double norm_sq;
  explicit StabilityError(double nsq)
      : Error("loop or cycle touches the divisor tube"), norm_sq(nsq) {}
};

// flow step-size failure / monotonicity violation
struct IntegrationError : Error {
  using Error::Error;
};

// operation invoked outside its contract (e.g. classify at a non-critical point)
struct PreconditionError : Error {
  using Error::Error;
};

}  // namespace sbs
