#pragma once

#include <stdexcept>
#include <string>

namespace cmps {

// Failure kinds, split into the two families the CLI maps to exit codes:
// validation failures (bad inputs) and numerical failures (the computation
// itself could not be carried out at the requested tolerance).
enum class errc {
  // validation
  duplicate_species,
  shape_error,
  not_hermitian,
  bad_order,
  bad_generator,
  grid_mismatch,
  grid_too_coarse,
  parse_error,
  parity_required,
  too_large_for_dense,
  // numerical
  non_injective,
  bad_fixed_point,
  singular_gauge,
  bad_propagation,
  ill_conditioned,
  unstable,
  solve_failed,
  gauge_singular,
};

const char* to_string(errc code) noexcept;
bool is_validation_error(errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, errc code, const std::string& message) {
  if (!condition) raise(code, message);
}

}  // namespace cmps
