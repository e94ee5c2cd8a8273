#pragma once

#include <stdexcept>
#include <string>

namespace polyb {

enum class errc {
  invalid_input,
  grazing_direction,
  unbounded_polyhedron,
  degenerate_input,
  degenerate_vertex,
  degenerate_cone,
  insufficient_data,
  not_applicable,
  parse_error,
  internal,
};

const char* to_string(errc code) noexcept;

/// Error type thrown on precondition violations and malformed inputs.
/// Recoverable per-orbit events (skeleton hits, grazing flights) are not
/// exceptions; they are reported through step/orbit status fields.
class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what);
  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] void fail(errc code, const std::string& what);

}  // namespace polyb
