#include "polyb/error.hpp"

namespace polyb {

const char* to_string(errc code) noexcept {
  switch (code) {
    case errc::invalid_input: return "invalid-input";
    case errc::grazing_direction: return "grazing-direction";
    case errc::unbounded_polyhedron: return "unbounded-polyhedron";
    case errc::degenerate_input: return "degenerate-input";
    case errc::degenerate_vertex: return "degenerate-vertex";
    case errc::degenerate_cone: return "degenerate-cone";
    case errc::insufficient_data: return "insufficient-data";
    case errc::not_applicable: return "not-applicable";
    case errc::parse_error: return "parse-error";
    case errc::internal: return "internal";
  }
  return "unknown";
}

Error::Error(errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace polyb
