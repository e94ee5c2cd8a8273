#pragma once

// File formats: polytope/cone JSON, orbit CSV+JSON, spectrum CSV,
// certificate/verdict/chamber JSON, lambda_0 curve CSV. All floating-point
// text uses 17 significant digits so artifacts round-trip exactly; output
// is deterministic byte-for-byte apart from the versioned banner.

#include <string>
#include <vector>

#include "polyb/chamber.hpp"
#include "polyb/hyperbolicity.hpp"

namespace polyb {

std::string format_g17(double x);

/// First line of every CSV artifact.
std::string csv_banner();

// Polytope JSON: {"dim": d, "halfspaces": [{"normal": [...], "offset": c}...]}
// or {"dim": d, "generators": [[...], ...]}. The writer emits halfspaces,
// the generator form whenever the origin is strictly interior, and the
// vertex list.
Polytope polytope_from_json_text(const std::string& text);
Polytope load_polytope(const std::string& path);
std::string polytope_to_json_text(const Polytope& p);

// Cone JSON: {"normals": [[...], ...], "apex": [...]} (apex optional).
ConeSpec cone_from_json_text(const std::string& text);
ConeSpec load_cone(const std::string& path);
std::string cone_to_json_text(const ConeSpec& cone);

// Orbit CSV: one row per state with columns
// step,face,p0..p{d-1},v0..v{d-1},tau,theta (tau/theta are nan at step 0).
std::string orbit_to_csv(const OrbitRecord& orbit);
std::string orbit_to_json_text(const OrbitRecord& orbit);

std::string spectra_to_csv(const std::vector<LyapunovResult>& samples);
std::string spectra_to_json_text(const std::vector<LyapunovResult>& samples);
std::string collinearities_to_json_text(const std::vector<Collinearity>& scan,
                                        double delta);
/// Per-step block diagnostics for plotting: flight time, incidence angle
/// and the singular values of the A and C blocks.
std::string cocycle_steps_to_csv(const std::vector<CocycleStep>& steps);
std::string certificate_to_json_text(const EscapeCertificate& cert, const ConeSpec& cone,
                                     const ReflectionLaw& law);
std::string verdict_to_json_text(const Verdict& v);
std::string lambda0_to_csv(const Lambda0Curve& curve);
std::string chamber_to_json_text(const std::vector<ChamberReport>& reports,
                                 const std::vector<double>& lambda0_estimates,
                                 double h0);

/// Law specifications: "linear:L" with L in [0,1], the labels "slap" and
/// "specular", and "sine:L" (f = L sin theta) as the built-in nonlinear
/// family.
ReflectionLaw parse_law(const std::string& spec);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace polyb
