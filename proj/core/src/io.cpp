#include "polyb/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace polyb {

using nlohmann::json;

namespace {

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vec vec_from_json(const json& arr) {
  if (!arr.is_array() || arr.empty()) fail(errc::parse_error, "expected a number array");
  Vec v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) fail(errc::parse_error, "expected a number array");
    v(static_cast<int>(i)) = arr[i].get<double>();
  }
  return v;
}

json parse(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(errc::parse_error, "malformed JSON");
  return j;
}

json certificate_json(const EscapeCertificate& c) {
  json j;
  j["phi"] = c.phi;
  j["mu"] = c.mu;
  j["valid"] = c.valid;
  j["step_lower_bound"] = c.step_lower_bound;
  if (c.valid) {
    j["zigzag_bound"] = c.zigzag_bound;
    j["reflection_bound"] = c.reflection_bound;
  }
  return j;
}

}  // namespace

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_banner() { return "# polyb 0.1.0\n"; }

Polytope polytope_from_json_text(const std::string& text) {
  json j = parse(text);
  if (!j.is_object()) fail(errc::parse_error, "polytope JSON must be an object");
  std::string name = j.value("name", std::string());
  if (j.contains("halfspaces")) {
    std::vector<Halfspace> hs;
    for (const auto& f : j["halfspaces"]) {
      if (!f.contains("normal") || !f.contains("offset"))
        fail(errc::parse_error, "halfspace needs normal and offset");
      hs.push_back({vec_from_json(f["normal"]), f["offset"].get<double>()});
    }
    return Polytope::from_inward_halfspaces(std::move(hs), name);
  }
  if (j.contains("generators")) {
    std::vector<Vec> gen;
    for (const auto& g : j["generators"]) gen.push_back(vec_from_json(g));
    return Polytope::from_generators(gen, name);
  }
  fail(errc::parse_error, "polytope JSON needs halfspaces or generators");
}

Polytope load_polytope(const std::string& path) {
  return polytope_from_json_text(read_text_file(path));
}

std::string polytope_to_json_text(const Polytope& p) {
  json j;
  j["dim"] = p.dim();
  if (!p.name().empty()) j["name"] = p.name();
  json hs = json::array();
  for (const auto& f : p.faces())
    hs.push_back({{"normal", vec_to_json(f.normal)}, {"offset", f.offset}});
  j["halfspaces"] = hs;
  if (auto gen = p.generators()) {
    json g = json::array();
    for (const auto& v : *gen) g.push_back(vec_to_json(v));
    j["generators"] = g;
  }
  json vs = json::array();
  for (const auto& v : p.vertices()) vs.push_back(vec_to_json(v.point));
  j["vertices"] = vs;
  return j.dump(2) + "\n";
}

ConeSpec cone_from_json_text(const std::string& text) {
  json j = parse(text);
  if (!j.is_object() || !j.contains("normals"))
    fail(errc::parse_error, "cone JSON needs a normals array");
  std::vector<Vec> normals;
  for (const auto& n : j["normals"]) normals.push_back(vec_from_json(n));
  if (normals.empty()) fail(errc::parse_error, "cone JSON needs a normals array");
  const int d = static_cast<int>(normals.front().size());
  if (static_cast<int>(normals.size()) != d)
    fail(errc::parse_error, "cone needs exactly d normals in R^d");
  ConeSpec cone;
  cone.normals.resize(d, d);
  for (int i = 0; i < d; ++i) {
    if (normals[i].size() != d) fail(errc::parse_error, "inconsistent normal dimensions");
    double n = normals[i].norm();
    if (n < 1e-14) fail(errc::parse_error, "zero cone normal");
    cone.normals.col(i) = normals[i] / n;
  }
  cone.apex = j.contains("apex") ? vec_from_json(j["apex"]) : Vec::Zero(d);
  if (cone.apex.size() != d) fail(errc::parse_error, "apex dimension mismatch");
  return cone;
}

ConeSpec load_cone(const std::string& path) { return cone_from_json_text(read_text_file(path)); }

std::string cone_to_json_text(const ConeSpec& cone) {
  json j;
  json ns = json::array();
  for (int i = 0; i < cone.normals.cols(); ++i) ns.push_back(vec_to_json(cone.normals.col(i)));
  j["normals"] = ns;
  j["apex"] = vec_to_json(cone.apex);
  return j.dump(2) + "\n";
}

std::string orbit_to_csv(const OrbitRecord& orbit) {
  std::ostringstream out;
  out << csv_banner();
  const int d = orbit.states.empty() ? 0 : static_cast<int>(orbit.states.front().point.size());
  out << "step,face";
  for (int i = 0; i < d; ++i) out << ",p" << i;
  for (int i = 0; i < d; ++i) out << ",v" << i;
  out << ",tau,theta\n";
  for (size_t s = 0; s < orbit.states.size(); ++s) {
    const auto& st = orbit.states[s];
    out << s << ',' << st.face;
    for (int i = 0; i < d; ++i) out << ',' << format_g17(st.point(i));
    for (int i = 0; i < d; ++i) out << ',' << format_g17(st.velocity(i));
    if (s == 0)
      out << ",nan,nan\n";
    else
      out << ',' << format_g17(orbit.flight_times[s - 1]) << ','
          << format_g17(orbit.angles[s - 1]) << "\n";
  }
  return out.str();
}

std::string orbit_to_json_text(const OrbitRecord& orbit) {
  json j;
  json states = json::array();
  for (const auto& st : orbit.states)
    states.push_back({{"face", st.face},
                      {"point", vec_to_json(st.point)},
                      {"velocity", vec_to_json(st.velocity)}});
  j["states"] = states;
  j["flight_times"] = orbit.flight_times;
  j["angles"] = orbit.angles;
  switch (orbit.termination.kind) {
    case Termination::Kind::completed: j["termination"] = "completed"; break;
    case Termination::Kind::hit_skeleton: j["termination"] = "hit_skeleton"; break;
    case Termination::Kind::grazing: j["termination"] = "grazing"; break;
  }
  if (orbit.termination.step >= 0) j["termination_step"] = orbit.termination.step;
  return j.dump(2) + "\n";
}

std::string spectra_to_csv(const std::vector<LyapunovResult>& samples) {
  std::ostringstream out;
  out << csv_banner();
  const size_t m = samples.empty() ? 0 : samples.front().exponents.size();
  out << "sample";
  for (size_t i = 0; i < m; ++i) out << ",exp" << i;
  for (size_t i = 0; i < m; ++i) out << ",spread" << i;
  out << ",steps,truncated\n";
  for (size_t s = 0; s < samples.size(); ++s) {
    out << s;
    for (size_t i = 0; i < m; ++i) out << ',' << format_g17(samples[s].exponents[i]);
    for (size_t i = 0; i < m; ++i) out << ',' << format_g17(samples[s].half_spread[i]);
    out << ',' << samples[s].steps_completed << ',' << (samples[s].truncated ? 1 : 0) << "\n";
  }
  return out.str();
}

std::string spectra_to_json_text(const std::vector<LyapunovResult>& samples) {
  json arr = json::array();
  for (const auto& s : samples)
    arr.push_back({{"exponents", s.exponents},
                   {"half_spread", s.half_spread},
                   {"steps", s.steps_completed},
                   {"truncated", s.truncated},
                   {"reorth_interval", s.reorth_interval}});
  json j;
  j["samples"] = arr;
  if (!samples.empty()) {
    const size_t m = samples.front().exponents.size();
    std::vector<double> mean(m, 0.0);
    int used = 0;
    for (const auto& s : samples) {
      if (s.exponents.size() != m) continue;
      for (size_t i = 0; i < m; ++i) mean[i] += s.exponents[i];
      ++used;
    }
    for (double& x : mean) x /= std::max(1, used);
    j["mean_exponents"] = mean;
  }
  return j.dump(2) + "\n";
}

std::string collinearities_to_json_text(const std::vector<Collinearity>& scan,
                                        double delta) {
  json arr = json::array();
  for (const auto& c : scan)
    arr.push_back({{"i", c.i},
                   {"j", c.j},
                   {"angle", c.angle},
                   {"dim", c.dim},
                   {"minimal", c.minimal}});
  json j;
  j["delta"] = delta;
  j["collinearities"] = arr;
  return j.dump(2) + "\n";
}

std::string cocycle_steps_to_csv(const std::vector<CocycleStep>& steps) {
  std::ostringstream out;
  out << csv_banner();
  const int m = steps.empty() ? 0 : static_cast<int>(steps.front().A.rows());
  out << "step,face,tau,theta";
  for (int i = 0; i < m; ++i) out << ",svA" << i;
  for (int i = 0; i < m; ++i) out << ",svC" << i;
  out << "\n";
  for (size_t k = 0; k < steps.size(); ++k) {
    const auto& s = steps[k];
    out << k + 1 << ',' << s.face << ',' << format_g17(s.tau) << ',' << format_g17(s.theta);
    Eigen::JacobiSVD<Mat> a(s.A), c(s.C);
    for (int i = 0; i < m; ++i) out << ',' << format_g17(a.singularValues()(i));
    for (int i = 0; i < m; ++i) out << ',' << format_g17(c.singularValues()(i));
    out << "\n";
  }
  return out.str();
}

std::string certificate_to_json_text(const EscapeCertificate& cert, const ConeSpec& cone,
                                     const ReflectionLaw& law) {
  json j = certificate_json(cert);
  j["law"] = law.name();
  j["lambda"] = law.lambda_sup();
  json ns = json::array();
  for (int i = 0; i < cone.normals.cols(); ++i) ns.push_back(vec_to_json(cone.normals.col(i)));
  j["cone"] = {{"normals", ns}, {"apex", vec_to_json(cone.apex)}};
  return j.dump(2) + "\n";
}

std::string verdict_to_json_text(const Verdict& v) {
  json j;
  j["polytope"] = v.polytope;
  j["classification"] = to_string(v.classification);
  if (!v.witness.empty()) j["witness"] = v.witness;
  j["spanning_epsilon"] = v.spanning_eps;
  j["spanning_witness"] = v.spanning_witness;
  json certs = json::array();
  for (const auto& c : v.vertex_certificates) certs.push_back(certificate_json(c));
  j["vertex_certificates"] = certs;
  j["orbits_sampled"] = v.orbits_sampled;
  j["exceeded"] = v.exceeded;
  j["unresolved"] = v.unresolved;
  if (v.t_max) j["t_max"] = *v.t_max;
  json hist = json::array();
  for (const auto& [t, n] : v.t_histogram) hist.push_back({{"t", t}, {"count", n}});
  j["t_histogram"] = hist;
  j["sigma_empirical"] = v.sigma_empirical;
  j["sigma_window"] = v.sigma_window;
  return j.dump(2) + "\n";
}

std::string lambda0_to_csv(const Lambda0Curve& curve) {
  std::ostringstream out;
  out << csv_banner() << "h,lambda0,phi1,phi2\n";
  for (const auto& pt : curve.points)
    out << format_g17(pt.h) << ',' << format_g17(pt.lambda0) << ',' << format_g17(pt.phi1)
        << ',' << format_g17(pt.phi2) << "\n";
  return out.str();
}

std::string chamber_to_json_text(const std::vector<ChamberReport>& reports,
                                 const std::vector<double>& lambda0_estimates, double h0) {
  json j;
  j["h0"] = h0;
  json arr = json::array();
  for (size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    json e;
    e["h"] = r.h;
    e["defined"] = r.defined;
    if (r.defined) {
      auto pt = [](const Eigen::Vector2d& q) { return json::array({q.x(), q.y()}); };
      e["c0"] = pt(r.c0);
      json cs = json::array(), ms = json::array(), as = json::array();
      for (const auto& c : r.c_images) cs.push_back(pt(c));
      for (const auto& m : r.hexagon) ms.push_back(pt(m));
      for (const auto& a : r.base_vertices) as.push_back(pt(a));
      e["base_vertices"] = as;
      e["c_images"] = cs;
      e["hexagon"] = ms;
      e["inflate"] = r.inflate;
      e["invariance"] = {{"samples", r.invariance_samples}, {"escapes", r.invariance_escapes}};
      e["pentagon_images"] = {{"samples", r.pentagon_samples}, {"escapes", r.pentagon_escapes}};
      e["escape"] = {{"max_t", r.max_escape_time},
                     {"exceeded", r.escape_exceeded},
                     {"horizon", r.escape_horizon},
                     {"unresolved", r.escape_unresolved}};
      e["entry"] = {{"samples", r.entry_samples},
                    {"failures", r.entry_failures},
                    {"unresolved", r.entry_unresolved},
                    {"max_time", r.max_entry_time}};
      if (i < lambda0_estimates.size()) e["lambda0_estimate"] = lambda0_estimates[i];
    }
    arr.push_back(e);
  }
  j["reports"] = arr;
  return j.dump(2) + "\n";
}

ReflectionLaw parse_law(const std::string& spec) {
  if (spec == "slap") return ReflectionLaw::linear(0.0);
  if (spec == "specular") return ReflectionLaw::linear(1.0);
  auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const std::string kind = spec.substr(0, colon);
    const std::string arg = spec.substr(colon + 1);
    double value = 0.0;
    try {
      size_t used = 0;
      value = std::stod(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
    } catch (const std::exception&) {
      fail(errc::parse_error, "bad law parameter '" + arg + "'");
    }
    if (kind == "linear") return ReflectionLaw::linear(value);
    if (kind == "sine") {
      if (!(value > 0.0 && value < 1.0))
        fail(errc::parse_error, "sine law needs a parameter in (0,1)");
      return ReflectionLaw::custom(
          "sine:" + arg, [value](double t) { return value * std::sin(t); },
          [value](double t) { return value * std::cos(t); }, value);
    }
  }
  fail(errc::parse_error, "unknown law '" + spec + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::parse_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::invalid_input, "cannot write " + path);
  out << content;
}

}  // namespace polyb
