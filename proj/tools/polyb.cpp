// Command-line front door: load polytopes, run simulations and analyses,
// emit CSV/JSON artifacts. Every command is deterministic given its inputs
// and seed. Exit codes: 0 success (including "obstruction found" results),
// 2 input error, 3 internal invariant violation.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "polyb/io.hpp"
#include "polyb/sampling.hpp"

namespace fs = std::filesystem;
using namespace polyb;

namespace {

struct PolytopeSource {
  std::string file;
  std::string simplex;  // "D:H"
};

Polytope resolve_polytope(const PolytopeSource& src, bool rescale) {
  Polytope p = [&]() {
    if (!src.file.empty()) return load_polytope(src.file);
    if (!src.simplex.empty()) {
      auto colon = src.simplex.find(':');
      if (colon == std::string::npos)
        fail(errc::parse_error, "--simplex expects D:H");
      int d = std::stoi(src.simplex.substr(0, colon));
      double h = std::stod(src.simplex.substr(colon + 1));
      return simplex_family(d, h);
    }
    fail(errc::parse_error, "need --polytope FILE or --simplex D:H");
  }();
  return rescale ? p.scaled_to_unit_diameter() : p;
}

void add_polytope_options(CLI::App* cmd, PolytopeSource& src, bool& rescale) {
  cmd->add_option("--polytope", src.file, "Polytope JSON file");
  cmd->add_option("--simplex", src.simplex, "Simplex family spec D:H");
  cmd->add_flag("--scale-unit", rescale, "Rescale the polytope to unit diameter on load");
}

std::vector<double> parse_grid(const std::string& spec) {
  double start = 0, stop = 0;
  int count = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &start, &stop, &count) != 3 || count < 0)
    fail(errc::parse_error, "grid expects START:STOP:COUNT");
  std::vector<double> grid;
  if (count == 1) {
    grid.push_back(start);
  } else {
    for (int i = 0; i < count; ++i)
      grid.push_back(start + (stop - start) * i / (count - 1));
  }
  return grid;
}

Vec parse_vector(const std::string& csv) {
  std::vector<double> vals;
  size_t pos = 0;
  while (pos <= csv.size()) {
    size_t comma = csv.find(',', pos);
    if (comma == std::string::npos) comma = csv.size();
    try {
      vals.push_back(std::stod(csv.substr(pos, comma - pos)));
    } catch (const std::exception&) {
      fail(errc::parse_error, "bad vector component in '" + csv + "'");
    }
    pos = comma + 1;
  }
  Vec v(vals.size());
  for (size_t i = 0; i < vals.size(); ++i) v(static_cast<int>(i)) = vals[i];
  return v;
}

void ensure_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(errc::invalid_input, "cannot create output directory " + dir);
}

std::string join(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

void parallel_cells(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

int cmd_check(const PolytopeSource& src, bool rescale, const std::string& out_dir) {
  Polytope p = resolve_polytope(src, rescale);
  GeneralPositionReport gp = is_general_position(p);
  SpanningReport span = spanning_epsilon(p);

  std::cout << "polytope: " << (p.name().empty() ? "(unnamed)" : p.name()) << "\n"
            << "dim " << p.dim() << ", " << p.num_faces() << " faces, " << p.num_vertices()
            << " vertices\n";
  if (gp.ok) {
    std::cout << "general position: yes\n";
  } else if (gp.bad_vertex) {
    std::cout << "general position: NO, witness vertex " << *gp.bad_vertex << "\n";
  } else {
    std::cout << "general position: NO, witness faces {";
    for (size_t i = 0; i < gp.dependent_faces.size(); ++i)
      std::cout << (i ? "," : "") << gp.dependent_faces[i];
    std::cout << "}\n";
  }
  if (span.epsilon > 1e-9) {
    std::cout << "spanning: yes (epsilon=" << format_g17(span.epsilon) << ")\n";
  } else {
    std::cout << "spanning: NO (epsilon=" << format_g17(span.epsilon) << "), witness faces {";
    for (size_t i = 0; i < span.witness.size(); ++i)
      std::cout << (i ? "," : "") << span.witness[i];
    std::cout << "}\n";
  }

  if (!out_dir.empty()) {
    ensure_out(out_dir);
    write_text_file(join(out_dir, "polytope.json"), polytope_to_json_text(p));
  }
  return 0;
}

int cmd_simulate(const PolytopeSource& src, bool rescale, const std::string& law_spec,
                 int steps, int start_face, const std::string& start_point,
                 const std::string& start_velocity, std::uint64_t seed, bool blocks,
                 double collinearity_delta, const std::string& out_dir) {
  Polytope p = resolve_polytope(src, rescale);
  ReflectionLaw law = parse_law(law_spec);
  PhaseState x0;
  if (start_face >= 0) {
    if (start_point.empty() || start_velocity.empty())
      fail(errc::parse_error, "--start-face needs --start-point and --start-velocity");
    x0 = make_state(p, start_face, parse_vector(start_point), parse_vector(start_velocity));
  } else {
    x0 = sample_state(p, seed, 0);
  }
  OrbitRecord rec = iterate(p, law, x0, steps);
  std::cout << "steps completed: " << rec.steps() << "/" << steps;
  switch (rec.termination.kind) {
    case Termination::Kind::completed: std::cout << " (completed)\n"; break;
    case Termination::Kind::hit_skeleton:
      std::cout << " (hit skeleton at step " << rec.termination.step << ")\n";
      break;
    case Termination::Kind::grazing:
      std::cout << " (grazing at step " << rec.termination.step << ")\n";
      break;
  }
  ensure_out(out_dir);
  write_text_file(join(out_dir, "orbit.csv"), orbit_to_csv(rec));
  write_text_file(join(out_dir, "orbit.json"), orbit_to_json_text(rec));
  if (blocks)
    write_text_file(join(out_dir, "blocks.csv"),
                    cocycle_steps_to_csv(cocycle_steps(p, law, rec)));
  if (collinearity_delta > 0.0)
    write_text_file(join(out_dir, "collinearities.json"),
                    collinearities_to_json_text(
                        collinearity_scan(rec, collinearity_delta), collinearity_delta));
  return 0;
}

int cmd_lyapunov(const PolytopeSource& src, bool rescale, const std::string& law_spec,
                 int samples, int steps, std::uint64_t seed, int workers,
                 const std::string& out_dir) {
  Polytope p = resolve_polytope(src, rescale);
  ReflectionLaw law = parse_law(law_spec);
  std::vector<LyapunovResult> results(samples);
  std::vector<int> failed(samples, 0);
  parallel_cells(samples, workers, [&](int i) {
    PhaseState x0 = sample_state(p, seed, i);
    try {
      results[i] = lyapunov_spectrum(p, law, x0, steps);
    } catch (const Error&) {
      failed[i] = 1;
    }
  });
  std::vector<LyapunovResult> kept;
  int early = 0;
  for (int i = 0; i < samples; ++i) {
    if (failed[i]) continue;
    if (results[i].truncated) ++early;
    kept.push_back(results[i]);
  }
  ensure_out(out_dir);
  write_text_file(join(out_dir, "lyapunov.csv"), spectra_to_csv(kept));
  write_text_file(join(out_dir, "lyapunov.json"), spectra_to_json_text(kept));
  if (!kept.empty()) {
    const size_t m = kept.front().exponents.size();
    std::cout << "samples: " << kept.size() << " (early terminations: " << early << ")\n"
              << "mean exponents:";
    for (size_t e = 0; e < m; ++e) {
      double mean = 0.0;
      for (const auto& r : kept) mean += r.exponents[e];
      std::cout << ' ' << format_g17(mean / kept.size());
    }
    std::cout << "\n";
  }
  return 0;
}

int cmd_sweep(int dim, const std::string& h_grid_spec, const std::string& l_grid_spec,
              int orbits, int steps, int horizon, std::uint64_t seed, int workers,
              const std::string& out_dir) {
  std::vector<double> hs = parse_grid(h_grid_spec);
  std::vector<double> ls = parse_grid(l_grid_spec);

  Lambda0Curve curve = lambda0_curve(dim, hs);
  ensure_out(out_dir);
  write_text_file(join(out_dir, "lambda0.csv"), lambda0_to_csv(curve));

  struct Cell {
    double h, lambda, lambda0;
    bool cert_valid;
    std::optional<int> t_max;
    int exceeded;
    double sigma, top_exponent;
  };
  const int n = static_cast<int>(hs.size() * ls.size());
  std::vector<Cell> cells(n);
  parallel_cells(n, workers, [&](int c) {
    const double h = hs[c / ls.size()];
    const double lambda = ls[c % ls.size()];
    Polytope p = simplex_family(dim, h);
    ReflectionLaw law = ReflectionLaw::linear(lambda);
    SamplingConfig cfg;
    cfg.n_orbits = orbits;
    cfg.n_steps = steps;
    cfg.horizon = horizon;
    cfg.seed = seed + c;
    Verdict v = verdict(p, law, cfg);
    bool all_valid = !v.vertex_certificates.empty();
    for (const auto& cert : v.vertex_certificates) all_valid = all_valid && cert.valid;
    double top = 0.0;
    if (lambda > 0.0 && lambda < 1.0) {
      LyapunovResult lr = lyapunov_spectrum(p, law, sample_state(p, cfg.seed, 0), steps);
      top = lr.exponents.empty() ? 0.0 : lr.exponents.front();
    }
    cells[c] = {h,          lambda,   curve.points[c / ls.size()].lambda0, all_valid,
                v.t_max,    v.exceeded, v.sigma_empirical,                 top};
  });

  std::ostringstream out;
  out << csv_banner()
      << "h,lambda,lambda0,certificates_valid,max_t,exceeded,sigma_empirical,top_exponent\n";
  for (const auto& c : cells) {
    out << format_g17(c.h) << ',' << format_g17(c.lambda) << ',' << format_g17(c.lambda0)
        << ',' << (c.cert_valid ? 1 : 0) << ','
        << (c.t_max ? std::to_string(*c.t_max) : std::string("nan")) << ',' << c.exceeded
        << ',' << format_g17(c.sigma) << ',' << format_g17(c.top_exponent) << "\n";
  }
  write_text_file(join(out_dir, "sweep.csv"), out.str());
  std::cout << "sweep cells: " << n << " -> " << join(out_dir, "sweep.csv") << "\n";
  return 0;
}

int cmd_chamber(const std::string& grid_spec, int samples, double inflate, int horizon,
                std::uint64_t seed, const std::string& out_dir) {
  std::vector<double> hs = parse_grid(grid_spec);
  std::vector<ChamberReport> reports;
  std::vector<double> lambda0s;
  for (double h : hs) {
    ChamberReport rep = chamber_analysis(h, samples, inflate, horizon);
    double l0 = rep.defined ? chamber_lambda0_estimate(h, 200, 5, seed) : 0.0;
    std::cout << "h=" << format_g17(h) << ": "
              << (rep.defined ? "chamber defined" : "chamber-undefined");
    if (rep.defined)
      std::cout << ", invariance escapes " << rep.invariance_escapes << "/"
                << rep.invariance_samples << ", max escape time " << rep.max_escape_time
                << ", lambda0 estimate " << format_g17(l0);
    std::cout << "\n";
    reports.push_back(rep);
    lambda0s.push_back(l0);
  }
  double h0 = chamber_h0();
  std::cout << "h0 (construction threshold) = " << format_g17(h0) << "\n";
  ensure_out(out_dir);
  write_text_file(join(out_dir, "chamber.json"), chamber_to_json_text(reports, lambda0s, h0));
  return 0;
}

int cmd_cone(const std::string& normals_file, const std::string& law_spec, int fuzz,
             std::uint64_t seed, const std::string& out_dir) {
  ConeSpec cone = load_cone(normals_file);
  ReflectionLaw law = parse_law(law_spec);
  EscapeCertificate cert = cone_certificate(cone, law);
  std::cout << "phi=" << format_g17(cert.phi) << " mu=" << format_g17(cert.mu)
            << " valid=" << (cert.valid ? "yes" : "no") << "\n";
  if (cert.valid)
    std::cout << "zigzag bound " << format_g17(cert.zigzag_bound) << ", reflection bound "
              << cert.reflection_bound << "\n";

  int violations = 0, clean = 0;
  if (fuzz > 0) {
    Mat rays = cone_edge_rays(cone);
    const int d = cone.dim();
    for (int i = 0; i < fuzz; ++i) {
      // Start on a random face at unit scale from the apex, inward.
      const int face = static_cast<int>(splitmix64(seed + i) % d);
      Vec point = cone.apex;
      for (int k = 0; k < d; ++k) {
        if (k == face) continue;
        point += (0.1 + uniform01(splitmix64(seed ^ 0xfaceull) + i * d + k)) *
                 rays.col(k).normalized();
      }
      Vec dir = Vec::Zero(d);
      for (int k = 0; k < d; ++k)
        dir(k) = uniform01(splitmix64(seed ^ 0xd12ull) + i * d + k) - 0.5;
      dir -= 1.5 * std::min(0.0, dir.dot(cone.normals.col(face))) * cone.normals.col(face);
      if (dir.dot(cone.normals.col(face)) < 1e-3) dir += cone.normals.col(face);
      dir.normalize();
      ConeRun run = cone_run(cone, law, point, dir);
      if (!run.clean) continue;
      ++clean;
      if (cert.valid &&
          (run.reflections > cert.reflection_bound || run.zigzag >= cert.zigzag_bound))
        ++violations;
    }
    std::cout << "fuzz: " << clean << " clean runs, " << violations << " bound violations\n";
  }

  if (!out_dir.empty()) {
    ensure_out(out_dir);
    write_text_file(join(out_dir, "certificate.json"),
                    certificate_to_json_text(cert, cone, law));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Billiards on convex polytopes with contracting reflection laws"};
  app.require_subcommand(1);

  PolytopeSource src;
  bool rescale = false;
  std::string law_spec = "linear:0.5";
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  int steps = 1000, horizon = 1000, workers = 1;

  auto* check = app.add_subcommand("check", "General position and spanning report");
  add_polytope_options(check, src, rescale);
  std::string check_out;
  check->add_option("--out", check_out, "Directory for polytope.json");

  auto* sim = app.add_subcommand("simulate", "Integrate one billiard orbit");
  add_polytope_options(sim, src, rescale);
  int start_face = -1;
  bool blocks = false;
  double collinearity_delta = 0.0;
  std::string start_point, start_velocity;
  sim->add_option("--law", law_spec, "Reflection law (linear:L | sine:L | slap | specular)");
  sim->add_option("--steps", steps, "Number of reflections");
  sim->add_option("--start-face", start_face, "Start face index");
  sim->add_option("--start-point", start_point, "Start point, comma separated");
  sim->add_option("--start-velocity", start_velocity, "Start velocity, comma separated");
  sim->add_option("--seed", seed, "Seed for the sampled start state");
  sim->add_flag("--blocks", blocks, "Also write per-step derivative blocks (blocks.csv)");
  sim->add_option("--collinearity", collinearity_delta,
                  "Scan for front collinearities below this angle (collinearities.json)");
  sim->add_option("--out", out_dir, "Output directory");

  auto* lya = app.add_subcommand("lyapunov", "Lyapunov spectra over sampled orbits");
  add_polytope_options(lya, src, rescale);
  int samples = 16;
  lya->add_option("--law", law_spec, "Reflection law");
  lya->add_option("--samples", samples, "Number of sampled orbits");
  lya->add_option("--steps", steps, "Steps per orbit");
  lya->add_option("--seed", seed, "Sampling seed");
  lya->add_option("--workers", workers, "Worker threads");
  lya->add_option("--out", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Simplex family (h, lambda) sweep");
  int dim = 3, orbits = 100;
  std::string h_grid = "0.3:2.0:18", l_grid = "0.1:0.9:9";
  sweep->add_option("--dim", dim, "Simplex dimension d");
  sweep->add_option("--grid", h_grid, "Height grid START:STOP:COUNT");
  sweep->add_option("--lambda-grid", l_grid, "Law grid START:STOP:COUNT");
  sweep->add_option("--orbits", orbits, "Sampled orbits per cell");
  sweep->add_option("--steps", steps, "Steps per orbit");
  sweep->add_option("--horizon", horizon, "Escaping-time horizon");
  sweep->add_option("--seed", seed, "Sampling seed");
  sweep->add_option("--workers", workers, "Worker threads");
  sweep->add_option("--out", out_dir, "Output directory");

  auto* chamber = app.add_subcommand("chamber", "Slap-map chamber reports for the 3-simplex");
  std::string c_grid = "0.1:0.25:2";
  int c_samples = 10000;
  double inflate = 1.02;
  chamber->add_option("--grid", c_grid, "Height grid START:STOP:COUNT");
  chamber->add_option("--samples", c_samples, "Grid points for the invariance test");
  chamber->add_option("--inflate", inflate, "Neighborhood inflation factor");
  chamber->add_option("--horizon", horizon, "Escaping-time horizon");
  chamber->add_option("--seed", seed, "Sampling seed");
  chamber->add_option("--out", out_dir, "Output directory");

  auto* cone = app.add_subcommand("cone", "Escape certificate for a polyhedral cone");
  std::string normals_file;
  int fuzz = 0;
  cone->add_option("--normals", normals_file, "Cone JSON file")->required();
  cone->add_option("--law", law_spec, "Reflection law");
  cone->add_option("--fuzz", fuzz, "Validation orbits to run");
  cone->add_option("--seed", seed, "Fuzz seed");
  std::string cone_out;
  cone->add_option("--out", cone_out, "Directory for certificate.json");

  try {
    app.parse(argc, argv);
    if (check->parsed()) return cmd_check(src, rescale, check_out);
    if (sim->parsed())
      return cmd_simulate(src, rescale, law_spec, steps, start_face, start_point,
                          start_velocity, seed, blocks, collinearity_delta, out_dir);
    if (lya->parsed())
      return cmd_lyapunov(src, rescale, law_spec, samples, steps, seed, workers, out_dir);
    if (sweep->parsed())
      return cmd_sweep(dim, h_grid, l_grid, orbits, steps, horizon, seed, workers, out_dir);
    if (chamber->parsed())
      return cmd_chamber(c_grid, c_samples, inflate, horizon, seed, out_dir);
    if (cone->parsed()) return cmd_cone(normals_file, law_spec, fuzz, seed, cone_out);
    return 2;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == errc::internal ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
