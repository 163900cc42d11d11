// Command-line front end: build, validate, census, optimize, compare,
// sequence, export. Exit codes: 0 pass, 1 failure or runtime error, 2 usage.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "sommerville/sommerville.hpp"

using namespace sommerville;
using nlohmann::json;

namespace {

// Text that does not parse as a flag value is a usage error (exit 2); values
// that parse but describe an invalid construction stay runtime errors.
template <typename F>
auto flag_value(const char* flag, F&& parse) {
  try {
    return parse();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::parse_error) throw;
    throw CLI::ValidationError(flag, e.what());
  }
}

// Mesh source shared by the report commands: either --mesh FILE or the
// build flags.
struct MeshSource {
  std::string mesh_path;
  int dim = 0;
  std::string window;
  std::string perm;
  std::string params;

  void attach(CLI::App* cmd, bool allow_file) {
    if (allow_file) cmd->add_option("--mesh", mesh_path, "mesh file to read");
    cmd->add_option("--dim", dim, "dimension d >= 1")->check(CLI::PositiveNumber);
    cmd->add_option("--window", window, "lo:hi per axis, comma separated (default: census window)");
    cmd->add_option("--perm", perm, "recoloring permutations, e.g. \"0,1;0,1,2\" (default: identity)");
    cmd->add_option("--params", params, "p_1,...,p_d (default: optimal parameters)");
  }

  MeshFile load() const {
    if (!mesh_path.empty()) {
      std::ifstream in(mesh_path, std::ios::binary);
      if (!in) throw Error(ErrorCode::parse_error, "cannot open mesh file '" + mesh_path + "'");
      std::ostringstream text;
      text << in.rdbuf();
      return parse_mesh(text.str());
    }
    if (dim < 1) throw CLI::ValidationError("--dim", "either --mesh or --dim is required");
    const Window w = window.empty() ? default_census_window(dim)
                                    : flag_value("--window", [&] { return parse_window(window); });
    const PermutationVector pi =
        perm.empty() ? PermutationVector::identity(dim)
                     : flag_value("--perm", [&] { return parse_permutations(perm); });
    Mesh mesh = build(dim, pi, w);
    return {std::move(mesh), resolve_params(dim)};
  }

  ParamVector resolve_params(int d) const {
    if (!params.empty()) {
      ParamVector p = flag_value("--params", [&] { return parse_params(params); });
      if (p.dim() != d) throw Error(ErrorCode::dimension_mismatch, "--params needs d entries");
      return p;
    }
    return d >= 2 ? optimal_params(d) : ParamVector({1.0});
  }
};

json to_json(const EdgeClass& w) { return w.w; }

json to_json(const std::vector<EdgeClass>& classes) {
  json out = json::array();
  for (const auto& w : classes) out.push_back(to_json(w));
  return out;
}

std::string tuple(const std::vector<int>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

std::string tuple(std::span<const double> v) {
  std::ostringstream s;
  s.precision(12);
  s << '(';
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? ", " : "") << v[i];
  s << ')';
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorCode::parse_error, "cannot write '" + path + "'");
}

json mesh_summary(const Mesh& m) {
  return {{"dim", m.dim()},
          {"cells", m.cell_count()},
          {"vertices", m.vertex_count()},
          {"window", format_window(m.window())},
          {"perm", format_permutations(m.permutations())}};
}

// ---------------------------------------------------------------------------

int cmd_build(const MeshSource& src, const std::string& out_path, bool as_json) {
  const MeshFile f = src.load();
  if (!out_path.empty()) write_file(out_path, serialize_mesh(f.mesh, f.params));
  if (as_json) {
    json j = mesh_summary(f.mesh);
    if (!out_path.empty()) j["out"] = out_path;
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "cells " << f.mesh.cell_count() << "\nvertices " << f.mesh.vertex_count() << '\n';
    if (!out_path.empty()) std::cout << "wrote " << out_path << '\n';
  }
  return 0;
}

int cmd_validate(const MeshSource& src, bool as_json) {
  const MeshFile f = src.load();
  const ValidationReport r = validate(f.mesh, f.params);
  if (as_json) {
    json j = mesh_summary(f.mesh);
    j["pass"] = r.pass();
    j["face_to_face"] = {{"pass", r.face_to_face.pass},
                         {"interior_facets", r.face_to_face.interior_facets},
                         {"boundary_facets", r.face_to_face.boundary_facets},
                         {"max_multiplicity", r.face_to_face.max_multiplicity},
                         {"counterexample", r.face_to_face.counterexample},
                         {"reason", r.face_to_face.reason}};
    j["coloring"] = {{"pass", r.coloring.pass}, {"residue_law", r.coloring.residue_law}};
    if (r.coloring.counterexample) {
      j["coloring"]["counterexample"] = {r.coloring.counterexample->first,
                                         r.coloring.counterexample->second};
    }
    j["equivolume"] = {{"pass", r.equivolume.pass},
                       {"bad_determinants", r.equivolume.bad_determinants},
                       {"worst_relative_deviation", r.equivolume.worst_relative_deviation}};
    std::cout << j.dump(2) << '\n';
  } else {
    auto mark = [](bool ok) { return ok ? "PASS" : "FAIL"; };
    std::cout << "cells " << f.mesh.cell_count() << ", vertices " << f.mesh.vertex_count() << '\n'
              << "face-to-face  " << mark(r.face_to_face.pass) << "  interior "
              << r.face_to_face.interior_facets << ", boundary " << r.face_to_face.boundary_facets
              << ", max multiplicity " << r.face_to_face.max_multiplicity << '\n';
    if (!r.face_to_face.pass) std::cout << "  " << r.face_to_face.reason << '\n';
    std::cout << "coloring      " << mark(r.coloring.pass) << "  residue law "
              << mark(r.coloring.residue_law) << '\n'
              << "equivolume    " << mark(r.equivolume.pass) << "  bad determinants "
              << r.equivolume.bad_determinants << ", worst relative deviation "
              << r.equivolume.worst_relative_deviation << '\n'
              << (r.pass() ? "PASS" : "FAIL") << '\n';
  }
  return r.pass() ? 0 : 1;
}

// Union of the census over every permutation vector; only sensible for small d.
std::vector<EdgeClass> census_union(int d, const Window& w, std::size_t& meshes) {
  if (d > 4) throw Error(ErrorCode::budget_exceeded, "--union is limited to d <= 4");
  std::set<EdgeClass> all;
  std::vector<std::vector<int>> levels;
  for (int level = 2; level <= d; ++level) {
    std::vector<int> p(static_cast<std::size_t>(level));
    std::iota(p.begin(), p.end(), 0);
    levels.push_back(p);
  }
  meshes = 0;
  while (true) {
    PermutationVector pi;
    for (const auto& p : levels) pi.push_back(p);
    for (const EdgeClass& c : edge_census(build(d, pi, w))) all.insert(c);
    ++meshes;
    std::size_t k = 0;
    while (k < levels.size() && !std::next_permutation(levels[k].begin(), levels[k].end())) ++k;
    if (k == levels.size()) break;
  }
  return {all.begin(), all.end()};
}

int cmd_census(const MeshSource& src, bool use_union, bool as_json) {
  std::vector<EdgeClass> classes;
  int d = 0;
  std::size_t meshes = 1;
  if (use_union) {
    if (!src.mesh_path.empty()) throw CLI::ValidationError("--union", "needs --dim, not --mesh");
    if (src.dim < 2) throw CLI::ValidationError("--dim", "--union needs --dim >= 2");
    d = src.dim;
    const Window w = src.window.empty()
                         ? default_census_window(d)
                         : flag_value("--window", [&] { return parse_window(src.window); });
    classes = census_union(d, w, meshes);
  } else {
    const MeshFile f = src.load();
    d = f.mesh.dim();
    classes = edge_census(f.mesh);
  }
  std::vector<EdgeClass> missing;
  if (d >= 2) {
    const auto hat = enumerate_W_hat(d);
    std::set_difference(hat.begin(), hat.end(), classes.begin(), classes.end(),
                        std::back_inserter(missing));
  }
  if (as_json) {
    json j{{"dim", d}, {"count", classes.size()}, {"classes", to_json(classes)}};
    if (use_union) j["meshes"] = meshes;
    if (d >= 2) j["candidates_missing"] = to_json(missing);
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << classes.size() << " classes" << (use_union ? " (union over " : "")
              << (use_union ? std::to_string(meshes) + " permutation vectors)" : "") << '\n';
    for (const auto& c : classes) std::cout << "  " << tuple(c.w) << '\n';
    if (d >= 2) {
      std::cout << missing.size() << " candidate classes not realized\n";
      for (const auto& c : missing) std::cout << "  " << tuple(c.w) << '\n';
    }
  }
  return 0;
}

int cmd_optimize(int d, const MaximizeOptions& options, bool as_json) {
  const OptimumVerification v = verify_optimum(d, options);
  const ParamVector star = optimal_params(d);
  const KKTReport kkt = kkt_check(star);
  const bool ok = v.pass() && kkt.satisfied();
  if (as_json) {
    json checks = json::array();
    for (const auto& c : v.checks) {
      checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }
    const auto p_hat = v.search.p_hat.values();
    std::cout << json{{"dim", d},
                      {"pass", ok},
                      {"p_hat", std::vector<double>(p_hat.begin(), p_hat.end())},
                      {"F_p_hat", v.search.F_value},
                      {"p_star", std::vector<double>(star.values().begin(), star.values().end())},
                      {"F_p_star", objective_F(star)},
                      {"starts", v.search.starts},
                      {"iterations", v.search.iterations},
                      {"converged", v.search.converged},
                      {"kkt",
                       {{"active_set", kkt.active_set},
                        {"multipliers", kkt.multipliers},
                        {"gradient", kkt.gradient},
                        {"fd_gradient", kkt.fd_gradient},
                        {"gradient_fd_deviation", kkt.gradient_fd_deviation},
                        {"stationarity_residual", kkt.stationarity_residual},
                        {"feasibility_violation", kkt.feasibility_violation},
                        {"satisfied", kkt.satisfied()}}},
                      {"checks", checks}}
                     .dump(2)
              << '\n';
    return ok ? 0 : 1;
  }
  std::cout.precision(12);
  std::cout << "p_hat    " << tuple(v.search.p_hat.values()) << "\nF(p_hat) " << v.search.F_value
            << "\np*       " << tuple(star.values()) << "\nF(p*)    " << objective_F(star)
            << "\nsearch   " << v.search.starts << " starts, " << v.search.iterations
            << " iterations" << (v.search.converged ? "" : " (not converged)") << '\n';
  std::cout << "KKT at p*: active set {";
  for (std::size_t i = 0; i < kkt.active_set.size(); ++i) std::cout << (i ? "," : "") << kkt.active_set[i];
  std::cout << "}, mu " << tuple(kkt.multipliers) << ", residual " << kkt.stationarity_residual
            << ", grad/FD deviation " << kkt.gradient_fd_deviation << " -> "
            << (kkt.satisfied() ? "satisfied" : "NOT satisfied") << '\n';
  for (const auto& c : v.checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  }
  std::cout << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : 1;
}

int cmd_compare(const MeshSource& src, bool as_json) {
  const MeshFile f = src.load();
  const int d = f.mesh.dim();
  const RegularityReport r = compare_regularity(f.mesh, f.params);
  const double bound = std::sqrt(3.0) / 2.0 * d;
  const bool optimal = f.params == optimal_params(d);
  if (as_json) {
    json j = mesh_summary(f.mesh);
    j.update({{"worst_theta", r.worst_theta},
              {"worst_cell_index", r.worst_cell_index},
              {"max_diameter", r.max_diameter},
              {"cell_volume", r.volume},
              {"kuhn_theta", r.kuhn_theta},
              {"ratio_vs_kuhn", r.ratio_vs_kuhn},
              {"F_p", objective_F(f.params)}});
    if (optimal) j["ratio_lower_bound"] = bound;
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout.precision(12);
    std::cout << "worst theta     " << r.worst_theta << "\nKuhn theta      " << r.kuhn_theta
              << "\nratio           " << r.ratio_vs_kuhn << '\n';
    if (optimal) std::cout << "lower bound     " << bound << "  (sqrt(3)/2 * d)\n";
    std::cout << "F(p)            " << objective_F(f.params) << "\nmax diameter    "
              << r.max_diameter << '\n';
  }
  return 0;
}

int cmd_sequence(int n, bool as_json) {
  const auto terms = oeis_denominators(n);
  if (as_json) {
    std::cout << json{{"n", n}, {"terms", terms}}.dump() << '\n';
  } else {
    for (std::size_t i = 0; i < terms.size(); ++i) std::cout << (i ? ", " : "") << terms[i];
    std::cout << '\n';
  }
  return 0;
}

int cmd_export(const std::string& mesh_path, const std::string& format, const std::string& out,
               bool as_json) {
  MeshSource src;
  src.mesh_path = mesh_path;
  const MeshFile f = src.load();
  const std::string vtk = export_vtk_legacy(f.mesh, f.params);
  (void)format;  // only one format; validated by the option check
  if (out.empty()) {
    std::cout << vtk;
    return 0;
  }
  write_file(out, vtk);
  if (as_json) {
    std::cout << json{{"out", out}, {"cells", f.mesh.cell_count()}, {"format", format}}.dump()
              << '\n';
  } else {
    std::cout << "wrote " << out << " (" << f.mesh.cell_count() << " cells)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivolume Sommerville tessellations: build, check and optimize"};
  app.require_subcommand(1);
  app.fallthrough();
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable output");

  MeshSource build_src, validate_src, census_src, compare_src;
  std::string build_out;
  auto* build_cmd = app.add_subcommand("build", "build a mesh window");
  build_src.attach(build_cmd, false);
  build_cmd->get_option("--dim")->required();
  build_cmd->add_option("--out", build_out, "mesh file to write");

  auto* validate_cmd = app.add_subcommand("validate", "face-to-face, coloring, equivolume");
  validate_src.attach(validate_cmd, true);

  bool use_union = false;
  auto* census_cmd = app.add_subcommand("census", "edge classes realized by a mesh");
  census_src.attach(census_cmd, true);
  census_cmd->add_flag("--union", use_union, "union over all permutation vectors (d <= 4)");

  int opt_dim = 0;
  MaximizeOptions options;
  auto* optimize_cmd = app.add_subcommand("optimize", "maximize the regularity bound");
  optimize_cmd->add_option("--dim", opt_dim, "dimension d >= 2")->required()->check(CLI::Range(2, 64));
  optimize_cmd->add_option("--starts", options.starts, "multistart count")->check(CLI::PositiveNumber);
  optimize_cmd->add_option("--tol", options.tol, "final step size")->check(CLI::PositiveNumber);
  optimize_cmd->add_option("--seed", options.seed, "start-point seed");

  auto* compare_cmd = app.add_subcommand("compare", "worst-cell regularity against Kuhn");
  compare_src.attach(compare_cmd, true);

  int seq_n = 11;
  auto* sequence_cmd = app.add_subcommand("sequence", "denominators 2/p_j^2 of the optimum");
  sequence_cmd->add_option("--n", seq_n, "number of terms")->check(CLI::PositiveNumber);

  std::string export_mesh, export_format, export_out;
  auto* export_cmd = app.add_subcommand("export", "write a VTK legacy file (d = 2, 3)");
  export_cmd->add_option("--mesh", export_mesh, "mesh file to read")->required();
  export_cmd->add_option("--format", export_format, "output format")
      ->required()
      ->check(CLI::IsMember({"vtk-legacy-ascii"}));
  export_cmd->add_option("--out", export_out, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*build_cmd) return cmd_build(build_src, build_out, as_json);
    if (*validate_cmd) return cmd_validate(validate_src, as_json);
    if (*census_cmd) return cmd_census(census_src, use_union, as_json);
    if (*optimize_cmd) return cmd_optimize(opt_dim, options, as_json);
    if (*compare_cmd) return cmd_compare(compare_src, as_json);
    if (*sequence_cmd) return cmd_sequence(seq_n, as_json);
    if (*export_cmd) return cmd_export(export_mesh, export_format, export_out, as_json);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
