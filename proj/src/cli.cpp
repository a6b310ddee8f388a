#include "oritrans/cli.hpp"

#include "oritrans/error.hpp"
#include "oritrans/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <optional>

namespace oritrans {

namespace {

struct Options {
  Budget budget;
  std::optional<double> tol;
  std::string svg;
  std::string csv;
  std::string output;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--budget-grid", o.budget.max_grid, "Largest lattice side in nodes");
  cmd->add_option("--budget-units", o.budget.max_units, "Largest total demand for the lattice oracles");
  cmd->add_option("--budget-enumeration", o.budget.max_enumeration, "Largest number of enumerated candidates");
  cmd->add_option("--budget-terminals", o.budget.max_terminals, "Largest number of points");
  cmd->add_option("--budget-steiner", o.budget.max_steiner, "Largest number of free Steiner nodes");
  cmd->add_option("--budget-iterations", o.budget.max_iterations, "Iteration limit of the continuous solvers");
  cmd->add_option("--seed", o.budget.seed, "Base seed of randomized starts");
  cmd->add_option("--tol", o.tol, "Solver tolerance");
  cmd->add_option("-o,--output", o.output, "Write the result JSON here instead of stdout");
}

Json budget_json(const Budget& b) {
  return {{"max_grid", b.max_grid},
          {"max_units", b.max_units},
          {"max_enumeration", b.max_enumeration},
          {"max_terminals", b.max_terminals},
          {"max_steiner", b.max_steiner},
          {"max_iterations", b.max_iterations},
          {"seed", b.seed},
          {"threads", worker_count()}};
}

Json report_json(const SolveReport& r) {
  Json config = Json::object();
  for (const auto& [k, v] : r.config) config[k] = v;
  Json out{{"value", r.value},   {"method", r.method},       {"enumerated", r.enumerated}, {"evaluated", r.evaluated},
           {"winner", r.winner}, {"converged", r.converged}, {"residual", r.residual},     {"config", config}};
  if (r.current) out["current"] = current_to_json(*r.current);
  if (r.family) out["family"] = family_to_json(*r.family);
  if (r.forest) out["forest"] = forest_to_json(*r.forest);
  return out;
}

void emit(const Json& j, const Options& o, std::ostream& out) {
  if (o.output.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_text_file(o.output, j.dump(2) + "\n");
  }
}

std::function<double(const Coef&)> density_for(const InstanceFile& inst) {
  if (inst.mailing) {
    const NormSpec spec = inst.norm;
    return [spec](const Coef& c) { return mailing_cost(c, spec.phi, spec.alpha); };
  }
  const NormSpec spec = inst.norm;
  return [spec](const Coef& c) { return coeff_norm(c, spec); };
}

const std::vector<Point>& points_of(const InstanceFile& inst) {
  return inst.mailing ? inst.mailing->points() : inst.steiner->points();
}

void write_figures(const InstanceFile& inst, const PolyCurrent1& t, const std::string& title, const Options& o) {
  if (!o.svg.empty()) write_text_file(o.svg, render_svg(points_of(inst), t, title));
  if (!o.csv.empty()) write_text_file(o.csv, atoms_csv(t, density_for(inst)));
}

int cmd_solve(const std::string& path, const std::string& method_flag, std::optional<std::size_t> max_steiner,
              const Options& o, std::ostream& out) {
  const InstanceFile inst = instance_from_json(read_json_file(path));
  SolveReport r;
  if (inst.steiner) {
    r = solve_partitioned_steiner(*inst.steiner, o.budget, o.tol.value_or(1e-10));
  } else {
    const std::string method = method_flag.empty() ? inst.solver.method : method_flag;
    const auto& m = *inst.mailing;
    if (method == "lattice_family" || method == "lattice_current") {
      if (!inst.solver.grid) throw InvalidArgument("the lattice solvers need solver.grid in the instance");
      if (method == "lattice_family") {
        r = brute_force_lattice_mailing(m, *inst.solver.grid, inst.norm.phi, inst.norm.alpha, o.budget);
        r.current = family_to_current(*r.family);
      } else {
        r = brute_force_lattice_current(m, *inst.solver.grid, inst.norm.phi, inst.norm.alpha, o.budget);
        r.family = current_to_family(*r.current, m).family;
      }
    } else if (method == "auto" || method == "topology") {
      r = solve_mailing_topology(m, inst.norm.phi, inst.norm.alpha, max_steiner.value_or(inst.solver.max_steiner),
                                 o.budget, o.tol.value_or(1e-9));
    } else {
      throw InvalidArgument("unknown method '" + method + "'");
    }
  }
  Json j = report_json(r);
  j["kind"] = inst.kind;
  j["norm"] = norm_to_json(inst.norm);
  j["budgets"] = budget_json(o.budget);
  emit(j, o, out);
  if (r.current) write_figures(inst, *r.current, inst.kind + " value " + std::to_string(r.value), o);
  return kExitOk;
}

int cmd_verify(const std::string& cert_path, const std::string& current_path, const CalibrationTolerances& tol,
               const Options& o, std::ostream& out) {
  const CalibrationCertificate cert = certificate_from_json(read_json_file(cert_path));
  const PolyCurrent1 t = current_from_json(read_json_file(current_path));
  const CalibrationReport r = verify_calibration(cert, t, tol);
  Json j = calibration_report_to_json(r, cert.norm());
  j["mass"] = mass(t, cert.norm());
  emit(j, o, out);
  switch (r.verdict) {
    case Verdict::kCalibrated:
      return kExitOk;
    case Verdict::kViolated:
      return kExitViolated;
    case Verdict::kInconclusive:
      return kExitInconclusive;
  }
  return kExitInvalid;
}

int cmd_convert(const std::string& input, const std::string& to, const std::string& instance_path, bool drop_cycles,
                const Options& o, std::ostream& out) {
  const Json in = read_json_file(input);
  std::optional<InstanceFile> inst;
  if (!instance_path.empty()) inst = instance_from_json(read_json_file(instance_path));
  auto need_mailing = [&]() -> const InstanceFile& {
    if (!inst || !inst->mailing) throw InvalidArgument("this conversion needs --instance with a mailing instance");
    return *inst;
  };

  Json j{{"to", to}};
  std::optional<PolyCurrent1> drawn;
  if (in.contains("paths")) {
    if (to != "current") throw InvalidArgument("a family converts only to a current");
    const InstanceFile& mi = need_mailing();
    const PathFamily f = family_from_json(in, *mi.mailing);
    if (auto problem = compatibility_problem(f)) throw BoundaryMismatch(*problem);
    const PolyCurrent1 t = family_to_current(f);
    if (!(boundary(t) == build_boundary_mailing(*mi.mailing))) throw BoundaryMismatch("family boundary differs from B");
    j["from"] = "family";
    j["object"] = current_to_json(t);
    j["boundary"] = measure_to_json(boundary(t));
    j["before"] = {{"energy", energy_family(f, mi.norm.phi, mi.norm.alpha)}};
    j["after"] = {{"energy", energy(t, mi.norm.phi, mi.norm.alpha)}};
    drawn = t;
  } else if (in.contains("edges") && in.contains("vertices")) {
    if (to != "current") throw InvalidArgument("a forest converts only to a current");
    if (!inst || !inst->steiner) throw InvalidArgument("this conversion needs --instance with a steiner instance");
    const Forest f = forest_from_json(in);
    const PolyCurrent1 t = tree_to_current(f, *inst->steiner);
    j["from"] = "forest";
    j["object"] = current_to_json(t);
    j["before"] = {{"length", f.length()}};
    j["after"] = {{"mass", mass(t, NormSpec::linf(t.m()))}};
    drawn = t;
  } else if (in.contains("atoms")) {
    PolyCurrent1 t = current_from_json(in);
    j["from"] = "current";
    if (to == "family") {
      const InstanceFile& mi = need_mailing();
      const FamilyFromCurrent r = current_to_family(t, *mi.mailing);
      j["object"] = family_to_json(r.family);
      j["dropped_cycle_length"] = r.dropped_cycle_length;
      j["before"] = {{"energy", energy(t, mi.norm.phi, mi.norm.alpha)}};
      j["after"] = {{"energy", energy_family(r.family, mi.norm.phi, mi.norm.alpha)}};
      drawn = family_to_current(r.family);
    } else if (to == "relaxed") {
      const InstanceFile& mi = need_mailing();
      double dropped = 0.0;
      const double before = energy(t, mi.norm.phi, mi.norm.alpha);
      if (drop_cycles) {
        auto r = remove_cycles_with_report(t);
        dropped = r.dropped_cycle_length;
        t = std::move(r.current);
      }
      const PolyCurrent1 lift = lift_to_relaxed(t, *mi.mailing, *mi.ordering);
      const NormSpec spec = NormSpec::phi_alpha(mi.norm.phi, mi.norm.alpha, lift.m());
      j["object"] = current_to_json(lift);
      j["boundary"] = measure_to_json(boundary(lift));
      j["boundary_matches"] = boundary(lift) == build_boundary_relaxed(*mi.mailing, *mi.ordering);
      j["dropped_cycle_length"] = dropped;
      j["before"] = {{"energy", before}};
      j["after"] = {{"mass", mass(lift, spec)}};
      drawn = lift;
    } else if (to == "projected") {
      const InstanceFile& mi = need_mailing();
      if (t.m() != mi.ordering->total()) throw InvalidArgument("relaxed current must have N coefficients");
      const NormSpec spec = NormSpec::phi_alpha(mi.norm.phi, mi.norm.alpha, t.m());
      const PolyCurrent1 p = project_relaxed(t, *mi.ordering);
      j["object"] = current_to_json(p);
      j["before"] = {{"mass", mass(t, spec)}};
      j["after"] = {{"energy", energy(p, mi.norm.phi, mi.norm.alpha)}};
      drawn = p;
    } else {
      throw InvalidArgument("a current converts to family, relaxed or projected");
    }
  } else {
    throw InvalidArgument("input is not a family, forest or current");
  }
  emit(j, o, out);
  if (drawn && inst) write_figures(*inst, *drawn, "converted to " + to, o);
  return kExitOk;
}

int cmd_relax(const std::string& instance_path, const std::string& support_path, const Options& o,
              std::ostream& out) {
  const InstanceFile inst = instance_from_json(read_json_file(instance_path));
  const std::vector<Segment> support = support_from_json(read_json_file(support_path));
  AtomicMeasure0 b(1);
  NormSpec spec = inst.norm;
  if (inst.steiner) {
    b = build_boundary_steiner(*inst.steiner);
    spec.dim = inst.steiner->m();
  } else {
    b = build_boundary_relaxed(*inst.mailing, *inst.ordering);
    spec.dim = inst.ordering->total();
  }
  const SolveReport r = solve_real_relaxation(support, b, spec, o.tol.value_or(1e-6), o.budget);
  Json j = report_json(r);
  j["kind"] = inst.kind;
  j["norm"] = norm_to_json(spec);
  j["budgets"] = budget_json(o.budget);
  std::optional<double> integer;
  try {
    if (inst.steiner) {
      integer = solve_partitioned_steiner(*inst.steiner, o.budget).value;
      j["integer_method"] = "partitioned-steiner";
    } else {
      integer = solve_mailing_topology(*inst.mailing, inst.norm.phi, inst.norm.alpha, inst.solver.max_steiner,
                                       o.budget)
                    .value;
      j["integer_method"] = "topology";
    }
  } catch (const BudgetExceeded&) {
    integer.reset();
  } catch (const NonConvergence&) {
    integer.reset();
  }
  if (integer) {
    j["integer_value"] = *integer;
    j["gap"] = *integer - r.value;
  } else {
    j["integer_value"] = nullptr;
    j["gap"] = nullptr;
  }
  emit(j, o, out);
  if (r.current) write_figures(inst, *r.current, "relaxation value " + std::to_string(r.value), o);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Oriented mailing and partitioned Steiner problems as mass minimization over currents", "oritrans"};
  app.require_subcommand(1);
  Options o;

  auto* solve = app.add_subcommand("solve", "Solve a mailing or steiner instance");
  std::string instance;
  std::string method;
  std::optional<std::size_t> max_steiner;
  solve->add_option("instance", instance, "Instance JSON")->required();
  solve->add_option("--method", method, "auto, topology, lattice_family or lattice_current");
  solve->add_option("--max-steiner", max_steiner, "Steiner nodes for the topology solver");
  solve->add_option("--svg", o.svg, "Write an SVG drawing of the optimum");
  solve->add_option("--csv", o.csv, "Write the per-atom table");
  add_common(solve, o);

  auto* verify = app.add_subcommand("verify", "Check a piecewise-constant calibration against a current");
  std::string certificate;
  std::string current;
  CalibrationTolerances ctol;
  verify->add_option("certificate", certificate, "Certificate JSON")->required();
  verify->add_option("current", current, "Current JSON")->required();
  verify->add_option("--tol-closed", ctol.closed, "Tangential jump tolerance");
  verify->add_option("--tol-comass", ctol.comass, "Comass tolerance");
  verify->add_option("--tol-equality", ctol.equality, "Equality tolerance");
  add_common(verify, o);

  auto* convert = app.add_subcommand("convert", "Convert between families, currents, lifts and forests");
  std::string input;
  std::string to;
  std::string convert_instance;
  bool drop_cycles = false;
  convert->add_option("input", input, "Family, current or forest JSON")->required();
  convert->add_option("--to", to, "current, family, relaxed or projected")
      ->required()
      ->check(CLI::IsMember({"current", "family", "relaxed", "projected"}));
  convert->add_option("--instance", convert_instance, "Instance the object belongs to");
  convert->add_flag("--remove-cycles", drop_cycles, "Drop cycles before lifting");
  convert->add_option("--svg", o.svg, "Write an SVG drawing of the result");
  convert->add_option("--csv", o.csv, "Write the per-atom table");
  add_common(convert, o);

  auto* relax = app.add_subcommand("relax", "Solve the convex relaxation on a fixed support");
  std::string relax_instance;
  std::string support;
  relax->add_option("instance", relax_instance, "Instance JSON")->required();
  relax->add_option("support", support, "Support JSON with a list of segments")->required();
  relax->add_option("--svg", o.svg, "Write an SVG drawing of the coefficient field");
  relax->add_option("--csv", o.csv, "Write the per-atom table");
  add_common(relax, o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }
  if (o.tol && !(*o.tol > 0.0 && std::isfinite(*o.tol))) {
    err << "error: --tol must be positive\n";
    return kExitInvalid;
  }

  try {
    if (solve->parsed()) return cmd_solve(instance, method, max_steiner, o, out);
    if (verify->parsed()) return cmd_verify(certificate, current, ctol, o, out);
    if (convert->parsed()) return cmd_convert(input, to, convert_instance, drop_cycles, o, out);
    if (relax->parsed()) return cmd_relax(relax_instance, support, o, out);
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << '\n';
    return kExitBudget;
  } catch (const NonConvergence& e) {
    err << "did not converge within the iteration budget: " << e.what() << '\n';
    return kExitBudget;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const Json::exception& e) {
    err << "malformed input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace oritrans
