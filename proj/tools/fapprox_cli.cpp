// fapprox: inspect | verify | solve | study on a JSON problem config.
// Exit codes: 0 pass, 1 failed check or numerical failure, 2 bad input.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fapprox/affine.hpp"
#include "fapprox/config.hpp"
#include "fapprox/parallel.hpp"
#include "fapprox/semigroup.hpp"
#include "fapprox/solver.hpp"
#include "fapprox/study.hpp"

using namespace fapprox;
using json = nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string method;
  int threads = 1;
  bool timing = false;
};

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const EstimateReport& r) {
  return {{"name", r.name},       {"passed", r.passed},   {"constant", number(r.constant)},
          {"refined_constant", number(r.refined_constant)}, {"witness", r.witness}, {"note", r.note}};
}

json to_json(const FormConstants& c) {
  return {{"M", c.M}, {"alpha", c.alpha}, {"beta", c.beta}, {"gamma", c.gamma}, {"theta", c.theta}};
}

json to_json(const ModulusProfile& p) {
  json j = {{"dini_integral", number(p.dini.integral)}, {"sup_ratio", number(p.dini.sup_ratio)},
            {"dini_finite", p.dini.finite}, {"zero", p.is_zero()}};
  if (p.power) j["power"] = {{"C", p.power->C}, {"eta", p.power->eta}};
  return j;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw InvalidInput("cannot write " + out);
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::vector<FormPath> affine_family(const FormPath& fp, const std::vector<int>& ladder) {
  std::vector<FormPath> seq;
  for (int m : ladder) seq.push_back(build_affine(fp, m).as_path());
  return seq;
}

ModulusProfile base_modulus(const ProblemConfig& cfg) {
  return measure_modulus(cfg.form, cfg.gamma, log_delta_grid(cfg.horizon, 33));
}

int cmd_inspect(const ProblemConfig& cfg, const Flags& flags) {
  const FormConstants c = estimate_constants(cfg.form, 65, 1024.0);
  HypothesisOptions opt;
  opt.indices = cfg.verify.affine_ladder;
  const HypothesisReport rep =
      check_hypotheses(cfg.form, affine_family(cfg.form, cfg.verify.affine_ladder), cfg.gamma, opt);

  std::ostringstream text;
  text << std::setprecision(6);
  text << "form " << cfg.form.descriptor() << "\n";
  text << "constants M=" << c.M << " alpha=" << c.alpha << " beta=" << c.beta << " theta=" << c.theta << "\n";
  const ModulusProfile& w = rep.base;
  text << "modulus ";
  if (w.is_zero()) {
    text << "zero";
  } else if (w.power) {
    text << "C=" << w.power->C << " eta=" << w.power->eta;
  } else {
    text << "table";
  }
  text << " dini=" << w.dini.integral << " sup_ratio=" << w.dini.sup_ratio << "\n";
  for (const auto& r : rep.results) {
    text << std::left << std::setw(4) << r.name << (r.passed ? "pass" : "FAIL") << (r.assumed ? " (assumed)" : "")
         << "  " << r.detail << "\n";
  }
  std::cout << text.str();

  if (!flags.out.empty()) {
    json hyp = json::array();
    for (const auto& r : rep.results) {
      hyp.push_back({{"name", r.name}, {"passed", r.passed}, {"assumed", r.assumed}, {"detail", r.detail}});
    }
    emit(flags.out, dump({{"constants", to_json(c)},
                          {"modulus", to_json(w)},
                          {"hypotheses", hyp},
                          {"passed", rep.all_passed()}}));
  }
  return rep.all_passed() ? 0 : 1;
}

int cmd_verify(const ProblemConfig& cfg, const Flags& flags) {
  const FormConstants c = estimate_constants(cfg.form, 65, 1024.0);
  SectorSpec spec = SectorSpec::from_theta(c.theta);
  if (cfg.verify.contour_angle > 0.0) spec.contour_angle = cfg.verify.contour_angle;
  spec.radius_cap = cfg.verify.radius_cap;
  if (cfg.verify.contour_points > 0) spec.contour_points = cfg.verify.contour_points;
  spec.validate();

  bool passed = true;
  json j;
  j["constants"] = to_json(c);

  json sector = json::array();
  for (const auto& r : verify_sector_estimates(cfg.form, c, spec)) {
    passed = passed && r.passed;
    sector.push_back(to_json(r));
  }
  j["sector"] = sector;

  json contour = json::array();
  for (double s : cfg.verify.contour_times) {
    for (double t : {0.0, cfg.horizon}) {
      EstimateReport r = contour_report(cfg.form.space(), cfg.form(t), s, spec, c.beta);
      std::ostringstream os;
      os << "t=" << t << " s=" << s;
      r.witness = os.str();
      passed = passed && r.passed;
      contour.push_back(to_json(r));
    }
  }
  j["contour"] = contour;

  const ModulusProfile omega = base_modulus(cfg);
  json affine = json::array();
  for (int m : cfg.verify.affine_ladder) {
    const AffineFormPath afp = build_affine(cfg.form, m);
    for (const auto& r : verify_affine_bounds(cfg.form, afp, omega, cfg.gamma, cfg.verify.pair_samples)) {
      passed = passed && r.passed;
      json e = to_json(r);
      e["m"] = m;
      affine.push_back(e);
    }
  }
  j["affine"] = affine;

  const TimeGrid qgrid = TimeGrid::uniform(cfg.horizon, 32, 2);
  json q = json::array();
  double prev = INFINITY, last = INFINITY;
  bool monotone = true;
  for (double mu : cfg.verify.mu_ladder) {
    const QNormEstimate e = q_norm_estimate(cfg.form, mu, qgrid);
    if (e.value > prev + 1e-9) monotone = false;
    prev = last = e.value;
    q.push_back({{"mu", mu}, {"q", e.value}, {"coarse", e.coarse}});
  }
  const bool q_ok = monotone && last < 0.5;
  passed = passed && q_ok;
  j["q_ladder"] = {{"values", q}, {"nonincreasing", monotone}, {"passed", q_ok}};
  j["passed"] = passed;
  emit(flags.out, dump(j));
  return passed ? 0 : 1;
}

int cmd_solve(const ProblemConfig& cfg, const Flags& flags) {
  const std::string method = flags.method.empty() ? cfg.solver.method : flags.method;
  const TimeGrid grid = TimeGrid::uniform(cfg.horizon, cfg.solver.cells, cfg.solver.gauss_order);
  Trajectory traj(grid);
  if (method == "oracle") {
    traj = oracle_solve(cfg.form, cfg.f, cfg.u0, grid, cfg.solver.substeps);
  } else if (method == "at") {
    ATOptions opt;
    opt.mu_cap = cfg.solver.mu_cap;
    opt.tol = cfg.solver.tol;
    opt.max_iter = cfg.solver.max_iter;
    traj = at_solve(cfg.form, cfg.f, cfg.u0, grid, opt);
  } else {
    throw InvalidInput("--method must be \"at\" or \"oracle\"");
  }
  const SpacePair& sp = cfg.form.space();
  std::ostringstream os;
  os << "t";
  for (int k = 0; k < sp.dim(); ++k) os << ",re" << k << ",im" << k;
  os << ",norm_h,norm_v\n" << std::setprecision(12);
  for (int i = 0; i <= grid.cells(); ++i) {
    const Vector& u = traj.values[i];
    os << grid.nodes()[i];
    for (int k = 0; k < sp.dim(); ++k) os << ',' << u(k).real() << ',' << u(k).imag();
    os << ',' << sp.h_norm(u) << ',' << sp.v_norm(u) << "\n";
  }
  emit(flags.out, os.str());
  return 0;
}

int cmd_study(const ProblemConfig& cfg, const Flags& flags) {
  const ModulusProfile omega = base_modulus(cfg);
  StudyOptions opt;
  opt.gauss_order = cfg.solver.gauss_order;
  opt.substeps = cfg.solver.substeps;
  opt.method = flags.method.empty() ? cfg.study.method : flags.method;
  opt.at.mu_cap = cfg.solver.mu_cap;
  opt.at.tol = cfg.solver.tol;
  opt.at.max_iter = cfg.solver.max_iter;
  const StudyResult res = convergence_study(cfg.form, omega, cfg.gamma, cfg.study.ladder, StudyData{cfg.f, cfg.u0}, opt);
  std::ostringstream os;
  write_study_csv(os, res.rows, flags.timing);
  emit(flags.out, os.str());

  json summary = {{"dominance_passed", res.dominance_passed},
                  {"fitted_constant", number(res.fitted_constant)},
                  {"reference_error", number(res.reference_error)},
                  {"reference_ok", res.reference_ok},
                  {"rows_failed", res.any_failed}};
  int ok_rows = 0;
  for (const auto& r : res.rows) ok_rows += r.ok;
  if (ok_rows >= 3) {
    const RateFit fit = rate_fit(res.rows);
    summary["noise_floor"] = fit.noise_floor;
    if (!fit.noise_floor) {
      summary["slopes"] = {{"mr2_vvp", fit.mr2_vvp}, {"mr2_vh", fit.mr2_vh}, {"sup_h", fit.sup_h}, {"sup_v", fit.sup_v}};
    }
  }
  std::cerr << summary.dump(2) << "\n";
  return res.dominance_passed && !res.any_failed ? 0 : 1;
}

void fail_json(const char* kind, const std::string& message) {
  std::cerr << json({{"error", kind}, {"message", message}}).dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affine-in-time approximation of non-autonomous evolution equations"};
  app.require_subcommand(1);
  Flags flags;
  std::string command;
  const std::pair<const char*, const char*> commands[] = {
      {"inspect", "estimate form constants and check the hypotheses"},
      {"verify", "run the sector, contour, affine and contraction checks"},
      {"solve", "solve the problem and write the trajectory as CSV"},
      {"study", "run the convergence study over the mesh ladder"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "problem config (JSON)")->required();
    sub->add_option("--out", flags.out, "output path (stdout when omitted)");
    sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
    if (std::string(name) == "solve" || std::string(name) == "study") {
      sub->add_option("--method", flags.method, "at or oracle")->check(CLI::IsMember({"at", "oracle"}));
    }
    if (std::string(name) == "study") sub->add_flag("--timing", flags.timing, "write measured runtimes");
    sub->callback([&command, name] { command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  thread_count() = static_cast<unsigned>(flags.threads);

  ProblemConfig* cfg = nullptr;
  std::optional<ProblemConfig> holder;
  try {
    holder.emplace(load_config(flags.config));
    cfg = &*holder;
  } catch (const std::exception& e) {
    fail_json("ConfigError", e.what());
    return 2;
  }
  try {
    if (command == "inspect") return cmd_inspect(*cfg, flags);
    if (command == "verify") return cmd_verify(*cfg, flags);
    if (command == "solve") return cmd_solve(*cfg, flags);
    return cmd_study(*cfg, flags);
  } catch (const NumericalFailure& e) {
    fail_json("NumericalFailure", e.what());
    return 1;
  } catch (const InvalidInput& e) {
    const std::string msg = e.what();
    // A modulus failing the Dini condition is a hypothesis failure, not bad input.
    if (msg.find("Dini") != std::string::npos) {
      fail_json("HypothesisFailure", msg);
      return 1;
    }
    fail_json("InvalidInput", msg);
    return 2;
  } catch (const std::exception& e) {
    fail_json("Error", e.what());
    return 1;
  }
}
