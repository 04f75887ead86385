#include "latrem/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>

#include "latrem/errors.hpp"
#include "latrem/exp_sum.hpp"
#include "latrem/geometry_lemmas.hpp"
#include "latrem/lattice_count.hpp"
#include "latrem/remainder.hpp"

namespace latrem {

namespace {

constexpr const char* kVersion = "1.0.0";

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

nlohmann::json rational_json(const Rational& r) { return {{"exact", r.str()}, {"value", r.to_double()}}; }

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ResourceError("cannot write " + p.string());
  out << s;
}

struct Recorder {
  ExperimentOutcome& out;
  nlohmann::json& checks;

  void check(const std::string& name, bool ok, nlohmann::json detail = nlohmann::json::object()) {
    detail["passed"] = ok;
    checks[name] = detail;
    if (!ok) out.failed_checks.push_back(name);
  }
  void stage(const std::string& name, const std::function<void()>& f) {
    try {
      f();
    } catch (const std::exception& e) {
      out.stage_errors.push_back(name + ": " + e.what());
      out.report["errors"][name] = e.what();
    }
  }
};

}  // namespace

int ExperimentOutcome::exit_code() const {
  if (!stage_errors.empty()) return 1;
  return failed_checks.empty() ? 0 : 2;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentOutcome out;
  auto& rep = out.report;
  rep["versions"] = {{"latrem", kVersion}, {"compiler", __VERSION__}};
  rep["seed"] = cfg.seed;
  rep["body"] = cfg.body_descriptor;
  rep["errors"] = nlohmann::json::object();
  rep["checks"] = nlohmann::json::object();
  rep["constants"] = nlohmann::json::object();
  Recorder rec{out, rep["checks"]};
  const ConvexBody body = body_from_json(cfg.body_descriptor);
  const int d = cfg.d;
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);

  rec.stage("counting", [&] {
    const auto records = remainder_series(body, cfg.t_grid);
    std::string csv = "t,count,main_term,remainder\n";
    for (const auto& r : records)
      csv += num(r.t) + "," + std::to_string(r.count) + "," + num(r.main_term) + "," + num(r.remainder) + "\n";
    write_text(dir / "records.csv", csv);
    const ExponentFit fit = fit_envelope_exponent(records, cfg.fit_block);
    rep["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"block", fit.block}};
    rec.check("fit_slope_bound", fit.slope <= cfg.slope_bound, {{"slope", fit.slope}, {"bound", cfg.slope_bound}});
  });

  rec.stage("sandwich", [&] {
    if (cfg.sandwich_t.empty()) return;
    const double c1 = calibrate_c1(body, cfg.sandwich_t, cfg.sandwich_eps);
    rep["constants"]["C1"] = c1;
    bool all = true;
    nlohmann::json rows = nlohmann::json::array();
    for (double t : cfg.sandwich_t)
      for (double e : cfg.sandwich_eps) {
        const SandwichResult s = sandwich_check(body, t, Mollifier(d, e), c1);
        all = all && s.holds;
        rows.push_back({{"t", t}, {"eps", e}, {"lower_margin", s.lower_margin}, {"upper_margin", s.upper_margin}});
      }
    rep["sandwich"] = rows;
    rec.check("sandwich", all);
  });

  rec.stage("r_epsilon", [&] {
    if (cfg.r_eps_t.empty()) return;
    nlohmann::json rows = nlohmann::json::array();
    bool all = true;
    for (double t : cfg.r_eps_t) {
      const double e = cfg.epsilon_at(t);
      const REpsilonResult r = r_epsilon_direct(body, t, Mollifier(d, e), cfg.k_radius_factor / e);
      const double diff = std::abs(r.dual - Complex(r.space, 0.0));
      all = all && diff <= cfg.cross_tolerance && !r.tail_flag;
      rows.push_back({{"t", t},
                      {"eps", e},
                      {"dual", complex_json(r.dual)},
                      {"space", r.space},
                      {"difference", diff},
                      {"tail_estimate", r.tail_estimate},
                      {"tail_flag", r.tail_flag},
                      {"terms", r.terms}});
    }
    rep["r_epsilon"] = rows;
    rec.check("r_epsilon_cross", all, {{"tolerance", cfg.cross_tolerance}});
  });

  std::optional<Vec> patch_xi;
  rec.stage("decomposition", [&] {
    const double e = cfg.epsilon_at(cfg.s1_t);
    S1Options opt;
    opt.N1 = cfg.N1;
    opt.term_budget = cfg.s1_term_budget;
    const S1Assembly s = s1_assembly(body, cfg.s1_t, Mollifier(d, e), cfg.s1_N, opt);
    std::string csv = "j,M,re,im,patch_re,patch_im,partition_residual,patches,tail_model\n";
    for (const auto& r : s.per_scale)
      csv += std::to_string(r.j) + "," + num(r.M) + "," + num(r.value.real()) + "," + num(r.value.imag()) + "," +
             num(r.patch_total.real()) + "," + num(r.patch_total.imag()) + "," + num(r.partition_residual) + "," +
             std::to_string(r.patches) + "," + num(r.tail_model) + "\n";
    write_text(dir / "decomposition.csv", csv);
    nlohmann::json dj = {{"t", cfg.s1_t},
                         {"eps", e},
                         {"N", cfg.s1_N},
                         {"S1", complex_json(s.S1)},
                         {"direct", complex_json(s.direct)},
                         {"j_max", s.j_max},
                         {"budget_bound", s.budget_bound},
                         {"dyadic_residual", s.dyadic_residual},
                         {"partition_residual", s.partition_residual}};
    rec.check("dyadic_identity", s.dyadic_residual <= 1e-9, {{"residual", s.dyadic_residual}});
    rec.check("partition_identity", s.partition_residual <= 1e-9, {{"residual", s.partition_residual}});
    rec.check("tail_model", s.tail_monotone);
    if (s.coset) {
      dj["coset"] = {{"j", s.coset->j},
                     {"L", s.coset->L},
                     {"alpha", s.coset->alpha},
                     {"patch_value", complex_json(s.coset->patch_value)},
                     {"resummed", complex_json(s.coset->resummed)},
                     {"residual", s.coset->residual}};
      rep["constants"]["alpha"] = s.coset->alpha;
      patch_xi = s.coset->xi;
      rec.check("coset_resummation", s.coset->residual <= 1e-9, {{"residual", s.coset->residual}});
    }
    rep["decomposition"] = dj;
  });

  rec.stage("partition_pointwise", [&] {
    const SphericalPartition sp(d, cfg.s1_N);
    const DyadicPartition dy;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> rad(0.5, 2.0), lr(-6.0, 6.0);
    double worst_sp = 0.0, worst_dy = 0.0;
    int worst_overlap = 0;
    for (int s = 0; s < 1000; ++s) {
      Vec y(d);
      for (int i = 0; i < d; ++i) y(i) = g(rng);
      Vec z = y * (std::exp2(lr(rng)) / y.norm());
      y *= rad(rng) / y.norm();
      double total = 0.0;
      for (const auto& w : sp.weights({y.data(), static_cast<std::size_t>(d)})) total += w.value;
      worst_sp = std::max(worst_sp, std::abs(total - 1.0));
      worst_overlap = std::max(worst_overlap, sp.overlap({y.data(), static_cast<std::size_t>(d)}));
      worst_dy = std::max(worst_dy, std::abs(dy.partial_sum({z.data(), static_cast<std::size_t>(d)}, -9, 9) - 1.0));
    }
    rep["partition"] = {{"overlap_max", worst_overlap},
                        {"overlap_bound", sp.overlap_bound()},
                        {"derivative_constant_1", sp.derivative_constant(1, 20, cfg.seed)},
                        {"derivative_constant_2", sp.derivative_constant(2, 20, cfg.seed)}};
    rec.check("spherical_pointwise", worst_sp <= 1e-10 && worst_overlap <= sp.overlap_bound(),
              {{"residual", worst_sp}});
    rec.check("dyadic_pointwise", worst_dy <= 1e-10, {{"residual", worst_dy}});
  });

  rec.stage("exponents", [&] {
    if (d >= 3) {
      const ExponentTable et = exponent_table(d);
      rep["exponents"] = {{"hlawka", rational_json(et.hlawka)},
                          {"muller_lambda", rational_json(et.muller_lambda)},
                          {"beta", rational_json(et.beta)}};
      const EpsilonBalance b = balance_epsilon(d);
      rep["exponents"]["balance"] = {{"q", b.q},
                                     {"epsilon_exponent", rational_json(b.epsilon_exponent)},
                                     {"beta", rational_json(b.beta)},
                                     {"second_term_t", rational_json(b.second_term_t)},
                                     {"third_term_t", rational_json(b.third_term_t)}};
      rec.check("balance", b.balanced && b.beta == et.beta);
      nlohmann::json terms = nlohmann::json::array();
      for (double t : cfg.t_grid) {
        if (!(t > 1.0)) continue;
        const TermDominance td = three_term_report(d, t, std::pow(t, -b.epsilon_exponent.to_double()));
        terms.push_back({{"t", t},
                         {"first", td.first},
                         {"second", td.second},
                         {"third", td.third},
                         {"dominant", td.dominant}});
      }
      rep["exponents"]["terms"] = terms;
    }
  });

  rec.stage("frames", [&] {
    if (!cfg.frames) return;
    if (d == 3) rep["constants"]["A3"] = find_a3(body, direction_net(d, 20), 1);
    if (patch_xi) {
      const double r = 1.0 / (2.0 * static_cast<double>(cfg.s1_N));
      PhasePair pp;
      pp.dimension = d;
      pp.G = [](std::span<const double>) { return 1.0; };
      pp.F = [&](std::span<const double> x) { return body.support(x); };
      pp.omega.centers.push_back(*patch_xi);
      pp.omega.radii.push_back(2.0 * r);
      pp.margin = r;
      rep["constants"]["A0"] = phase_gradient_bound(pp);
    }
  });

  rep["exit_code"] = out.exit_code();
  write_text(dir / "report.json", rep.dump(2) + "\n");
  return out;
}

}  // namespace latrem
