// expsum: exponential sums S(T, M; G, F) from JSON instance descriptors.

#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "instances.hpp"

namespace {

using namespace latrem;

std::vector<IVec> shifts_for(int d, int q) {
  // r_1 = e_1, r_l = e_d for l >= 2.
  std::vector<IVec> r;
  for (int l = 0; l < q; ++l) r.push_back(IVec::Unit(d, l == 0 ? 0 : d - 1));
  return r;
}

// sum |G(m / M)|, the bound with no cancellation.
double trivial_bound(const SumSpec& spec, const PhasePair& pp) {
  SumSpec s = spec;
  s.T = 0.0;
  PhasePair absg = pp;
  absg.G = [g = pp.G](std::span<const double> x) { return std::abs(g(x)); };
  return std::abs(eval_sum(s, absg));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exponential sums: evaluation, Weyl differencing, the A-process, the Poisson dual"};
  app.require_subcommand(1);
  std::string path;
  std::vector<double> t_sweep;
  int q = 1;
  double H = 4.0;
  std::vector<double> radii{1, 2, 4, 8, 16};

  auto* eval = app.add_subcommand("eval", "Evaluate the sum over a T sweep");
  eval->add_option("--instance", path, "JSON instance")->required();
  eval->add_option("--T", t_sweep, "T values (defaults to the instance T)")->delimiter(',');

  auto* weyl = app.add_subcommand("weyl", "Weyl difference identity and inequality");
  weyl->add_option("--instance", path, "JSON instance")->required();
  weyl->add_option("--q", q, "Differencing depth")->check(CLI::Range(1, 3));
  weyl->add_option("--H", H, "Differencing length H");

  auto* aproc = app.add_subcommand("aproc", "Differenced sums of one A-process step");
  aproc->add_option("--instance", path, "JSON instance")->required();
  aproc->add_option("--q", q, "Differencing depth")->check(CLI::Range(1, 3));
  aproc->add_option("--H", H, "Differencing length H");

  auto* poisson = app.add_subcommand("poisson", "Poisson dual against the direct sum");
  poisson->add_option("--instance", path, "JSON instance")->required();
  poisson->add_option("--radii", radii, "Dual truncation radii")->delimiter(',');

  auto* ratios = app.add_subcommand("ratios", "B-process ratio over a T sweep");
  ratios->add_option("--instance", path, "JSON instance")->required();
  ratios->add_option("--T", t_sweep, "T values")->delimiter(',')->required();

  CLI11_PARSE(app, argc, argv);
  try {
    const tools::SumInstance inst = tools::sum_instance(tools::read_json(path));
    const int d = inst.pair.dimension;
    if (*eval || *ratios) {
      if (t_sweep.empty()) t_sweep.push_back(inst.spec.T);
      std::printf("T,M,value,bound,ratio\n");
      for (double T : t_sweep) {
        SumSpec s = inst.spec;
        s.T = T;
        const Complex v = eval_sum(s, inst.pair);
        if (*eval) {
          const double b = trivial_bound(s, inst.pair);
          std::printf("%.17g,%.17g,%.17g,%.17g,%.17g\n", T, s.M, std::abs(v), b, std::abs(v) / b);
        } else {
          const double r = b_process_ratio(s, inst.pair);
          std::printf("%.17g,%.17g,%.17g,%.17g,%.17g\n", T, s.M, std::abs(v), std::abs(v) / r, r);
        }
      }
    } else if (*weyl) {
      const WeylIdentity id = weyl_difference_identity(inst.spec, inst.pair, IVec::Unit(d, 0));
      const WeylInequality w = verify_weyl_inequality(inst.spec, inst.pair, q, shifts_for(d, q), H);
      nlohmann::json j = {{"identity", {{"lhs", id.lhs}, {"rhs", id.rhs}, {"line_lhs", id.line_lhs}, {"line_rhs", id.line_rhs}}},
                          {"inequality", {{"q", q}, {"H", H}, {"lhs", w.lhs}, {"rhs", w.rhs}, {"ratio", w.ratio}}}};
      std::printf("%s\n", j.dump(2).c_str());
    } else if (*aproc) {
      const TransformedSum ts = a_process(inst.spec, inst.pair, q, shifts_for(d, q), H);
      std::printf("h,T_h,value\n");
      for (const auto& h : ts.tuples) {
        const DifferencedPair dp = ts.differenced(h);
        SumSpec s = ts.spec;
        s.T = ts.T_of(h);
        std::string key;
        for (std::size_t i = 0; i < h.size(); ++i) key += (i ? ":" : "") + std::to_string(h[i]);
        std::printf("%s,%.17g,%.17g\n", key.c_str(), s.T, std::abs(eval_sum(s, dp.pair)));
      }
    } else if (*poisson) {
      const Complex direct = eval_sum(inst.spec, inst.pair);
      std::printf("radius,value,direct,error\n");
      for (double r : radii) {
        const Complex v = poisson_dual(inst.spec, inst.pair, r);
        std::printf("%.17g,%.17g,%.17g,%.17g\n", r, std::abs(v), std::abs(direct), std::abs(v - direct));
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "expsum: %s\n", e.what());
    return 1;
  }
  return 0;
}
