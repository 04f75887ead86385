// oscint: oscillatory integrals, stationary phase and the chi^ model.

#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "instances.hpp"

namespace {

using namespace latrem;

Complex predicted(const OscIntegrand& ig, bool correction) {
  std::vector<std::pair<double, double>> box = ig.box;
  Complex s = 0.0;
  for (const auto& cp : find_critical_points(ig, box)) s += stationary_leading_term(ig, cp, correction);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oscillatory integrals I(lambda) = int w exp(i lambda f)"};
  app.require_subcommand(1);
  std::string path, body_path;
  std::vector<double> lambdas{100, 316.22776601683796, 1000, 3162.2776601683795, 10000};
  bool correction = false;
  std::vector<double> rhos{2, 4, 8, 16, 32};
  std::vector<double> direction;

  auto* direct = app.add_subcommand("direct", "Direct quadrature over a lambda list");
  direct->add_option("--instance", path, "JSON instance")->required();
  direct->add_option("--lambda", lambdas, "lambda values")->delimiter(',');

  auto* stph = app.add_subcommand("stph", "Stationary-phase prediction against quadrature");
  stph->add_option("--instance", path, "JSON instance")->required();
  stph->add_option("--lambda", lambdas, "lambda values")->delimiter(',');
  stph->add_flag("--correction", correction, "Include the first correction term");

  auto* decay = app.add_subcommand("decay", "Log-log slope of the stationary-phase error");
  decay->add_option("--instance", path, "JSON instance")->required();
  decay->add_option("--lambda", lambdas, "lambda values")->delimiter(',');

  auto* chihat = app.add_subcommand("chihat", "chi^ of a body against the two-term model");
  chihat->add_option("--body", body_path, "JSON body descriptor")->required();
  chihat->add_option("--rho", rhos, "|xi| values")->delimiter(',');
  chihat->add_option("--direction", direction, "Direction of xi (default e_1)")->delimiter(',');

  CLI11_PARSE(app, argc, argv);
  try {
    if (*chihat) {
      const ConvexBody body = body_from_json(tools::read_json(body_path));
      const int d = body.dimension();
      Vec u = Vec::Unit(d, 0);
      if (!direction.empty()) {
        if (static_cast<int>(direction.size()) != d) throw ConfigError("--direction has wrong length");
        u = Eigen::Map<const Vec>(direction.data(), d).normalized();
      }
      std::printf("rho,value,prediction,error\n");
      for (double r : rhos) {
        const Vec xi = r * u;
        const std::span<const double> s{xi.data(), static_cast<std::size_t>(d)};
        const double v = body.is_ellipsoid() ? chi_hat_ellipsoid(body, s) : NAN;
        const ChiHatModel m = chi_hat_expansion(body, s);
        std::printf("%.17g,%.17g,%.17g,%.17g\n", r, v, m.with_conjugate.real(), std::abs(v - m.with_conjugate));
      }
      return 0;
    }
    const nlohmann::json inst = tools::read_json(path);
    if (*decay) {
      auto family = [&](double l) { return tools::osc_instance(inst, l); };
      const DecayFit fit = decay_slope(family, lambdas, DecayMode::stationary);
      std::printf("lambda,error\n");
      for (std::size_t i = 0; i < fit.lambdas.size(); ++i) std::printf("%.17g,%.17g\n", fit.lambdas[i], fit.errors[i]);
      std::printf("# slope %.6f\n", fit.slope);
      return 0;
    }
    std::printf("lambda,value,prediction,error\n");
    for (double l : lambdas) {
      const OscIntegrand ig = tools::osc_instance(inst, l);
      const Complex v = integrate_direct(ig);
      const Complex p = *stph ? predicted(ig, correction) : Complex(NAN, NAN);
      std::printf("%.17g,%.17g%+.17gi,%.17g%+.17gi,%.17g\n", l, v.real(), v.imag(), p.real(), p.imag(),
                  std::abs(v - p));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "oscint: %s\n", e.what());
    return 1;
  }
  return 0;
}
