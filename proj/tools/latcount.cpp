// latcount: lattice points in tB, the remainder series and its envelope fit.

#include <cstdio>
#include <exception>
#include <fstream>

#include <CLI11.hpp>

#include "instances.hpp"
#include "latrem/lattice_count.hpp"

int main(int argc, char** argv) {
  using namespace latrem;
  CLI::App app{"Lattice points in dilated convex bodies"};
  app.require_subcommand(1);
  std::string body_path, summary_path;
  double t = 10.0, t_min = 5.0, t_max = 100.0;
  int steps = 200, block = 2, workers = 0;
  std::string method = "sliced";

  auto* count = app.add_subcommand("count", "Count lattice points in tB");
  count->add_option("--body", body_path, "JSON body descriptor")->required();
  count->add_option("--t", t, "Dilation t")->required();
  count->add_option("--method", method, "sliced or bruteforce")->check(CLI::IsMember({"sliced", "bruteforce"}));
  count->add_option("--workers", workers, "Worker threads (0 = hardware)");

  auto* series = app.add_subcommand("series", "CSV of t, count, main_term, remainder and an envelope fit");
  series->add_option("--body", body_path, "JSON body descriptor")->required();
  series->add_option("--t-min", t_min, "Smallest t");
  series->add_option("--t-max", t_max, "Largest t");
  series->add_option("--steps", steps, "Grid points, geometric in t")->check(CLI::PositiveNumber);
  series->add_option("--block", block, "Fit blocks per doubling of t");
  series->add_option("--summary", summary_path, "Write the JSON summary here");
  series->add_option("--workers", workers, "Worker threads (0 = hardware)");

  CLI11_PARSE(app, argc, argv);
  try {
    const nlohmann::json bj = tools::read_json(body_path);
    const ConvexBody body = body_from_json(bj);
    if (*count) {
      const std::int64_t n = method == "sliced" ? count_sliced(body, t, workers) : count_bruteforce(body, t, workers);
      std::printf("t,count,main_term,remainder\n%.17g,%lld,%.17g,%.17g\n", t, static_cast<long long>(n),
                  body.volume() * std::pow(t, body.dimension()),
                  static_cast<double>(n) - body.volume() * std::pow(t, body.dimension()));
      return 0;
    }
    if (!(t_min > 0.0) || !(t_max > t_min)) throw ConfigError("series needs 0 < t-min < t-max");
    std::vector<double> grid(steps);
    for (int i = 0; i < steps; ++i)
      grid[i] = steps == 1 ? t_min : t_min * std::pow(t_max / t_min, static_cast<double>(i) / (steps - 1));
    const auto records = remainder_series(body, grid, workers);
    std::printf("t,count,main_term,remainder\n");
    for (const auto& r : records)
      std::printf("%.17g,%lld,%.17g,%.17g\n", r.t, static_cast<long long>(r.count), r.main_term, r.remainder);
    const ExponentFit fit = fit_envelope_exponent(records, block);
    const nlohmann::json summary = {{"body", bj},
                                    {"grid", {{"t_min", t_min}, {"t_max", t_max}, {"steps", steps}}},
                                    {"fit", {{"slope", fit.slope}, {"intercept", fit.intercept}, {"block", fit.block}}}};
    if (summary_path.empty()) {
      std::fprintf(stderr, "%s\n", summary.dump(2).c_str());
    } else {
      std::ofstream(summary_path) << summary.dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "latcount: %s\n", e.what());
    return 1;
  }
  return 0;
}
