// frames: integer frames, size patterns, coset representatives and
// inverse-function radii.

#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "instances.hpp"
#include "latrem/geometry_lemmas.hpp"

namespace {

using namespace latrem;

nlohmann::json imat_json(const IMat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json frame_json(const FrameResult& fr) {
  return {{"xi", vec_json(fr.construction.xi)},
          {"N", fr.frame.N},
          {"alpha", fr.construction.alpha},
          {"V", imat_json(fr.frame.V)},
          {"detV", fr.frame.det_v},
          {"L", fr.frame.L}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integer frames adapted to directions of the support-function shell"};
  app.require_subcommand(1);
  std::string body_path, v_path;
  std::vector<double> xi;
  int q = 1;
  std::int64_t N = 32;
  bool strict = false;
  double c = 1.0, C = 1.0, r0 = 1.0;
  int d = 2;
  bool list = false;

  auto add_frame_opts = [&](CLI::App* s) {
    s->add_option("--body", body_path, "JSON body descriptor")->required();
    s->add_option("--xi", xi, "Direction in the shell 1/2 <= |xi| <= 2")->delimiter(',')->required();
    s->add_option("--q", q, "Order q")->check(CLI::Range(1, 4));
    s->add_option("--N", N, "Denominator N");
    s->add_flag("--strict", strict, "Fail when the size pattern does not hold");
  };
  auto* build = app.add_subcommand("build", "Build the frame and dump {xi, N, alpha, V, detV, L}");
  add_frame_opts(build);
  auto* pattern = app.add_subcommand("pattern", "Size-pattern report for k = 1..q at y = xi");
  add_frame_opts(pattern);
  auto* cosets = app.add_subcommand("cosets", "Coset representatives of V Z^d in Z^d");
  cosets->add_option("--frame", v_path, "Frame JSON as written by build")->required();
  cosets->add_flag("--list", list, "Print every representative");
  auto* invfn = app.add_subcommand("invfn", "Inverse-function radii r1, r2");
  invfn->add_option("--c", c, "Lower derivative bound c");
  invfn->add_option("--C", C, "Upper derivative bound C");
  invfn->add_option("--d", d, "Dimension");
  invfn->add_option("--r0", r0, "Domain radius r0");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*build || *pattern) {
      const ConvexBody body = body_from_json(tools::read_json(body_path));
      FrameOptions opt;
      opt.enforce_threshold = strict;
      const FrameResult fr = build_frame(body, xi, q, N, opt);
      if (*build) {
        std::printf("%s\n", frame_json(fr).dump(2).c_str());
        return 0;
      }
      nlohmann::json out = nlohmann::json::array();
      bool all = true;
      for (int k = 1; k <= q; ++k) {
        const PatternReport pr = verify_size_pattern(body, fr, xi, k);
        all = all && pr.passed;
        out.push_back({{"k", k},
                       {"passed", pr.passed},
                       {"failure", pr.failure},
                       {"h_ratio", pr.h_ratio},
                       {"diag_ratio", pr.diag_ratio},
                       {"corner_ratio", pr.corner_ratio},
                       {"offdiag_max", pr.offdiag_max},
                       {"last_row_scaled", pr.last_row_scaled}});
      }
      std::printf("%s\n", out.dump(2).c_str());
      return all ? 0 : 2;
    }
    if (*cosets) {
      const nlohmann::json j = tools::read_json(v_path);
      const auto& rows = j.at("V");
      const auto n = static_cast<Eigen::Index>(rows.size());
      IMat V(n, n);
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index k = 0; k < n; ++k) V(r, k) = rows[r][k].get<std::int64_t>();
      const CosetDecomposition cd = coset_decomposition(V);
      nlohmann::json out = {{"L", cd.reps.size()}};
      if (list) {
        nlohmann::json reps = nlohmann::json::array();
        for (const auto& b : cd.reps) reps.push_back(std::vector<std::int64_t>(b.data(), b.data() + b.size()));
        out["reps"] = reps;
      }
      std::printf("%s\n", out.dump(2).c_str());
      return 0;
    }
    const InverseFnRadii r = inverse_fn_radii(c, C, d, r0);
    std::printf("%s\n", nlohmann::json({{"r1", r.r1}, {"r2", r.r2}, {"ratio", r.ratio()}}).dump(2).c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "frames: %s\n", e.what());
    return 1;
  }
  return 0;
}
