// fovkit command line driver: boundary / fiber / probe / reduce / repro.
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fovkit/boundary.hpp"
#include "fovkit/continuity.hpp"
#include "fovkit/errors.hpp"
#include "fovkit/fiber.hpp"
#include "fovkit/matcore.hpp"
#include "fovkit/reducibility.hpp"
#include "fovkit/repro.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw fov::Error(fov::ErrorCode::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_or_print(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw fov::Error(fov::ErrorCode::IoError, "cannot write " + out);
  f << text;
}

fov::cplx parse_z(const std::string& text) {
  double re = 0.0, im = 0.0;
  char trail = 0;
  const int got = std::sscanf(text.c_str(), "%lf,%lf%c", &re, &im, &trail);
  if (got != 2)
    throw fov::Error(fov::ErrorCode::InvalidArgument, "--z expects RE,IM, got '" + text + "'");
  return {re, im};
}

std::uint64_t pick_seed(bool seed_given, std::uint64_t seed_opt) {
  if (seed_given) return seed_opt;
  if (const char* env = std::getenv("FOVKIT_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
      throw fov::Error(fov::ErrorCode::InvalidArgument,
                       std::string("FOVKIT_SEED is not an integer: ") + env);
    return v;
  }
  return fov::kDefaultSeed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical range toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON file of tolerance overrides")
      ->check(CLI::ExistingFile);

  std::string matrix_path, out_path, z_text, mode = "strong";
  int samples = 0, budget = 2000;
  bool want_basis = false;
  std::uint64_t seed_opt = 0;

  auto* cmd_boundary = app.add_subcommand("boundary", "trace the boundary curve");
  cmd_boundary->add_option("--matrix", matrix_path, "matrix JSON file")->required();
  cmd_boundary->add_option("--samples", samples, "support angle sample count");
  cmd_boundary->add_option("--out", out_path, "output CSV path (default stdout)");
  std::string summary_path;
  cmd_boundary->add_option("--summary", summary_path, "also write the JSON summary here");

  auto* cmd_fiber = app.add_subcommand("fiber", "sample the preimage of a value");
  cmd_fiber->add_option("--matrix", matrix_path, "matrix JSON file")->required();
  cmd_fiber->add_option("--z", z_text, "target value RE,IM")->required();
  cmd_fiber->add_flag("--basis", want_basis, "drive starts until the span closes");
  cmd_fiber->add_option("--budget", budget, "attempt budget");
  auto* fiber_seed = cmd_fiber->add_option("--seed", seed_opt, "RNG seed");
  cmd_fiber->add_option("--out", out_path, "output JSON path (default stdout)");

  auto* cmd_probe = app.add_subcommand("probe", "probe preimage continuity at a value");
  cmd_probe->add_option("--matrix", matrix_path, "matrix JSON file")->required();
  cmd_probe->add_option("--z", z_text, "target value RE,IM")->required();
  cmd_probe->add_option("--mode", mode, "strong or weak")
      ->check(CLI::IsMember({"strong", "weak"}));
  auto* probe_seed = cmd_probe->add_option("--seed", seed_opt, "RNG seed");
  cmd_probe->add_option("--out", out_path, "output JSON path (default stdout)");

  auto* cmd_reduce = app.add_subcommand("reduce", "find a reducing projection");
  cmd_reduce->add_option("--matrix", matrix_path, "matrix JSON file")->required();
  cmd_reduce->add_option("--out", out_path, "output JSON path (default stdout)");

  std::string example_id, repro_out;
  auto* cmd_repro = app.add_subcommand("repro", "regenerate a registry instance");
  cmd_repro->add_option("id", example_id, "registry id, or 'all'")->required();
  cmd_repro->add_option("--out", repro_out, "output directory")->required();
  auto* repro_seed = cmd_repro->add_option("--seed", seed_opt, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    fov::Tolerances tol;
    if (!config_path.empty()) fov::apply_tolerance_overrides(tol, read_file(config_path));

    if (cmd_boundary->parsed()) {
      const fov::ComplexMatrix a = fov::load_matrix_file(matrix_path);
      fov::TraceOptions opt;
      if (samples > 0) opt.base_samples = samples;
      const fov::BoundaryCurve curve = fov::trace_boundary(a, opt, tol);
      write_or_print(out_path, fov::boundary_csv(curve, tol));
      if (!summary_path.empty()) write_or_print(summary_path, fov::boundary_summary_json(curve));
    } else if (cmd_fiber->parsed()) {
      const fov::ComplexMatrix a = fov::load_matrix_file(matrix_path);
      const fov::cplx z = parse_z(z_text);
      fov::FiberSample sample;
      if (want_basis) {
        const fov::BoundaryCurve curve = fov::trace_boundary(a, {}, tol);
        sample = fov::fiber_basis(a, curve, z, tol);
      } else {
        sample = fov::fiber_sample(a, z, budget, pick_seed(!fiber_seed->empty(), seed_opt), tol);
      }
      write_or_print(out_path, fov::fiber_json(sample));
    } else if (cmd_probe->parsed()) {
      const fov::ComplexMatrix a = fov::load_matrix_file(matrix_path);
      const fov::cplx z = parse_z(z_text);
      const fov::BoundaryCurve curve = fov::trace_boundary(a, {}, tol);
      const fov::ContinuityPrediction pred = fov::predict_continuity(a, curve, z, tol);
      fov::ProbeSpec spec;
      spec.seed = pick_seed(!probe_seed->empty(), seed_opt);
      const fov::ContinuityReport report = mode == "weak"
                                               ? fov::probe_weak(a, curve, z, spec, tol)
                                               : fov::probe_strong(a, curve, z, spec, tol);
      nlohmann::json j;
      j["prediction"] = {{"verdict", pred.verdict}, {"rule_chain", pred.rule_chain}};
      j["probe"] = nlohmann::json::parse(fov::continuity_report_json(report));
      write_or_print(out_path, j.dump(2) + "\n");
    } else if (cmd_reduce->parsed()) {
      const fov::ComplexMatrix a = fov::load_matrix_file(matrix_path);
      write_or_print(out_path, fov::reducibility_json(a, tol));
    } else if (cmd_repro->parsed()) {
      const std::uint64_t seed = pick_seed(!repro_seed->empty(), seed_opt);
      std::vector<std::string> ids;
      if (example_id == "all")
        ids = fov::example_ids();
      else
        ids.push_back(example_id);
      bool ok = true;
      for (const auto& id : ids) {
        const std::string dir =
            ids.size() == 1 ? repro_out : (std::filesystem::path(repro_out) / id).string();
        const fov::ReproResult rr = fov::run_repro(id, dir, seed, tol);
        std::cout << id << ": " << (rr.all_matched ? "all checks matched" : "MISMATCH") << "\n";
        for (const auto& m : rr.mismatches) std::cout << "  " << m << "\n";
        ok = ok && rr.all_matched;
      }
      if (!ok) return 1;
    }
  } catch (const fov::Error& e) {
    std::fprintf(stderr, "fovkit: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fovkit: %s\n", e.what());
    return 2;
  }
  return 0;
}
