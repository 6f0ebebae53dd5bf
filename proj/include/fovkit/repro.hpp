#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fovkit/boundary.hpp"
#include "fovkit/matcore.hpp"

namespace fov {

// Free parameters of the parameterized registry instances. Defaults satisfy
// the family constraints (b, k > 0; k1 > k2 > 0, r > 0) and are recorded as
// artifact choices in every emitted report.
struct ExampleParams {
  double b = 1.0;
  double k = 1.0;
  double k1 = 2.0;
  double k2 = 1.0;
  double r = 1.0;
};

// One registry entry: the matrix, the distinguished values the reproduction
// run probes, and the named verdicts its exit status is gated on.
struct ExampleInstance {
  std::string id;
  ComplexMatrix matrix;
  std::vector<cplx> special_points;
  std::vector<std::string> parameter_notes;
  std::vector<std::pair<std::string, std::string>> expected;  // check name -> value
};

std::vector<std::string> example_ids();

// Throws InvalidArgument for an unknown id or parameters outside the family
// constraints.
ExampleInstance load_example(const std::string& id, const ExampleParams& params = {});

// Extremal boundary slice at fixed real part: the vertical line Re = alpha
// meets the boundary at alpha + i*beta_minus and alpha + i*beta_plus. y_* are
// the real optimizer coordinates on the constraint sphere, v_* their lifted
// unit vectors (so f(v_plus) = alpha + i*beta_plus up to rounding).
struct SliceExtremal {
  double alpha;
  std::vector<double> y_plus, y_minus;
  ProjectiveVector v_plus, v_minus;
  double beta_plus, beta_minus;
};

SliceExtremal slice_extremal_6x6(const ExampleInstance& inst, double alpha,
                                 const Tolerances& tol = {});
SliceExtremal slice_extremal_4x4(const ExampleInstance& inst, double alpha,
                                 const Tolerances& tol = {});

struct ReproResult {
  bool all_matched = false;
  std::vector<std::string> mismatches;  // "name: expected E, observed O" lines
  std::vector<std::string> files;       // paths written, in emission order
};

inline constexpr std::uint64_t kDefaultSeed = 0x5EEDBA5Eull;

// Emits boundary/fiber/probe/certificate files for one registry instance into
// out_dir and compares the observed verdicts against the registry's expected
// list. Deterministic for a fixed seed: identical bytes across runs.
ReproResult run_repro(const std::string& id, const std::string& out_dir,
                      std::uint64_t seed = kDefaultSeed, const Tolerances& tol = {});

// Apply {"name": number} overrides onto tol. Unknown names throw
// InvalidArgument naming the offending key.
void apply_tolerance_overrides(Tolerances& tol, const std::string& json_text);

}  // namespace fov
