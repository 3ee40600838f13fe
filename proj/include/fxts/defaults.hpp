#pragma once

#include "fxts/dynamics.hpp"
#include "fxts/integrators.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace fxts::defaults {

/// Bumped whenever any value below changes. Echoed into every run summary.
inline constexpr int kVersion = 1;

/// Hyperparameter profiles. Config files may name one with "defaults"; fields
/// given explicitly in the config override the profile.
///
///   toy      Figure-style runs on the 1x1 toy problem (forward Euler with
///            ascent substeps).
///   rls      synthetic and CSV robust least squares.
///   settling continuous-time checks of the settling bound (RK4, fine step,
///            p1 close to 2 so the finite-time phase is short).
inline constexpr std::string_view kProfilesJson = R"json({
  "version": 1,
  "profiles": {
    "toy": {
      "fxts": {"c1": 2.0, "c2": 1.0, "p1": 3.0, "p2": 1.75, "grad_guard": 1e-12},
      "integrator": {"scheme": "euler_timescale", "step": 0.0125, "ascent_ratio": 3,
                     "max_steps": 150, "stop_grad_tol": 0.0, "record_every": 1}
    },
    "rls": {
      "fxts": {"c1": 2.0, "c2": 1.0, "p1": 3.0, "p2": 1.75, "grad_guard": 1e-12},
      "integrator": {"scheme": "euler_timescale", "step": 1e-4, "ascent_ratio": 2,
                     "max_steps": 2000, "stop_grad_tol": 0.0, "stop_dist_tol": 1e-10,
                     "record_every": 10}
    },
    "settling": {
      "fxts": {"c1": 2.0, "c2": 1.0, "p1": 2.1, "p2": 1.75, "grad_guard": 1e-12},
      "integrator": {"scheme": "rk4", "step": 1e-4, "ascent_ratio": 1,
                     "max_steps": 200000, "stop_grad_tol": 0.0, "record_every": 1}
    }
  },
  "compare": {"dist_tol": 1e-4},
  "estimate_pl": {"box": [-3.0, 3.0], "n_samples": 500, "seed": 1}
})json";

/// Parsed profile values.
struct Profile {
  FxtsParams fxts;
  IntegratorConfig integrator;
};

/// Throws ParameterError for an unknown profile name.
Profile profile(const std::string& name);

/// Tolerance on dist_sq used for iterations-to-tolerance in comparisons.
double compare_dist_tol();

/// Sampling settings for PL estimation when the config enables it without details.
Box pl_region();
std::size_t pl_samples();
std::uint64_t pl_seed();

}  // namespace fxts::defaults
