#pragma once

#include <optional>
#include <string>

#include "irsvlp/montecarlo.hpp"
#include "irsvlp/scene.hpp"

namespace irsvlp {

/// Scene/experiment scale presets.
enum class Profile {
    paper, // 441 elements per wall (1764 total), 500 trials
    desk,  // 49 elements per wall (196 total), 200 trials
};

Profile profile_from_string(const std::string& name);

struct RunConfig {
    Scene scene;
    ExperimentConfig experiment;
    Profile profile = Profile::paper;
};

/// Default scenario: 4 x 4 x 3 m room, 4 ceiling LEDs at (+-1, +-1, 3) pointing
/// down, 5 W transmit power, A_R = 1 cm^2 upward receiver at (0.5, 0.5, 0.85),
/// wall IRS grids of 4 x 2 cm mirrors (rho 0.95, r 0, mu 5), LOS blocked.
RunConfig default_run_config(Profile profile);

/// Parses a JSON config; omitted fields fall back to the profile defaults, so
/// an empty document {} yields the full default scenario. Scene violations are
/// reported as ConfigError.
RunConfig parse_config_text(const std::string& json_text, Profile profile);

/// Same, reading from a file path.
RunConfig parse_config(const std::string& path, Profile profile);

} // namespace irsvlp
