#pragma once

// JSON and CSV serialization for systems, scenarios, reports and trajectories.

#include "higs/describing_function.hpp"
#include "higs/higs.hpp"
#include "higs/interconnect.hpp"
#include "higs/lti.hpp"
#include "higs/ni_verify.hpp"
#include "higs/stability.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace higs {

using Json = nlohmann::json;

/// {"a": [[..]], "b": [[..]], "c": [[..]], "d": x or [[x]]}; d defaults to 0.
[[nodiscard]] StateSpace state_space_from_json(const Json& j);
[[nodiscard]] Json to_json(const StateSpace& sys);

/// Reads and parses a JSON file. Throws InvalidInput when missing or malformed.
[[nodiscard]] Json read_json_file(const std::filesystem::path& path);
[[nodiscard]] StateSpace load_state_space(const std::filesystem::path& path);

struct Scenario {
    StateSpace system;
    HigsParams higs;
    Vector x0;
    SimConfig sim;
};

/// "system" may be inline or a path relative to the scenario file.
[[nodiscard]] Scenario scenario_from_json(const Json& j, const std::filesystem::path& base_dir = {});
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);

[[nodiscard]] Json to_json(const YCertificate& cert);
[[nodiscard]] Json to_json(const SynthResult& result);
/// NI report; "ni" requires both the frequency check and a certificate.
[[nodiscard]] Json ni_report_json(const NiFrequencyReport& report, const SynthResult& synth);
[[nodiscard]] Json to_json(const StabilityCertificate& cert);
[[nodiscard]] Json to_json(const MonitorReport& report);
[[nodiscard]] Json sweep_json(const std::vector<SweepRow>& rows);

/// %.17g; "nan"/"inf" for non-finite values.
[[nodiscard]] std::string format_double(double v);

void write_bode_csv(std::ostream& os, const BodeTable& table);
void write_element_csv(std::ostream& os, const HigsTrajectory& trajectory, const HigsParams& params);
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);
void write_linear_csv(std::ostream& os, const std::vector<LinearSample>& samples);
/// freq_hz, omega, |G| dB, phase G, |T| dB, phase T.
void write_frf_csv(std::ostream& os, const ComplexResponse& open_loop, const ComplexResponse& closed_loop);

}  // namespace higs
