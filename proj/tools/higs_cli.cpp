// higs: command-line front end for the HIGS / NI toolkit.

#include "higs/describing_function.hpp"
#include "higs/error.hpp"
#include "higs/interconnect.hpp"
#include "higs/io.hpp"
#include "higs/mems.hpp"
#include "higs/ni_verify.hpp"
#include "higs/stability.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;
using namespace higs;

namespace {

enum Exit : int {
    kOk = 0,
    kFail = 2,
    kInconclusive = 3,
    kAbort = 4,
    kUsage = 64,
    kData = 65,
};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Common {
    bool json = false;
    std::string out;
};

void add_common(CLI::App* cmd, Common& common, const char* out_help) {
    cmd->add_flag("--json", common.json, "Machine-readable output");
    cmd->add_option("--out", common.out, out_help);
}

// Writes to --out when given, stdout otherwise.
void emit(const std::string& content, const std::string& out) {
    if (out.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream file(out, std::ios::binary);
    if (!file) {
        throw InvalidInput("cannot write " + out);
    }
    file << content;
}

void write_file(const fs::path& path, const std::string& content) { emit(content, path.string()); }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

struct GridOptions {
    double omega_min = 0.0;
    double omega_max = 0.0;
    int points = 0;
    bool hz = false;
};

void add_grid(CLI::App* cmd, GridOptions& grid) {
    cmd->add_option("--omega-min", grid.omega_min, "Lowest grid frequency (rad/s)")->check(CLI::PositiveNumber);
    cmd->add_option("--omega-max", grid.omega_max, "Highest grid frequency (rad/s)")->check(CLI::PositiveNumber);
    cmd->add_option("--points", grid.points, "Number of log-spaced grid points")->check(CLI::Range(2, 10'000'000));
    cmd->add_flag("--hz", grid.hz, "Read grid frequencies in Hz");
}

double to_rad(double v, bool hz) { return hz ? v * kTwoPi : v; }

int run_verify_ni(const std::string& system_path, const GridOptions& grid_opts, const Common& common) {
    const StateSpace sys = load_state_space(system_path);
    GridSpec grid = default_ni_grid(sys);
    if (grid_opts.omega_min > 0.0) grid.omega_min = to_rad(grid_opts.omega_min, grid_opts.hz);
    if (grid_opts.omega_max > 0.0) grid.omega_max = to_rad(grid_opts.omega_max, grid_opts.hz);
    if (grid_opts.points > 0) grid.points = grid_opts.points;

    const NiFrequencyReport report = check_ni_frequency(sys, grid);
    const SynthResult synth = sys.order() <= kMaxSynthOrder ? synth_y(sys) : SynthResult{};
    const Json j = ni_report_json(report, synth);

    if (common.json || !common.out.empty()) {
        emit(dump(j), common.out);
    }
    if (!common.json) {
        std::cout << "frequency check: " << (report.passed ? "pass" : "fail") << " (sweep_min " << report.sweep_min
                  << " at " << report.worst_frequency << " rad/s)\n"
                  << "certificate: " << to_string(synth.status) << "\n"
                  << "NI: " << (j["ni"].get<bool>() ? "yes" : (j["inconclusive"].get<bool>() ? "inconclusive" : "no"))
                  << "\n";
    }
    if (j["ni"].get<bool>()) return kOk;
    if (j["inconclusive"].get<bool>()) return kInconclusive;
    return kFail;
}

int run_synth_y(const std::string& system_path, const SynthOptions& options, const Common& common) {
    const StateSpace sys = load_state_space(system_path);
    const SynthResult result = synth_y(sys, options);
    if (common.json || !common.out.empty()) {
        emit(dump(to_json(result)), common.out);
    }
    if (!common.json) {
        std::cout << to_string(result.status) << ": " << result.message << "\n";
        if (result.certified()) {
            std::cout << "Y =\n" << result.certificate->y << "\n";
        }
    }
    switch (result.status) {
        case SynthStatus::Certified: return kOk;
        case SynthStatus::ConstraintInconsistent: return kFail;
        case SynthStatus::NoCertificateFound: return kInconclusive;
    }
    return kFail;
}

int run_df_bode(double k_h, double omega_h, const GridOptions& grid_opts, bool cutoff, const Common& common) {
    const HigsParams params(k_h, omega_h);
    const double lo = grid_opts.omega_min > 0.0 ? to_rad(grid_opts.omega_min, grid_opts.hz) : kTwoPi * 1.0;
    const double hi = grid_opts.omega_max > 0.0 ? to_rad(grid_opts.omega_max, grid_opts.hz) : kTwoPi * 1e4;
    if (!(hi > lo)) {
        throw CLI::ValidationError("--omega-max must exceed --omega-min");
    }
    const int points = grid_opts.points > 0 ? grid_opts.points : 400;
    const BodeTable table = df_bode(params, logspace(lo, hi, points));

    std::ostringstream os;
    if (common.json) {
        Json rows = Json::array();
        for (const auto& r : table.rows) {
            rows.push_back(Json{{"freq_hz", r.freq_hz},
                                {"mag_db", r.mag_db},
                                {"phase_deg", r.phase_deg},
                                {"re", r.point.value.real()},
                                {"im", r.point.value.imag()}});
        }
        Json j{{"k_h", k_h}, {"omega_h", omega_h}, {"rows", rows}};
        if (cutoff) {
            j["cutoff_rad_s"] = table.cutoff;
            j["cutoff_hz"] = table.cutoff / kTwoPi;
        }
        os << dump(j);
    } else {
        write_bode_csv(os, table);
    }
    emit(os.str(), common.out);
    if (cutoff && !common.json) {
        std::cerr << "cutoff: " << format_double(table.cutoff) << " rad/s (" << format_double(table.cutoff / kTwoPi)
                  << " Hz)\n";
    }
    return kOk;
}

int verdict_exit(Verdict v) {
    switch (v) {
        case Verdict::Pass: return kOk;
        case Verdict::Fail: return kFail;
        case Verdict::Inconclusive: return kInconclusive;
    }
    return kFail;
}

int run_certify(const std::string& system_path, double k_h, double omega_h, const Common& common) {
    const StateSpace sys = load_state_space(system_path);
    const StabilityCertificate cert = certify(sys, HigsParams(k_h, omega_h));
    if (common.json || !common.out.empty()) {
        emit(dump(to_json(cert)), common.out);
    }
    if (!common.json) {
        std::cout << "verdict: " << to_string(cert.verdict) << "\n";
        for (const auto& r : cert.reasons) {
            std::cout << "  " << r << "\n";
        }
    }
    return verdict_exit(cert.verdict);
}

struct SweepCli {
    std::vector<double> grid;
    double omega_h = mems::kOmegaH;
    bool simulate = false;
    std::vector<double> x0;
    double dt = 1e-6;
    double t_final = 0.05;
};

int run_sweep(const std::string& system_path, const SweepCli& opts, const Common& common) {
    const StateSpace sys = load_state_space(system_path);
    std::optional<SweepSimulation> sim;
    if (opts.simulate) {
        SweepSimulation s;
        s.x0 = Vector::Zero(sys.order());
        if (!opts.x0.empty()) {
            if (static_cast<int>(opts.x0.size()) != sys.order()) {
                throw InvalidInput("--x0 length does not match the plant order");
            }
            s.x0 = Eigen::Map<const Vector>(opts.x0.data(), sys.order());
        } else {
            s.x0(0) = 1.0;
        }
        s.config.dt = opts.dt;
        s.config.t_final = opts.t_final;
        s.config.record_stride = 10;
        sim = s;
    }
    const auto rows = sweep_k_h(sys, opts.grid, opts.omega_h, sim);
    if (common.json || !common.out.empty()) {
        emit(dump(sweep_json(rows)), common.out);
    }
    if (!common.json) {
        std::cout << "k_h,verdict,schur_margin,marginal,settling_time\n";
        for (const auto& r : rows) {
            std::cout << format_double(r.k_h) << ',' << to_string(r.certificate.verdict) << ','
                      << (r.certificate.schur_margin ? format_double(*r.certificate.schur_margin) : "nan") << ','
                      << (r.marginal ? "yes" : "no") << ','
                      << (r.settling_time ? format_double(*r.settling_time) : "nan") << '\n';
        }
    }
    return kOk;
}

struct SimulationRun {
    Trajectory closed;
    std::optional<std::vector<LinearSample>> open;
    MonitorReport monitors;
    std::optional<Matrix> y;
    std::vector<std::string> warnings;
};

SimulationRun run_scenario(const Scenario& sc) {
    SimulationRun run;
    if (!is_minimal(sc.system).minimal) {
        run.warnings.emplace_back("plant realization is not minimal; no stability guarantee applies");
    } else {
        if (!check_ni_frequency(sc.system).passed) {
            run.warnings.emplace_back("plant failed the NI frequency check; no stability guarantee applies");
        }
        if (sc.system.order() <= kMaxSynthOrder) {
            try {
                const SynthResult synth = synth_y(sc.system);
                if (synth.certified()) {
                    run.y = synth.certificate->y;
                }
            } catch (const Error& e) {
                run.warnings.emplace_back(std::string("Y search failed: ") + e.what());
            }
        }
        if (!run.y) {
            run.warnings.emplace_back("no Y certificate; W monitor unavailable");
        }
    }
    SimConfig cfg = sc.sim;
    cfg.monitors.lyapunov = run.y.has_value();
    run.closed = simulate(sc.system, sc.higs, sc.x0, cfg, run.y);
    if (cfg.disturbance) {
        run.open = simulate_open_loop_plant(sc.system, sc.x0, cfg);
    }
    if (cfg.disturbance && run.y) {
        run.warnings.emplace_back("external disturbance present; W is recorded but its decrease is not checked");
    }
    run.monitors = certify_trajectory(run.closed, sc.system, sc.higs, cfg.disturbance ? std::nullopt : run.y, cfg.tol);
    return run;
}

Json monitor_document(const SimulationRun& run) {
    Json j = to_json(run.monitors);
    j["w_available"] = run.closed.w_available;
    j["switch_events"] = run.closed.events.size();
    j["warnings"] = run.warnings;
    if (!run.closed.samples.empty()) {
        const auto& first = run.closed.samples.front();
        const auto& last = run.closed.samples.back();
        j["initial_norm"] = combined_norm(first);
        j["final_norm"] = combined_norm(last);
        j["t_final"] = last.t;
    }
    return j;
}

std::string to_csv(const Trajectory& t) {
    std::ostringstream os;
    write_trajectory_csv(os, t);
    return os.str();
}

std::string to_csv(const std::vector<LinearSample>& s) {
    std::ostringstream os;
    write_linear_csv(os, s);
    return os.str();
}

int run_simulate(const std::string& scenario_path, const Common& common) {
    const Scenario sc = load_scenario(scenario_path);
    const SimulationRun run = run_scenario(sc);
    for (const auto& w : run.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    const Json report = monitor_document(run);
    if (!common.out.empty()) {
        const fs::path dir(common.out);
        fs::create_directories(dir);
        write_file(dir / "trajectory.csv", to_csv(run.closed));
        if (run.open) {
            write_file(dir / "open_loop.csv", to_csv(*run.open));
        }
        write_file(dir / "monitor_report.json", dump(report));
    }
    if (common.json) {
        std::cout << dump(report);
    } else {
        std::cout << "samples: " << run.closed.samples.size() << ", switches: " << run.closed.events.size()
                  << ", monitors " << (run.monitors.clean() ? "clean" : "VIOLATED") << "\n";
        for (const auto& v : run.monitors.violations) {
            std::cout << "  " << v << "\n";
        }
    }
    return run.monitors.clean() ? kOk : kFail;
}

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

Scenario mems_scenario(bool step) {
    SimConfig cfg;
    cfg.dt = 1e-6;
    if (step) {
        cfg.t_final = 0.02;
        cfg.disturbance = StepDisturbance{1.0, 0.0};
        return Scenario{mems::plant(), mems::higs_params(), Vector::Zero(2), cfg};
    }
    cfg.t_final = 0.05;
    return Scenario{mems::plant(), mems::higs_params(), mems::initial_state(), cfg};
}

int run_reproduce(int figure, const Common& common) {
    const fs::path base = common.out.empty() ? fs::path("reproduce") : fs::path(common.out);
    const fs::path dir = base / ("figure" + std::to_string(figure) + "-" + timestamp());
    fs::create_directories(dir);
    Json manifest{{"figure", figure}, {"created", timestamp()}, {"files", Json::array()}};
    auto add = [&](const std::string& name, const std::string& content, const std::string& what) {
        write_file(dir / name, content);
        manifest["files"].push_back(Json{{"name", name}, {"content", what}});
    };

    switch (figure) {
        case 1: {
            const HigsParams params(1.0, 600.0 * std::numbers::pi);
            const BodeTable table = df_bode(params, logspace(kTwoPi * 1.0, kTwoPi * 1e4, 400));
            std::ostringstream os;
            write_bode_csv(os, table);
            add("df_bode.csv", os.str(), "describing function Bode data");
            manifest["parameters"] = Json{{"k_h", params.k_h()}, {"omega_h", params.omega_h()},
                                          {"cutoff_rad_s", table.cutoff}};
            break;
        }
        case 3: {
            const StateSpace sys = mems::plant();
            const auto grid = logspace(kTwoPi * 100.0, kTwoPi * 2e4, 800);
            const ComplexResponse open = freq_response(sys, grid);
            const ComplexResponse closed = df_closed_loop(open, mems::higs_params());
            std::ostringstream os;
            write_frf_csv(os, open, closed);
            add("frf.csv", os.str(), "open-loop G and quasi-linear closed loop G/(1 - G D)");
            manifest["parameters"] = Json{{"k_h", mems::kGain}, {"omega_h", mems::kOmegaH}};
            break;
        }
        case 4:
        case 5: {
            Scenario sc = mems_scenario(false);
            sc.sim.record_stride = 10;
            const SimulationRun run = run_scenario(sc);
            add("trajectory.csv", to_csv(run.closed),
                figure == 4 ? "closed-loop state trajectories" : "HIGS input, output, mode and storage signals");
            std::ostringstream events;
            events << "t,from,to\n";
            for (const auto& e : run.closed.events) {
                events << format_double(e.t) << ',' << to_string(e.from) << ',' << to_string(e.to) << '\n';
            }
            add("switches.csv", events.str(), "mode switch events");
            add("monitor_report.json", dump(monitor_document(run)), "runtime monitor report");
            manifest["parameters"] = Json{{"k_h", mems::kGain}, {"omega_h", mems::kOmegaH}, {"dt", sc.sim.dt},
                                          {"t_final", sc.sim.t_final}, {"x0", {0.003, 0.024}}};
            break;
        }
        case 6: {
            Scenario sc = mems_scenario(true);
            sc.sim.record_stride = 10;
            const SimulationRun run = run_scenario(sc);
            add("closed_loop.csv", to_csv(run.closed), "step disturbance response with the HIGS");
            add("open_loop.csv", to_csv(*run.open), "step disturbance response without the HIGS");
            manifest["parameters"] = Json{{"k_h", mems::kGain}, {"omega_h", mems::kOmegaH}, {"dt", sc.sim.dt},
                                          {"t_final", sc.sim.t_final}, {"step_amplitude", 1.0}};
            break;
        }
        default:
            throw CLI::ValidationError("unknown figure");
    }
    write_file(dir / "manifest.json", dump(manifest));
    std::cout << dir.string() << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HIGS / negative-imaginary analysis toolkit"};
    app.require_subcommand(1);

    std::string system_path;
    std::string scenario_path;
    Common common;
    GridOptions grid;

    auto* verify = app.add_subcommand("verify-ni", "Check the NI property of a plant");
    verify->add_option("system", system_path, "System JSON file")->required();
    add_grid(verify, grid);
    add_common(verify, common, "Write the JSON report to this file");

    SynthOptions synth_options;
    auto* synth = app.add_subcommand("synth-y", "Search for a Y certificate");
    synth->add_option("system", system_path, "System JSON file")->required();
    synth->add_option("--restarts", synth_options.restart_budget, "Restart budget")->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_options.seed, "Random seed");
    add_common(synth, common, "Write the JSON result to this file");

    double k_h = 1.0;
    double omega_h = 600.0 * std::numbers::pi;
    bool cutoff = false;
    auto* bode = app.add_subcommand("df-bode", "Describing function Bode data as CSV");
    bode->add_option("--k-h", k_h, "HIGS gain")->check(CLI::PositiveNumber);
    bode->add_option("--omega-h", omega_h, "Integrator frequency (rad/s)")->check(CLI::NonNegativeNumber);
    add_grid(bode, grid);
    bode->add_flag("--cutoff", cutoff, "Report the cutoff frequency");
    add_common(bode, common, "Write the CSV to this file");

    double certify_k_h = mems::kGain;
    double certify_omega_h = mems::kOmegaH;
    auto* cert = app.add_subcommand("certify", "Closed-loop stability certificate");
    cert->add_option("system", system_path, "System JSON file")->required();
    cert->add_option("--k-h", certify_k_h, "HIGS gain")->check(CLI::PositiveNumber);
    cert->add_option("--omega-h", certify_omega_h, "Integrator frequency (rad/s)")->check(CLI::NonNegativeNumber);
    add_common(cert, common, "Write the JSON certificate to this file");

    SweepCli sweep_opts;
    auto* sweep = app.add_subcommand("sweep", "Certificates over a grid of k_h values");
    sweep->add_option("system", system_path, "System JSON file")->required();
    sweep->add_option("--k-h", sweep_opts.grid, "k_h values")->delimiter(',')->required()->check(CLI::PositiveNumber);
    sweep->add_option("--omega-h", sweep_opts.omega_h, "Integrator frequency (rad/s)")->check(CLI::NonNegativeNumber);
    sweep->add_flag("--simulate", sweep_opts.simulate, "Add simulated settling times");
    sweep->add_option("--x0", sweep_opts.x0, "Initial plant state for --simulate")->delimiter(',');
    sweep->add_option("--dt", sweep_opts.dt, "Step size (s)")->check(CLI::PositiveNumber);
    sweep->add_option("--t-final", sweep_opts.t_final, "Horizon (s)")->check(CLI::PositiveNumber);
    add_common(sweep, common, "Write the JSON table to this file");

    auto* sim = app.add_subcommand("simulate", "Simulate a closed-loop scenario");
    sim->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    add_common(sim, common, "Directory for trajectory CSV and monitor report");

    int figure = 0;
    auto* repro = app.add_subcommand("reproduce", "Write the data behind a figure");
    repro->add_option("--figure", figure, "Figure id")->required()->check(CLI::IsMember({1, 3, 4, 5, 6}));
    add_common(repro, common, "Base directory for the timestamped bundle");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*verify) return run_verify_ni(system_path, grid, common);
        if (*synth) return run_synth_y(system_path, synth_options, common);
        if (*bode) return run_df_bode(k_h, omega_h, grid, cutoff, common);
        if (*cert) return run_certify(system_path, certify_k_h, certify_omega_h, common);
        if (*sweep) return run_sweep(system_path, sweep_opts, common);
        if (*sim) return run_simulate(scenario_path, common);
        if (*repro) return run_reproduce(figure, common);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const ChatteringAbort& e) {
        std::cerr << "aborted: " << e.what() << "\n";
        return kAbort;
    } catch (const EventResolutionError& e) {
        std::cerr << "aborted: " << e.what() << "\n";
        return kAbort;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
    return kUsage;
}
