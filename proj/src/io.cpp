#include "higs/io.hpp"

#include "higs/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace higs {

namespace {

Matrix matrix_from_json(const Json& j, const char* name) {
    if (j.is_number()) {
        return Matrix::Constant(1, 1, j.get<double>());
    }
    if (!j.is_array() || j.empty()) {
        throw InvalidInput(std::string("\"") + name + "\" must be a non-empty array of rows");
    }
    const bool nested = j.front().is_array();
    const auto rows = static_cast<Eigen::Index>(nested ? j.size() : 1);
    const auto cols = static_cast<Eigen::Index>(nested ? j.front().size() : j.size());
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Json& row = nested ? j[static_cast<std::size_t>(i)] : j;
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw InvalidInput(std::string("\"") + name + "\" has ragged rows");
        }
        for (Eigen::Index k = 0; k < cols; ++k) {
            const Json& v = row[static_cast<std::size_t>(k)];
            if (!v.is_number()) {
                throw InvalidInput(std::string("\"") + name + "\" has a non-numeric entry");
            }
            m(i, k) = v.get<double>();
        }
    }
    return m;
}

Json matrix_to_json(const Matrix& m) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            row.push_back(m(i, k));
        }
        out.push_back(std::move(row));
    }
    return out;
}

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json optional_number(const std::optional<double>& v, const char* otherwise) {
    return v ? Json(*v) : Json(otherwise);
}

double number_field(const Json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw InvalidInput(std::string("missing numeric field \"") + key + "\"");
    }
    return j.at(key).get<double>();
}

}  // namespace

StateSpace state_space_from_json(const Json& j) {
    if (!j.is_object()) {
        throw InvalidInput("system JSON must be an object");
    }
    for (const char* key : {"a", "b", "c"}) {
        if (!j.contains(key)) {
            throw InvalidInput(std::string("system JSON missing \"") + key + "\"");
        }
    }
    double d = 0.0;
    if (j.contains("d")) {
        const Matrix dm = matrix_from_json(j.at("d"), "d");
        if (dm.size() != 1) {
            throw InvalidInput("\"d\" must be a scalar for a SISO system");
        }
        d = dm(0, 0);
    }
    Matrix b = matrix_from_json(j.at("b"), "b");
    // A flat "b" list is a column.
    if (j.at("b").is_array() && !j.at("b").empty() && !j.at("b").front().is_array()) {
        b.transposeInPlace();
    }
    return StateSpace(matrix_from_json(j.at("a"), "a"), b, matrix_from_json(j.at("c"), "c"), d);
}

Json to_json(const StateSpace& sys) {
    return Json{{"a", matrix_to_json(sys.a())},
                {"b", matrix_to_json(sys.b())},
                {"c", matrix_to_json(sys.c())},
                {"d", sys.d()}};
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open " + path.string());
    }
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

StateSpace load_state_space(const std::filesystem::path& path) {
    const Json j = read_json_file(path);
    try {
        return state_space_from_json(j.contains("system") ? j.at("system") : j);
    } catch (const Json::exception& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

Scenario scenario_from_json(const Json& j, const std::filesystem::path& base_dir) {
    try {
        if (!j.contains("system")) {
            throw InvalidInput("scenario missing \"system\"");
        }
        const Json& sys_json = j.at("system");
        StateSpace sys = sys_json.is_string() ? load_state_space(base_dir / sys_json.get<std::string>())
                                              : state_space_from_json(sys_json);
        if (!j.contains("higs")) {
            throw InvalidInput("scenario missing \"higs\"");
        }
        const HigsParams params(number_field(j.at("higs"), "k_h"), number_field(j.at("higs"), "omega_h"));

        Vector x0 = Vector::Zero(sys.order());
        if (j.contains("x0")) {
            const Matrix m = matrix_from_json(j.at("x0"), "x0");
            if (m.size() != sys.order()) {
                throw InvalidInput("\"x0\" length does not match the plant order");
            }
            x0 = m.reshaped();
        }
        SimConfig cfg;
        if (j.contains("dt")) cfg.dt = number_field(j, "dt");
        if (j.contains("t_final")) cfg.t_final = number_field(j, "t_final");
        if (j.contains("x_h0")) cfg.x_h0 = number_field(j, "x_h0");
        if (j.contains("record_stride")) cfg.record_stride = j.at("record_stride").get<int>();
        if (j.contains("max_switches")) cfg.max_switches = j.at("max_switches").get<long>();
        if (j.contains("disturbance") && !j.at("disturbance").is_null()) {
            const Json& d = j.at("disturbance");
            if (d.value("type", std::string("step")) != "step") {
                throw InvalidInput("only step disturbances are supported");
            }
            cfg.disturbance = StepDisturbance{d.value("amplitude", 1.0), d.value("t_on", 0.0)};
        }
        cfg.validate();
        return Scenario{std::move(sys), params, std::move(x0), cfg};
    } catch (const Json::exception& e) {
        throw InvalidInput(std::string("scenario: ") + e.what());
    }
}

Scenario load_scenario(const std::filesystem::path& path) {
    return scenario_from_json(read_json_file(path), path.parent_path());
}

Json to_json(const YCertificate& cert) {
    return Json{{"y", matrix_to_json(cert.y)},
                {"valid", cert.valid()},
                {"margins",
                 {{"min_eig_y", cert.min_eig_y},
                  {"max_eig_lyapunov", cert.max_eig_lyap},
                  {"residual_b", cert.residual_b},
                  {"tol_psd", cert.tol_psd},
                  {"tol_lin", cert.tol_lin},
                  {"symmetric", cert.symmetric}}}};
}

Json to_json(const SynthResult& result) {
    return Json{{"status", to_string(result.status)},
                {"certified", result.certified()},
                {"certificate", result.certificate ? to_json(*result.certificate) : Json(nullptr)},
                {"restarts_used", result.restarts_used},
                {"evaluations", result.evaluations},
                {"message", result.message}};
}

Json ni_report_json(const NiFrequencyReport& report, const SynthResult& synth) {
    Json offending = Json::array();
    for (const auto& p : report.pole_check.offending) {
        offending.push_back(complex_json(p));
    }
    Json residues = Json::array();
    for (const auto& r : report.residues) {
        residues.push_back(Json{{"pole", r.pole},
                                {"simple", r.simple},
                                {"residue", r.residue ? complex_json(*r.residue) : Json(nullptr)},
                                {"psd", r.psd ? Json(*r.psd) : Json(nullptr)},
                                {"error_estimate", r.error_estimate}});
    }
    const bool inconclusive = report.passed && synth.status == SynthStatus::NoCertificateFound;
    return Json{{"ni", report.passed && synth.certified()},
                {"frequency_check", report.passed},
                {"pole_check", {{"passed", report.pole_check.passed}, {"offending", offending}}},
                {"sweep_min", report.sweep_min},
                {"sweep_tol", report.sweep_tol},
                {"worst_frequency", report.worst_frequency},
                {"grid_spec", report.grid_spec},
                {"evaluated_points", report.evaluated_points},
                {"residues", residues},
                {"certificate", synth.certified() ? to_json(*synth.certificate) : Json(nullptr)},
                {"synthesis", to_string(synth.status)},
                {"inconclusive", inconclusive}};
}

Json to_json(const StabilityCertificate& cert) {
    return Json{{"verdict", to_string(cert.verdict)},
                {"dc_gain", cert.dc_gain},
                {"k_h", cert.k_h},
                {"k_h_bound", optional_number(cert.k_h_bound, "unbounded")},
                {"schur_margin", cert.schur_margin ? Json(*cert.schur_margin) : Json(nullptr)},
                {"alpha_identity", {{"ok", cert.alpha_identity.ok}, {"distance", cert.alpha_identity.distance}}},
                {"y_ref", cert.y_ref.empty() ? Json(nullptr) : Json(cert.y_ref)},
                {"y_status", to_string(cert.y_status)},
                {"reasons", cert.reasons}};
}

Json to_json(const MonitorReport& report) {
    return Json{{"clean", report.clean()},
                {"w_checked", report.w_checked},
                {"max_w_increase", report.w_checked ? Json(report.max_w_increase) : Json("unavailable")},
                {"min_w", report.w_checked ? Json(report.min_w) : Json("unavailable")},
                {"max_dissipation_residual", report.max_dissipation},
                {"max_sector_violation", report.max_sector_violation},
                {"max_lemma2", report.max_lemma2},
                {"max_gain_identity", report.max_gain_identity},
                {"violations", report.violations}};
}

Json sweep_json(const std::vector<SweepRow>& rows) {
    Json out = Json::array();
    for (const auto& row : rows) {
        Json j{{"k_h", row.k_h}, {"certificate", to_json(row.certificate)}, {"marginal", row.marginal}};
        j["settling_time"] = row.settling_time ? Json(*row.settling_time) : Json(nullptr);
        if (!row.simulation_error.empty()) {
            j["simulation_error"] = row.simulation_error;
        }
        out.push_back(std::move(j));
    }
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_bode_csv(std::ostream& os, const BodeTable& table) {
    os << "freq_hz,mag_db,phase_deg,re,im\n";
    for (const auto& row : table.rows) {
        os << format_double(row.freq_hz) << ',' << format_double(row.mag_db) << ',' << format_double(row.phase_deg)
           << ',' << format_double(row.point.value.real()) << ',' << format_double(row.point.value.imag()) << '\n';
    }
}

void write_element_csv(std::ostream& os, const HigsTrajectory& trajectory, const HigsParams& params) {
    os << "t,e,edot,x_h,u,mode,V,dissipation_residual\n";
    for (const auto& s : trajectory.samples) {
        os << format_double(s.t) << ',' << format_double(s.e) << ',' << format_double(s.edot) << ','
           << format_double(s.x_h) << ',' << format_double(s.x_h) << ',' << to_string(s.mode) << ','
           << format_double(storage(s.x_h, params)) << ',' << format_double(dissipation_residual(s, params)) << '\n';
    }
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
    const auto n = trajectory.samples.empty() ? 0 : trajectory.samples.front().x.size();
    os << "t,e,edot,x_h,u,mode,V,dissipation_residual";
    for (Eigen::Index i = 1; i <= n; ++i) {
        os << ",x_" << i;
    }
    os << ",W,Wdot_est\n";
    for (const auto& s : trajectory.samples) {
        os << format_double(s.t) << ',' << format_double(s.e) << ',' << format_double(s.edot) << ','
           << format_double(s.x_h) << ',' << format_double(s.u) << ',' << to_string(s.mode) << ','
           << format_double(s.V) << ',' << format_double(s.dissipation);
        for (Eigen::Index i = 0; i < n; ++i) {
            os << ',' << format_double(s.x(i));
        }
        os << ',' << format_double(s.W) << ',' << format_double(trajectory.w_available ? s.W_dot : std::nan(""))
           << '\n';
    }
}

void write_linear_csv(std::ostream& os, const std::vector<LinearSample>& samples) {
    const auto n = samples.empty() ? 0 : samples.front().x.size();
    os << "t,y,d";
    for (Eigen::Index i = 1; i <= n; ++i) {
        os << ",x_" << i;
    }
    os << '\n';
    for (const auto& s : samples) {
        os << format_double(s.t) << ',' << format_double(s.y) << ',' << format_double(s.d);
        for (Eigen::Index i = 0; i < n; ++i) {
            os << ',' << format_double(s.x(i));
        }
        os << '\n';
    }
}

void write_frf_csv(std::ostream& os, const ComplexResponse& open_loop, const ComplexResponse& closed_loop) {
    if (open_loop.values.size() != closed_loop.values.size()) {
        throw InvalidInput("write_frf_csv: response lengths differ");
    }
    os << "freq_hz,omega,open_mag_db,open_phase_deg,closed_mag_db,closed_phase_deg\n";
    for (std::size_t k = 0; k < open_loop.values.size(); ++k) {
        const double w = open_loop.frequencies[k];
        os << format_double(w / (2.0 * std::numbers::pi)) << ',' << format_double(w) << ','
           << format_double(magnitude_db(open_loop.values[k])) << ',' << format_double(phase_deg(open_loop.values[k]))
           << ',' << format_double(magnitude_db(closed_loop.values[k])) << ','
           << format_double(phase_deg(closed_loop.values[k])) << '\n';
    }
}

}  // namespace higs
