#pragma once

// Serialization: the JSON state format { "N", "kind", "amplitudes" | "matrix" },
// tomography counts files, preparation-chain descriptions, CSV field/spectrum
// exports and the JSON report blocks emitted by the CLI.

#include "qpol/fock.hpp"
#include "qpol/moments.hpp"
#include "qpol/prep.hpp"
#include "qpol/spectral.hpp"
#include "qpol/tomo.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpol {

using Json = nlohmann::json;

// --- states -------------------------------------------------------------------

inline Json complex_to_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("complex entries must be [re, im] pairs");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

inline Json state_to_json(const PureState& psi) {
    Json j;
    j["N"] = psi.photons;
    j["kind"] = "pure";
    Json amps = Json::array();
    for (int i = 0; i < psi.amplitudes.size(); ++i)
        amps.push_back(complex_to_json(psi.amplitudes(i)));
    j["amplitudes"] = amps;
    return j;
}

inline Json state_to_json(const DensityOperator& rho) {
    Json j;
    j["N"] = rho.photons;
    j["kind"] = "mixed";
    Json rows = Json::array();
    for (int i = 0; i < rho.dimension(); ++i) {
        Json row = Json::array();
        for (int k = 0; k < rho.dimension(); ++k)
            row.push_back(complex_to_json(rho.matrix(i, k)));
        rows.push_back(row);
    }
    j["matrix"] = rows;
    return j;
}

// A parsed state: always usable as a density operator, with the pure form
// retained when that is what the file carried.
struct StateRecord {
    std::optional<PureState> pure;
    DensityOperator rho;

    static StateRecord from_pure(const PureState& psi) {
        return {psi, DensityOperator::pure(psi)};
    }
    static StateRecord from_density(const DensityOperator& rho) { return {std::nullopt, rho}; }
};

inline StateRecord state_from_json(const Json& j) {
    // Accept whole report files: a prep report wraps its state under "state",
    // a reconstruction report under "rho".
    if (j.is_object() && !j.contains("kind")) {
        if (j.contains("state")) return state_from_json(j.at("state"));
        if (j.contains("rho")) return state_from_json(j.at("rho"));
    }
    if (!j.contains("N") || !j.contains("kind"))
        throw std::invalid_argument("state JSON needs \"N\" and \"kind\"");
    const int n = j["N"].get<int>();
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "pure") {
        const auto& amps = j.at("amplitudes");
        if (!amps.is_array() || int(amps.size()) != n + 1)
            throw std::invalid_argument("amplitude list must have N+1 entries");
        Vector v(n + 1);
        for (int i = 0; i <= n; ++i) v(i) = complex_from_json(amps[size_t(i)]);
        return StateRecord::from_pure(PureState(n, v));
    }
    if (kind == "mixed") {
        const auto& rows = j.at("matrix");
        if (!rows.is_array() || int(rows.size()) != n + 1)
            throw std::invalid_argument("matrix must have N+1 rows");
        Matrix m(n + 1, n + 1);
        for (int i = 0; i <= n; ++i) {
            if (int(rows[size_t(i)].size()) != n + 1)
                throw std::invalid_argument("matrix must be square");
            for (int k = 0; k <= n; ++k)
                m(i, k) = complex_from_json(rows[size_t(i)][size_t(k)]);
        }
        return StateRecord::from_density(DensityOperator(n, m));
    }
    throw std::invalid_argument("state kind must be \"pure\" or \"mixed\"");
}

// --- files ----------------------------------------------------------------------

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

// --- tomography counts ------------------------------------------------------------

inline Json counts_to_json(const std::vector<CountRecord>& records) {
    Json arr = Json::array();
    for (const auto& rec : records) {
        Json j;
        j["qwp2"] = rec.setting.qwp2_deg;
        j["hwp3"] = rec.setting.hwp3_deg;
        j["shots"] = rec.shots;
        j["counts"] = {{"30", rec.counts[0]},
                       {"21", rec.counts[1]},
                       {"12", rec.counts[2]},
                       {"03", rec.counts[3]}};
        arr.push_back(j);
    }
    return arr;
}

inline std::vector<CountRecord> counts_from_json(const Json& arr) {
    if (!arr.is_array() || arr.empty())
        throw std::invalid_argument("counts file must be a non-empty array");
    std::vector<CountRecord> records;
    for (const auto& j : arr) {
        CountRecord rec;
        const double qwp2 = j.at("qwp2").get<double>();
        const double hwp3 = j.at("hwp3").get<double>();
        rec.setting = {qwp2, hwp3, direction_of_analyzer(qwp2, hwp3)};
        rec.shots = j.at("shots").get<long long>();
        const auto& c = j.at("counts");
        rec.counts = {c.at("30").get<long long>(), c.at("21").get<long long>(),
                      c.at("12").get<long long>(), c.at("03").get<long long>()};
        for (long long v : rec.counts)
            if (v < 0) throw std::invalid_argument("counts must be nonnegative");
        if (rec.total() > rec.shots)
            throw std::invalid_argument("counts exceed shots");
        records.push_back(rec);
    }
    return records;
}

// --- preparation chains -------------------------------------------------------------

inline OpticalElement element_from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    SpatialMode mode = SpatialMode::b;
    if (j.contains("mode")) {
        const std::string m = j["mode"].get<std::string>();
        if (m == "a") mode = SpatialMode::a;
        else if (m == "b") mode = SpatialMode::b;
        else throw std::invalid_argument("element mode must be \"a\" or \"b\"");
    }
    if (kind == "hwp") return OpticalElement::hwp(j.at("angle_deg").get<double>(), mode);
    if (kind == "qwp") return OpticalElement::qwp(j.at("angle_deg").get<double>(), mode);
    if (kind == "ppbs") return OpticalElement::ppbs(j.at("phi_deg").get<double>());
    if (kind == "pbs_merge" || kind == "pbs-merge") return OpticalElement::pbs_merge();
    if (kind == "lp") return OpticalElement::lp(j.at("angle_deg").get<double>(), mode);
    throw std::invalid_argument("unknown element kind: " + kind);
}

inline std::vector<OpticalElement> chain_from_json(const Json& j) {
    const auto& list = j.contains("elements") ? j.at("elements") : j;
    if (!list.is_array() || list.empty())
        throw std::invalid_argument("chain file must carry a non-empty element list");
    std::vector<OpticalElement> out;
    for (const auto& e : list) out.push_back(element_from_json(e));
    return out;
}

// --- report blocks ---------------------------------------------------------------------

inline Json moments_to_json(const MomentTensors& t) {
    Json j;
    j["N"] = t.photons;
    j["mean"] = {t.mean(0), t.mean(1), t.mean(2)};
    Json cov = Json::array();
    for (int a = 0; a < 3; ++a)
        cov.push_back({t.cov(a, 0), t.cov(a, 1), t.cov(a, 2)});
    j["cov"] = cov;
    Json skew = Json::array();
    for (int a = 0; a < 3; ++a) {
        Json plane = Json::array();
        for (int b = 0; b < 3; ++b)
            plane.push_back({t.skew(a, b, 0), t.skew(a, b, 1), t.skew(a, b, 2)});
        skew.push_back(plane);
    }
    j["skew"] = skew;
    j["variance_sum"] = t.cov.trace();
    return j;
}

inline Json invariance_to_json(const InvarianceTriple& inv) {
    return Json{{"tol", inv.tol},
                {"mean_invariant", inv.mean_invariant},
                {"var_invariant", inv.var_invariant},
                {"skew_invariant", inv.skew_invariant},
                {"mean_residual", inv.mean_residual},
                {"var_residual", inv.var_residual},
                {"skew_residual", inv.skew_residual}};
}

inline Json bounds_to_json(const BoundsReport& b) {
    return Json{{"N", b.photons},   {"sum", b.sum},
                {"lower", b.lower}, {"upper", b.upper},
                {"at_lower", b.at_lower}, {"at_upper", b.at_upper},
                {"within", b.within}};
}

inline Json herald_to_json(const HeraldedState& h) {
    return Json{{"herald_probability", h.probability},
                {"discarded_probability", h.discarded_probability},
                {"state", state_to_json(h.state)}};
}

inline Json calibration_to_json(const PhaseCalibration& cal) {
    Json samples = Json::array();
    for (const auto& s : cal.samples)
        samples.push_back({{"theta_deg", s.theta_deg},
                           {"probability", s.probability},
                           {"observed", s.observed}});
    return Json{{"phi_true_deg", cal.phi_true_deg},
                {"phi_est_deg", cal.phi_est_deg},
                {"theta_min_deg", cal.theta_min_deg},
                {"shots", cal.shots},
                {"seed", cal.seed},
                {"samples", samples}};
}

inline Json reconstruction_to_json(const ReconstructionResult& r) {
    return Json{{"rho", state_to_json(r.rho_hat)},
                {"log_likelihood", r.log_likelihood},
                {"iterations", r.iterations},
                {"converged", r.converged},
                {"complete", r.complete}};
}

inline Json evaluation_to_json(const EvaluationReport& e) {
    return Json{{"fidelity", e.fidelity},
                {"purity_estimate", e.purity_estimate},
                {"purity_target", e.purity_target},
                {"moment_deviation",
                 {e.moment_deviation[0], e.moment_deviation[1], e.moment_deviation[2]}}};
}

inline Json pair_noise_to_json(const PairNoiseReport& r) {
    Json j{{"p1", r.p1},
           {"p2", r.p2},
           {"p3", r.p3},
           {"repetition_rate_hz", r.repetition_rate_hz},
           {"single_rate_hz", r.single_rate_hz},
           {"herald_signal_rate_hz", r.herald_signal_rate_hz},
           {"noise_rate_hz", r.noise_rate_hz},
           {"noise_free", r.noise_free}};
    if (r.noise_free) j["snr"] = "infinite";
    else j["snr"] = r.snr;
    return j;
}

// --- CSV exports ----------------------------------------------------------------------

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Columns: Cartesian direction, polar angles (radians; theta from +z) and
// the signed and absolute field values.
inline std::string sphere_field_csv(const SphereField& field) {
    std::ostringstream out;
    out << "nx,ny,nz,theta,phi,value,abs_value\n";
    for (const auto& s : field.samples) {
        const double theta = std::acos(std::max(-1.0, std::min(1.0, s.direction(2))));
        const double phi = std::atan2(s.direction(1), s.direction(0));
        out << format_double(s.direction(0)) << ',' << format_double(s.direction(1))
            << ',' << format_double(s.direction(2)) << ',' << format_double(theta)
            << ',' << format_double(phi) << ',' << format_double(s.value) << ','
            << format_double(std::abs(s.value)) << '\n';
    }
    return out.str();
}

inline std::string jsa_csv(const JointSpectralAmplitude& jsa) {
    std::ostringstream out;
    out << "wavelength_s_nm,wavelength_i_nm,re,im,abs2\n";
    for (int i = 0; i < jsa.points(); ++i)
        for (int j = 0; j < jsa.points(); ++j) {
            const Complex z = jsa.amplitude(i, j);
            out << format_double(jsa.wavelength_nm[size_t(i)]) << ','
                << format_double(jsa.wavelength_nm[size_t(j)]) << ','
                << format_double(z.real()) << ',' << format_double(z.imag()) << ','
                << format_double(std::norm(z)) << '\n';
        }
    return out.str();
}

inline std::string hom_csv(const HomCurve& curve) {
    std::ostringstream out;
    out << "delay_fs,rate,fit\n";
    for (size_t i = 0; i < curve.delay_fs.size(); ++i)
        out << format_double(curve.delay_fs[i]) << ',' << format_double(curve.rate[i])
            << ',' << format_double(curve.fit[i]) << '\n';
    return out.str();
}

}  // namespace qpol
