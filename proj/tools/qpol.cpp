// Command-line surface over the qpol library: build states, compute moment
// fields and classifications, run the preparation chain and PPBS calibration,
// simulate and reconstruct tomography datasets, and model joint spectra.
//
// Exit codes: 0 success, 2 usage error, 3 validation error, 4 non-convergence.

#include "qpol/io.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNoConvergence = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool file_exists(const std::string& path) {
    std::ifstream f(path);
    return f.good();
}

// A state argument is either a named reference state or a JSON file path.
qpol::StateRecord resolve_state(const std::string& arg) {
    if (file_exists(arg)) return qpol::state_from_json(qpol::load_json_file(arg));
    const auto& names = qpol::named_state_names();
    bool known = std::find(names.begin(), names.end(), arg) != names.end() ||
                 arg == "oox_mix";
    if (!known) throw UsageError("unknown state name or missing file: " + arg);
    const qpol::DensityOperator rho = qpol::named_state(arg);
    // report pure named states in pure form
    if (qpol::purity(rho) > 1.0 - 1e-12) {
        Eigen::SelfAdjointEigenSolver<qpol::Matrix> es(rho.matrix);
        qpol::Vector v = es.eigenvectors().col(rho.dimension() - 1);
        return qpol::StateRecord::from_pure(qpol::PureState(rho.photons, v));
    }
    return qpol::StateRecord::from_density(rho);
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text << '\n';
    } else {
        qpol::write_text_file(out_path, text);
    }
}

void emit_json(const std::string& out_path, const qpol::Json& j) {
    emit(out_path, j.dump(2));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-mode photon polarization toolkit"};
    app.require_subcommand(1);
    std::function<int()> action;

    // --- state ---------------------------------------------------------------
    auto* state_cmd = app.add_subcommand("state", "emit a state as JSON");
    {
        auto state_arg = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        state_cmd->add_option("--state,--name", *state_arg,
                              "named state or JSON file")->required();
        state_cmd->add_option("--out", *out, "output path (default stdout)");
        state_cmd->callback([=, &action] {
            action = [=] {
                const qpol::StateRecord rec = resolve_state(*state_arg);
                emit_json(*out, rec.pure ? qpol::state_to_json(*rec.pure)
                                         : qpol::state_to_json(rec.rho));
                return 0;
            };
        });
    }

    // --- moments -------------------------------------------------------------
    auto* moments_cmd =
        app.add_subcommand("moments", "moment tensors and sphere field");
    {
        auto state_arg = std::make_shared<std::string>();
        auto order = std::make_shared<int>(2);
        auto resolution = std::make_shared<int>(2048);
        auto grid = std::make_shared<std::string>("fibonacci");
        auto out = std::make_shared<std::string>();
        auto csv = std::make_shared<std::string>();
        moments_cmd->add_option("--state", *state_arg, "named state or JSON file")
            ->required();
        moments_cmd->add_option("--order", *order, "moment order 1..3");
        moments_cmd->add_option("--resolution", *resolution,
                                "sphere sample count (fibonacci) or per-axis size");
        moments_cmd->add_option("--grid", *grid, "fibonacci | latlong");
        moments_cmd->add_option("--out", *out, "tensors JSON path (default stdout)");
        moments_cmd->add_option("--csv", *csv, "sphere-field CSV path");
        moments_cmd->callback([=, &action] {
            action = [=] {
                const qpol::StateRecord rec = resolve_state(*state_arg);
                qpol::SphereSampling sampling;
                if (*grid == "fibonacci") {
                    sampling.kind = qpol::SphereSampling::Kind::fibonacci;
                    sampling.count = *resolution;
                } else if (*grid == "latlong") {
                    sampling.kind = qpol::SphereSampling::Kind::latlong;
                    sampling.n_theta = *resolution;
                    sampling.n_phi = 2 * *resolution;
                } else {
                    throw UsageError("grid must be fibonacci or latlong");
                }
                const qpol::MomentTensors tensors = qpol::moment_tensors(rec.rho);
                qpol::Json j = qpol::moments_to_json(tensors);
                j["order"] = *order;
                const qpol::SphereField field =
                    qpol::sphere_field(rec.rho, *order, sampling);
                j["field_max_abs"] = field.max_abs();
                if (!csv->empty())
                    qpol::write_text_file(*csv, qpol::sphere_field_csv(field));
                emit_json(*out, j);
                return 0;
            };
        });
    }

    // --- classify --------------------------------------------------------------
    auto* classify_cmd = app.add_subcommand("classify", "invariance classification");
    {
        auto state_arg = std::make_shared<std::string>();
        auto profile = std::make_shared<std::string>("exact");
        auto tol = std::make_shared<double>(0.0);
        auto out = std::make_shared<std::string>();
        classify_cmd->add_option("--state", *state_arg, "named state or JSON file")
            ->required();
        classify_cmd->add_option("--tol-profile", *profile, "exact | experimental");
        classify_cmd->add_option("--tol", *tol, "explicit tolerance override");
        classify_cmd->add_option("--out", *out, "output path (default stdout)");
        classify_cmd->callback([=, &action] {
            action = [=] {
                const qpol::StateRecord rec = resolve_state(*state_arg);
                qpol::ToleranceProfile prof = qpol::ToleranceProfile::named(*profile);
                if (*tol > 0.0) prof.tol = *tol;
                const qpol::InvarianceTriple inv = qpol::invariance(rec.rho, prof);
                const qpol::PolarizationClass cls = qpol::classify(rec.rho, prof);
                qpol::Json j{{"class", qpol::to_string(cls)},
                             {"unpolarized_order", qpol::unpolarized_order(inv)},
                             {"profile", prof.name},
                             {"invariance", qpol::invariance_to_json(inv)}};
                emit_json(*out, j);
                return 0;
            };
        });
    }

    // --- bounds -----------------------------------------------------------------
    auto* bounds_cmd = app.add_subcommand("bounds", "variance-sum bound check");
    {
        auto state_arg = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        bounds_cmd->add_option("--state", *state_arg, "named state or JSON file")
            ->required();
        bounds_cmd->add_option("--out", *out, "output path (default stdout)");
        bounds_cmd->callback([=, &action] {
            action = [=] {
                const qpol::StateRecord rec = resolve_state(*state_arg);
                emit_json(*out, qpol::bounds_to_json(qpol::check_bounds(rec.rho)));
                return 0;
            };
        });
    }

    // --- prep ----------------------------------------------------------------------
    auto* prep_cmd = app.add_subcommand("prep", "run a preparation chain");
    {
        auto chain_path = std::make_shared<std::string>();
        auto target = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        prep_cmd->add_option("--chain", *chain_path, "chain JSON file")->required();
        prep_cmd->add_option("--target", *target, "named target state for fidelity");
        prep_cmd->add_option("--out", *out, "output path (default stdout)");
        prep_cmd->callback([=, &action] {
            action = [=] {
                const auto elements =
                    qpol::chain_from_json(qpol::load_json_file(*chain_path));
                const qpol::HeraldedState h =
                    qpol::run_chain(qpol::initial_state(), elements);
                qpol::Json j = qpol::herald_to_json(h);
                if (!target->empty()) {
                    const qpol::StateRecord rec = resolve_state(*target);
                    j["target"] = *target;
                    j["fidelity_to_target"] =
                        qpol::fidelity(qpol::DensityOperator::pure(h.state), rec.rho);
                }
                emit_json(*out, j);
                return 0;
            };
        });
    }

    // --- calibrate -------------------------------------------------------------------
    auto* cal_cmd = app.add_subcommand("calibrate", "PPBS phase calibration");
    {
        auto phi = std::make_shared<double>(-85.7);
        auto points = std::make_shared<int>(64);
        auto shots = std::make_shared<long long>(0);
        auto seed = std::make_shared<std::uint64_t>(1);
        auto out = std::make_shared<std::string>();
        cal_cmd->add_option("--phi", *phi, "true phase (degrees)");
        cal_cmd->add_option("--points", *points, "theta grid size");
        cal_cmd->add_option("--shots", *shots, "events per setting (0 = noiseless)");
        cal_cmd->add_option("--seed", *seed, "RNG seed");
        cal_cmd->add_option("--out", *out, "output path (default stdout)");
        cal_cmd->callback([=, &action] {
            action = [=] {
                const qpol::PhaseCalibration cal = qpol::calibrate_phase(
                    *phi, qpol::default_calibration_grid(*points), *shots, *seed);
                emit_json(*out, qpol::calibration_to_json(cal));
                return 0;
            };
        });
    }

    // --- tomo-sim ----------------------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("tomo-sim", "simulate tomography counts");
    {
        auto state_arg = std::make_shared<std::string>();
        auto shots = std::make_shared<long long>(10000);
        auto seed = std::make_shared<std::uint64_t>(1);
        auto out = std::make_shared<std::string>();
        sim_cmd->add_option("--state", *state_arg, "named state or JSON file")
            ->required();
        sim_cmd->add_option("--shots", *shots, "shots per setting");
        sim_cmd->add_option("--seed", *seed, "RNG seed");
        sim_cmd->add_option("--out", *out, "output path (default stdout)");
        sim_cmd->callback([=, &action] {
            action = [=] {
                const qpol::StateRecord rec = resolve_state(*state_arg);
                const auto records = qpol::simulate_counts(
                    rec.rho, qpol::default_settings(), *shots, *seed);
                emit_json(*out, qpol::counts_to_json(records));
                return 0;
            };
        });
    }

    // --- tomo-fit ----------------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("tomo-fit", "maximum-likelihood reconstruction");
    {
        auto counts_path = std::make_shared<std::string>();
        auto target = std::make_shared<std::string>();
        auto max_iters = std::make_shared<int>(5000);
        auto out = std::make_shared<std::string>();
        fit_cmd->add_option("--counts", *counts_path, "counts JSON file")->required();
        fit_cmd->add_option("--target", *target, "named target state for metrics");
        fit_cmd->add_option("--max-iters", *max_iters, "iteration cap");
        fit_cmd->add_option("--out", *out, "output path (default stdout)");
        fit_cmd->callback([=, &action] {
            action = [=] {
                const auto records =
                    qpol::counts_from_json(qpol::load_json_file(*counts_path));
                qpol::MleConfig config;
                config.max_iterations = *max_iters;
                const qpol::ReconstructionResult res =
                    qpol::mle_reconstruct(records, config);
                qpol::Json j = qpol::reconstruction_to_json(res);
                if (!target->empty()) {
                    const qpol::StateRecord rec = resolve_state(*target);
                    j["target"] = *target;
                    j["evaluation"] =
                        qpol::evaluation_to_json(qpol::evaluate(res.rho_hat, rec.rho));
                }
                emit_json(*out, j);
                return res.converged ? 0 : kExitNoConvergence;
            };
        });
    }

    // --- spectral ----------------------------------------------------------------------
    auto* spec_cmd = app.add_subcommand("spectral", "joint spectrum and HOM model");
    {
        auto pump_nm = std::make_shared<double>(390.0);
        auto pump_fs = std::make_shared<double>(140.0);
        auto length_mm = std::make_shared<double>(0.6);
        auto gvm = std::make_shared<double>(270.0);
        auto filter_nm = std::make_shared<double>(3.0);
        auto filter_center = std::make_shared<double>(780.0);
        auto grid_min = std::make_shared<double>(760.0);
        auto grid_max = std::make_shared<double>(800.0);
        auto points = std::make_shared<int>(256);
        auto p1 = std::make_shared<double>(0.0);
        auto p2 = std::make_shared<double>(0.0);
        auto p3 = std::make_shared<double>(0.0);
        auto v_raw = std::make_shared<double>(-1.0);
        auto jsa_path = std::make_shared<std::string>();
        auto hom_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        spec_cmd->add_option("--pump-center-nm", *pump_nm, "pump center wavelength");
        spec_cmd->add_option("--pump-duration-fs", *pump_fs, "pump intensity FWHM");
        spec_cmd->add_option("--length-mm", *length_mm, "crystal length");
        spec_cmd->add_option("--gvm-fs-mm", *gvm, "group-velocity mismatch slope");
        spec_cmd->add_option("--filter-fwhm-nm", *filter_nm,
                             "filter FWHM (0 disables filtering)");
        spec_cmd->add_option("--filter-center-nm", *filter_center, "filter center");
        spec_cmd->add_option("--grid-min-nm", *grid_min, "grid lower edge");
        spec_cmd->add_option("--grid-max-nm", *grid_max, "grid upper edge");
        spec_cmd->add_option("--points", *points, "grid points per axis");
        spec_cmd->add_option("--p1", *p1, "single-pair probability per pulse");
        spec_cmd->add_option("--p2", *p2, "double-pair probability per pulse");
        spec_cmd->add_option("--p3", *p3, "triple-pair probability per pulse");
        spec_cmd->add_option("--v-raw", *v_raw,
                             "measured raw visibility for noise subtraction");
        spec_cmd->add_option("--jsa-csv", *jsa_path, "JSA CSV path");
        spec_cmd->add_option("--hom-csv", *hom_path, "HOM curve CSV path");
        spec_cmd->add_option("--out", *out, "report JSON path (default stdout)");
        spec_cmd->callback([=, &action] {
            action = [=] {
                const qpol::PumpParams pump{*pump_nm, *pump_fs};
                const qpol::PhaseMatchParams pm{*length_mm, *gvm};
                const qpol::SpectralGrid grid{*grid_min, *grid_max, *points};
                const qpol::JointSpectralAmplitude raw =
                    qpol::build_jsa(pump, pm, grid);
                qpol::Json j;
                j["schmidt_number_unfiltered"] =
                    qpol::schmidt(raw).schmidt_number;
                qpol::JointSpectralAmplitude jsa = raw;
                if (*filter_nm > 0.0) {
                    const qpol::FilterSpec filt{*filter_center, *filter_nm};
                    const qpol::FilteredJsa filtered =
                        qpol::apply_filters(raw, filt, filt);
                    jsa = filtered.jsa;
                    j["transmitted_fraction"] = filtered.transmitted_fraction;
                }
                const qpol::SchmidtResult sch = qpol::schmidt(jsa);
                j["schmidt_number"] = sch.schmidt_number;
                j["heralded_purity"] = sch.heralded_purity;
                const qpol::HomCurve curve =
                    qpol::hom_curve(jsa, qpol::default_delays());
                j["hom_visibility"] = curve.visibility;
                j["heralded_hom_visibility"] = qpol::heralded_hom_visibility(jsa);
                if (*p1 > 0.0) {
                    j["pair_noise"] =
                        qpol::pair_noise_to_json(qpol::pair_noise_report(*p1, *p2, *p3));
                    if (*v_raw >= 0.0) {
                        const qpol::NoiseSubtraction sub =
                            qpol::noise_subtracted_visibility(*v_raw, *p1, *p2, *p3);
                        j["noise_subtraction"] = {{"v_raw", sub.v_raw},
                                                  {"floor_ratio", sub.floor_ratio},
                                                  {"v_subtracted", sub.v_subtracted}};
                    }
                }
                if (!jsa_path->empty())
                    qpol::write_text_file(*jsa_path, qpol::jsa_csv(jsa));
                if (!hom_path->empty())
                    qpol::write_text_file(*hom_path, qpol::hom_csv(curve));
                emit_json(*out, j);
                return 0;
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        return action ? action() : kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}
