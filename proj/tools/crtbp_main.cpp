// Command-line front end: lagrange | hill | certify | integrate | continue.
// Every run is seeded and every output carries a provenance header; identical
// configuration and seed give byte-identical files.

#include "crtbp/connected_sum.hpp"
#include "crtbp/continuation.hpp"
#include "crtbp/core_dynamics.hpp"
#include "crtbp/flow.hpp"
#include "crtbp/hill_regions.hpp"
#include "crtbp/io.hpp"
#include "crtbp/lagrange_points.hpp"
#include "crtbp/moser.hpp"
#include "crtbp/transversality.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace {

using crtbp::io::Header;
using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file: " + out_path);
    os << text;
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

struct CommonOpts {
    double mu = 0.5;
    double energy = -2.2;
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool wants_energy = true) {
    cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    cmd->add_option("--mu", o.mu, "mass ratio in (0,1)")->check(CLI::Range(1e-12, 1.0 - 1e-12));
    if (wants_energy) cmd->add_option("--energy", o.energy, "Jacobi energy level (c < -1)");
    cmd->add_option("--samples", o.samples, "sample count for certificates");
    cmd->add_option("--seed", o.seed, "random seed (recorded in outputs)");
    cmd->add_option("--out", o.out, "output path (default: stdout)");
}

// The --config file holds flat key=value pairs naming long options of the
// chosen subcommand. Its tokens are spliced in right after the subcommand
// name, so explicit flags (parsed later, take-last policy) win.
std::vector<std::string> splice_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::string config_path;
    for (std::size_t i = 1; i < args.size();) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                       args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            ++i;
        }
    }
    if (config_path.empty()) return args;
    if (args.size() < 2)
        throw std::invalid_argument("--config requires a subcommand");
    const auto kv = crtbp::io::parse_config_file(config_path);
    std::vector<std::string> tokens;
    for (const auto& [k, v] : kv) tokens.push_back("--" + k + "=" + v);
    args.insert(args.begin() + 2, tokens.begin(), tokens.end());
    return args;
}

int run_lagrange(const CommonOpts& o) {
    const crtbp::MassRatio mu(o.mu);
    const crtbp::LagrangeSet set = crtbp::lagrange_set(mu);
    Header h{o.mu, 0.0, o.seed, {{"grad_tol", 1e-10}, {"root_tol", 1e-12}}};
    emit(json_text(crtbp::io::to_json(set, h)), o.out);
    return kExitPass;
}

int run_hill(const CommonOpts& o, int grid_n) {
    const crtbp::MassRatio mu(o.mu);
    const crtbp::EnergyLevel c(o.energy);
    crtbp::HillGridSpec spec;
    spec.nx = spec.ny = spec.nz = grid_n;
    const crtbp::HillGrid grid(c, mu, spec);
    std::ostringstream os;
    Header h{o.mu, o.energy, o.seed, {}};
    crtbp::io::write_csv_header(os, h);
    grid.write_csv(os);
    emit(os.str(), o.out);
    return kExitPass;
}

int run_certify(const CommonOpts& o, const std::string& component, double eps, double delta,
                double s0, double s1) {
    const crtbp::MassRatio mu(o.mu);
    const crtbp::LagrangeSet lset = crtbp::lagrange_set(mu);
    const double c1 = lset.l1().critical_value;
    const double c2 = lset.points[1].critical_value;

    if (std::abs(o.energy - c1) < 1e-9) {
        std::cerr << "error: --energy equals the first critical value c1 = " << c1
                  << "; the hypersurface is singular there\n";
        return kExitUsage;
    }
    Header h{o.mu, o.energy, o.seed, {{"pass_threshold", 0.0}}};

    if (o.energy < c1) {
        // Below c1: joint regularized + radial certificate. The Earth side is
        // the Moon side of the swapped problem mu -> 1-mu (exact symmetry of H).
        const bool earth = component == "earth";
        const crtbp::MassRatio mu_eff(earth ? 1.0 - o.mu : o.mu);
        const crtbp::RegularizedCertificate cert = crtbp::certify_regularized(
            crtbp::EnergyLevel(o.energy), mu_eff, eps, o.samples, o.seed);
        json j = crtbp::io::to_json(cert, h);
        j["component"] = component;
        j["regime"] = "below_c1";
        emit(json_text(j), o.out);
        return cert.pass ? kExitPass : kExitFail;
    }

    if (o.energy >= c2) {
        std::cerr << "error: --energy is at or above the second critical value c2 = " << c2
                  << "; only the window (c1, c2) is supported above c1\n";
        return kExitUsage;
    }

    // Above c1: glued-field certificate near L1 plus the radial certificate
    // away from L1 on both sides.
    const crtbp::QuadraticFormQ q = crtbp::quadratic_form_at_L1(mu);
    const crtbp::YParamSearchResult yp = crtbp::find_Y_params(q);
    crtbp::CutoffSpec cutoff{s0, s1};
    crtbp::GluedCertifySpec gspec;
    gspec.seed = o.seed;
    gspec.n_samples = o.samples;
    const crtbp::GluedCertificate glued =
        crtbp::certify_glued(crtbp::EnergyLevel(o.energy), mu, yp.params, cutoff, gspec);

    crtbp::CertifySpec away;
    away.seed = o.seed;
    away.n_samples = o.samples;
    away.exclusion_radius = delta;
    const crtbp::TransversalityCertificate moon_away =
        crtbp::certify_component(crtbp::EnergyLevel(o.energy), mu, crtbp::Component::Moon, away);
    const crtbp::TransversalityCertificate earth_away =
        crtbp::certify_component(crtbp::EnergyLevel(o.energy), mu, crtbp::Component::Earth, away);

    json j = crtbp::io::to_json(glued, h);
    j["regime"] = "glued_above_c1";
    j["delta_exclusion"] = delta;
    j["y_min_eigenvalue"] = yp.min_eigenvalue;
    j["moon_away"] = crtbp::io::to_json(moon_away, h);
    j["earth_away"] = crtbp::io::to_json(earth_away, h);
    const bool pass = glued.pass && moon_away.pass && earth_away.pass;
    j["pass"] = pass;
    emit(json_text(j), o.out);
    return pass ? kExitPass : kExitFail;
}

int run_integrate(const CommonOpts& o, const std::vector<double>& state, double t_final,
                  double step_h, std::size_t stride, const std::string& chart) {
    const crtbp::MassRatio mu(o.mu);
    crtbp::StepSpec step;
    step.h = step_h;
    crtbp::FlowOptions opt;
    opt.sample_stride = stride;

    crtbp::Trajectory traj;
    if (chart == "rotating") {
        if (state.size() != 6)
            throw std::invalid_argument("--state: rotating chart needs 6 numbers");
        const crtbp::RotatingState s0 = crtbp::RotatingState::from_flat(
            {state[0], state[1], state[2], state[3], state[4], state[5]});
        traj = crtbp::integrate_unregularized(s0, mu, t_final, step, opt);
    } else {
        if (state.size() != 8)
            throw std::invalid_argument("--state: regularized chart needs 8 numbers");
        crtbp::RegularizedState s0;
        for (int i = 0; i < 4; ++i) {
            s0.xi[static_cast<std::size_t>(i)] = state[static_cast<std::size_t>(i)];
            s0.eta[static_cast<std::size_t>(i)] = state[static_cast<std::size_t>(i + 4)];
        }
        s0 = crtbp::project_to_constraints(s0);
        traj =
            crtbp::integrate_regularized(s0, crtbp::EnergyLevel(o.energy), mu, t_final, step, opt);
    }

    std::ostringstream os;
    Header h{o.mu, o.energy, o.seed, {{"step_h", step_h}}};
    crtbp::io::write_trajectory_csv(os, traj, h);
    emit(os.str(), o.out);
    return traj.status == crtbp::FlowStatus::Completed ? kExitPass : kExitFail;
}

int run_continue(const CommonOpts& o, double radius, double energy_target, std::size_t steps,
                 const std::string& summary_out) {
    const crtbp::MassRatio mu(o.mu);
    crtbp::CorrectorSpec cs;
    cs.step.h = 5e-4;
    const crtbp::CorrectorResult seed = crtbp::kepler_seed_orbit(mu, radius, cs);
    if (!seed.converged) {
        std::cerr << "error: seed orbit correction failed: " << seed.message << "\n";
        return kExitFail;
    }
    crtbp::ContinuationSpec spec;
    spec.corrector = cs;
    spec.max_steps = steps;
    const crtbp::OrbitFamily fam = crtbp::continue_family(seed.orbit, energy_target, mu, spec);
    const crtbp::BlueSkyReport rep = crtbp::blue_sky_monitor(fam);

    Header h{o.mu, energy_target, o.seed, {{"corrector_tol", cs.tol}}};
    std::ostringstream os;
    crtbp::io::write_family_csv(os, fam, h);
    emit(os.str(), o.out);
    if (!summary_out.empty())
        emit(json_text(crtbp::io::family_summary_json(fam, rep, h)), summary_out);
    else
        std::cout << json_text(crtbp::io::family_summary_json(fam, rep, h));
    return rep.flagged ? kExitFail : kExitPass;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatial circular restricted three-body problem certification toolkit"};
    app.require_subcommand(1);

    CommonOpts lag_o, hill_o, cert_o, integ_o, cont_o;

    std::string config_dummy;
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    CLI::App* lag = app.add_subcommand("lagrange", "Lagrange points and critical values (JSON)");
    add_common(lag, lag_o, false);

    CLI::App* hill = app.add_subcommand("hill", "Hill-region component grid (CSV)");
    add_common(hill, hill_o);
    int grid_n = 128;
    hill->add_option("--grid-n", grid_n, "grid resolution per axis")->check(CLI::Range(8, 1024));

    CLI::App* cert = app.add_subcommand(
        "certify", "transversality certificate (JSON); regime picked from the energy");
    add_common(cert, cert_o);
    std::string component = "moon";
    double eps = 0.05, delta = 0.05, s0 = 0.02, s1 = 0.06;
    cert->add_option("--component", component, "moon|earth (below-c1 regime)")
        ->check(CLI::IsMember({"moon", "earth"}));
    cert->add_option("--eps", eps, "regularized chart radius");
    cert->add_option("--delta", delta, "L1 exclusion ball (above-c1 regime)");
    cert->add_option("--s0", s0, "cut-off inner width");
    cert->add_option("--s1", s1, "cut-off outer width");

    CLI::App* integ = app.add_subcommand("integrate", "flow integration (trajectory CSV)");
    add_common(integ, integ_o);
    std::vector<double> state;
    double t_final = 10.0, step_h = 1e-3;
    std::size_t stride = 10;
    std::string chart = "rotating";
    integ->add_option("--state", state, "initial state (6 rotating / 8 regularized numbers)")
        ->expected(6, 8);
    integ->add_option("--t-final", t_final, "integration span");
    integ->add_option("--step-h", step_h, "fixed step size");
    integ->add_option("--stride", stride, "record every n-th step");
    integ->add_option("--chart", chart, "rotating|regularized")
        ->check(CLI::IsMember({"rotating", "regularized"}));

    CLI::App* cont = app.add_subcommand("continue", "periodic-orbit family (CSV + JSON summary)");
    add_common(cont, cont_o, false);
    double radius = 0.15, energy_target = -2.3;
    std::size_t steps = 30;
    std::string summary_out;
    cont->add_option("--radius", radius, "seed orbit radius about the Moon");
    cont->add_option("--energy-target", energy_target, "continuation target energy");
    cont->add_option("--steps", steps, "maximum continuation steps");
    cont->add_option("--summary-out", summary_out, "JSON summary path (default: stdout)");

    std::vector<std::string> args;
    try {
        args = splice_config(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        std::vector<const char*> argv2;
        argv2.reserve(args.size());
        for (const auto& a : args) argv2.push_back(a.c_str());
        app.parse(static_cast<int>(argv2.size()), argv2.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (lag->parsed()) return run_lagrange(lag_o);
        if (hill->parsed()) return run_hill(hill_o, grid_n);
        if (cert->parsed()) return run_certify(cert_o, component, eps, delta, s0, s1);
        if (integ->parsed())
            return run_integrate(integ_o, state, t_final, step_h, stride, chart);
        if (cont->parsed())
            return run_continue(cont_o, radius, energy_target, steps, summary_out);
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitUsage;
}
