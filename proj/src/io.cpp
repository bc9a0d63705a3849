#include "crtbp/io.hpp"

#include "crtbp/kernels.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace crtbp::io {

using nlohmann::json;

namespace {
json state_json(const RotatingState& s) {
    return json{{"q", {s.q[0], s.q[1], s.q[2]}}, {"p", {s.p[0], s.p[1], s.p[2]}}};
}
} // namespace

json header_json(const Header& h) {
    json tol = json::object();
    for (const auto& [k, v] : h.tolerances) tol[k] = v;
    return json{{"mu", h.mu},
                {"c", h.c},
                {"seed", h.seed},
                {"tolerances", tol},
                {"toolkit_version", kToolkitVersion},
                {"kernel_backend", kernels::backend_name(kernels::active_backend())}};
}

void write_csv_header(std::ostream& os, const Header& h) {
    os << "# toolkit_version=" << kToolkitVersion << "\n";
    os << "# mu=" << h.mu << " c=" << h.c << " seed=" << h.seed << "\n";
    for (const auto& [k, v] : h.tolerances) os << "# " << k << "=" << v << "\n";
}

json to_json(const LagrangeSet& set, const Header& h) {
    json pts = json::array();
    for (const auto& p : set.points) {
        pts.push_back(json{{"index", p.index},
                           {"q", {p.q[0], p.q[1], p.q[2]}},
                           {"phase_point", p.phase_point},
                           {"critical_value", p.critical_value},
                           {"grad_norm", p.grad_norm}});
    }
    return json{{"header", header_json(h)},
                {"points", pts},
                {"c1", set.points.front().critical_value},
                {"moon_l1_distance", set.moon_l1_distance()}};
}

json to_json(const TransversalityCertificate& cert, const Header& h) {
    json j{{"header", header_json(h)},
           {"mu", cert.mu},
           {"c", cert.c},
           {"component", cert.component},
           {"seed", cert.seed},
           {"n_samples", cert.n_samples},
           {"min_margin", cert.min_margin},
           {"max_margin", cert.max_margin},
           {"argmin_state", state_json(cert.argmin_state)},
           {"grid_spec",
            json{{"sampling", "rejection-ball-positions+momentum-sphere"},
                 {"exclusion_radius", cert.exclusion_radius}}},
           {"pass", cert.pass}};
    return j;
}

json to_json(const RegularizedCertificate& cert, const Header& h) {
    return json{{"header", header_json(h)},
                {"mu", cert.mu},
                {"c", cert.c},
                {"eps", cert.eps},
                {"seed", cert.seed},
                {"n_reg_samples", cert.n_reg_samples},
                {"min_xq", cert.min_xq},
                {"min_abs_f", cert.min_abs_f},
                {"max_abs_eta", cert.max_abs_eta},
                {"max_level_residual", cert.max_level_residual},
                {"measured_C", cert.measured_C},
                {"min_xq_bound_slack", cert.min_xq_bound_slack},
                {"away", to_json(cert.away, h)},
                {"n_collar_samples", cert.n_collar_samples},
                {"collar_min_xh", cert.collar_min_xh},
                {"collar_min_xq", cert.collar_min_xq},
                {"gap_description", cert.gap_description},
                {"pass", cert.pass}};
}

json to_json(const GluedCertificate& cert, const Header& h) {
    return json{{"header", header_json(h)},
                {"mu", cert.mu},
                {"c", cert.c},
                {"a", cert.params.a},
                {"b", cert.params.b},
                {"gamma", cert.params.gamma},
                {"s0", cert.cutoff.s0},
                {"s1", cert.cutoff.s1},
                {"ball_radius", cert.ball_radius},
                {"seed", cert.seed},
                {"n_samples", cert.n_samples},
                {"min_z", cert.min_z},
                {"min_term_radial", cert.min_term_radial},
                {"min_term_y", cert.min_term_y},
                {"min_term_g", cert.min_term_g},
                {"argmin_state", state_json(cert.argmin_state)},
                {"eps_E", cert.eps_E},
                {"pass", cert.pass}};
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const Header& h) {
    write_csv_header(os, h);
    os << "t,s,chart,x0,x1,x2,x3,x4,x5,x6,x7,invariant,constraint_residual\n";
    os.precision(17);
    for (const auto& smp : traj.samples) {
        os << smp.t << ',' << smp.s << ',' << (smp.chart == Chart::Rotating ? 0 : 1);
        const int n = smp.chart == Chart::Rotating ? 6 : 8;
        for (int i = 0; i < 8; ++i) {
            os << ',';
            if (i < n) os << smp.state[static_cast<std::size_t>(i)];
        }
        os << ',' << smp.invariant << ',' << smp.constraint_residual << '\n';
    }
}

void write_family_csv(std::ostream& os, const OrbitFamily& family, const Header& h) {
    write_csv_header(os, h);
    os << "r,c,tau,action,residual,k_local\n";
    os.precision(17);
    for (const auto& m : family.members) {
        os << m.r << ',' << m.orbit.energy << ',' << m.orbit.period << ',' << m.orbit.action
           << ',' << m.orbit.closure_residual << ',' << m.k_local << '\n';
    }
}

json family_summary_json(const OrbitFamily& family, const BlueSkyReport& report,
                         const Header& h) {
    return json{{"header", header_json(h)},
                {"n_members", family.members.size()},
                {"k_estimate", family.k_estimate},
                {"reached_target", family.reached_target},
                {"fold_indices", family.fold_indices},
                {"blue_sky_flagged", report.flagged},
                {"blue_sky_reason", report.reason},
                {"max_period_ratio", report.max_period_ratio},
                {"max_length_ratio", report.max_length_ratio},
                {"bound_check",
                 json{{"verdict", report.flagged ? "FLAGGED" : "NO_BLUE_SKY"},
                      {"k", family.k_estimate}}}};
}

json to_json(const RegularizedState& s) {
    return json::array({s.xi[0], s.xi[1], s.xi[2], s.xi[3], s.eta[0], s.eta[1], s.eta[2], s.eta[3]});
}

void write_regularized_csv(std::ostream& os, const std::vector<RegularizedState>& states,
                           const Header& h) {
    write_csv_header(os, h);
    os << "xi0,xi1,xi2,xi3,eta0,eta1,eta2,eta3\n";
    os.precision(17);
    for (const auto& s : states) {
        os << s.xi[0] << ',' << s.xi[1] << ',' << s.xi[2] << ',' << s.xi[3] << ',' << s.eta[0]
           << ',' << s.eta[1] << ',' << s.eta[2] << ',' << s.eta[3] << '\n';
    }
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config file not found: " + path);
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        // trim
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream msg;
            msg << "malformed config line " << lineno << " (expected key=value): '" << line << "'";
            throw std::runtime_error(msg.str());
        }
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        const auto ktrim = key.find_last_not_of(" \t");
        key = key.substr(0, ktrim + 1);
        const auto vtrim = val.find_first_not_of(" \t");
        val = vtrim == std::string::npos ? "" : val.substr(vtrim);
        out[key] = val;
    }
    return out;
}

} // namespace crtbp::io
