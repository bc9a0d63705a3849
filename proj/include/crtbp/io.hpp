#pragma once

#include "crtbp/connected_sum.hpp"
#include "crtbp/continuation.hpp"
#include "crtbp/flow.hpp"
#include "crtbp/hill_regions.hpp"
#include "crtbp/lagrange_points.hpp"
#include "crtbp/moser.hpp"
#include "crtbp/transversality.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

namespace crtbp::io {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Common provenance header carried by every emitted JSON document and, as
/// '#'-prefixed comment lines, by CSV files.
struct Header {
    double mu = 0.0;
    double c = 0.0;
    std::uint64_t seed = 0;
    std::map<std::string, double> tolerances;
};

nlohmann::json header_json(const Header& h);
void write_csv_header(std::ostream& os, const Header& h);

nlohmann::json to_json(const LagrangeSet& set, const Header& h);
nlohmann::json to_json(const TransversalityCertificate& cert, const Header& h);
nlohmann::json to_json(const RegularizedCertificate& cert, const Header& h);
nlohmann::json to_json(const GluedCertificate& cert, const Header& h);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const Header& h);
void write_family_csv(std::ostream& os, const OrbitFamily& family, const Header& h);
nlohmann::json family_summary_json(const OrbitFamily& family, const BlueSkyReport& report,
                                   const Header& h);

/// Regularized states as 8-tuples (xi0..xi3, eta0..eta3).
nlohmann::json to_json(const RegularizedState& s);
void write_regularized_csv(std::ostream& os, const std::vector<RegularizedState>& states,
                           const Header& h);

/// Flat key=value config file (one pair per line, '#' comments).
std::map<std::string, std::string> parse_config_file(const std::string& path);

} // namespace crtbp::io
