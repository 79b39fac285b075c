#pragma once

#include <nlohmann/json.hpp>

#include "screen/diagnostics.hpp"
#include "screen_cli/config.hpp"

namespace screen::cli {

/// The fields a solve leaves behind and verify reads back.
struct FieldSet {
    ScalarField omega_plus;
    ScalarField u;
    ScalarField phi;
    ScalarField omega_minus;
    double theta = 0.0;
    double kappa = 0.0;
};

struct Checks {
    bool neutrality = false;  // |mass - min(lambda, m)| <= 1% of min(lambda, m)
    bool screening = false;   // residual <= 1e-2 (only asserted when lambda >= m)
    bool nonnegativity = false;
    bool support = false;
    bool flux = false;

    bool all() const { return neutrality && screening && nonnegativity && support && flux; }
};

DiagnosticsReport run_diagnostics(const FieldSet& f, const DomainSpec& omega_plus, const DiagnosticsConfig& cfg,
                                  double lambda);

Checks evaluate_checks(const DiagnosticsReport& r, const FieldSet& f, double lambda);

nlohmann::json to_json(const DiagnosticsReport& r);
nlohmann::json to_json(const Checks& c);
nlohmann::json to_json(const EnergyReport& e);

/// Shell averages of u and phi around center on bins of width h: r, u_mean, phi_mean, cells.
std::vector<std::vector<double>> radial_profile_rows(const FieldSet& f, Vec3 center);

}  // namespace screen::cli
