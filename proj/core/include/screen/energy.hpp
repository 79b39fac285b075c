#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "screen/geometry.hpp"
#include "screen/grid.hpp"

namespace screen {

enum class EnergyMethod { kernel_double_integral, dirichlet_gradient, closed_form };

std::string_view to_string(EnergyMethod m);

/// Coulomb energy and its breakdown E = self_plus + self_minus - 2 cross.
struct EnergyReport {
    double total = 0.0;
    double self_plus = 0.0;
    double self_minus = 0.0;
    double cross = 0.0;
    EnergyMethod method = EnergyMethod::kernel_double_integral;
    std::optional<double> grid_h;
};

/// Energy of the net density u_plus - u by the discrete double integral.
EnergyReport energy_of_pair(const ScalarField& u_plus, const ScalarField& u);

/// Same, reusing precomputed potentials of u_plus and u (phi_plus = K u_plus, phi_minus = K u).
EnergyReport energy_from_potentials(const ScalarField& u_plus, const ScalarField& u, const ScalarField& phi_plus,
                                    const ScalarField& phi_minus);

/// h^3 * sum |grad phi|^2 with centred differences (one-sided on the box faces).
double dirichlet_energy(const ScalarField& phi);

/// Self energy of the shell r1 < |x| < r2: (4 pi / 15)(3 r1^5 + 2 r2^5 - 5 r1^3 r2^2).
double annulus_self_energy(double r1, double r2);

/// Interaction of the shells C(R1,R2) and C(r1,r2) with r2 >= r1 >= R2 >= R1 >= 0:
/// (2 pi / 3)(R2^3 - R1^3)(r2^2 - r1^2).
double annuli_interaction_energy(double R1, double R2, double r1, double r2);

/// Weighted point masses on the boundary of the positive domain.
struct SurfaceMeasure {
    std::vector<Vec3> nodes;
    std::vector<double> weights;  // area weights
    std::vector<double> masses;
    double total_mass = 0.0;
};

/// Limit energy F(mu) = -2 I(mu_plus, mu) + I(mu), with I(mu) summed over distinct node pairs.
/// Throws PreconditionError if a node lies strictly inside omega_plus.
double measure_energy(const SurfaceMeasure& mu, const DomainSpec& omega_plus);

/// Pairwise point-charge energy sum_{i != j} a_i b_j / (4 pi |x_i - x_j|).
double pair_energy(const std::vector<Vec3>& nodes, const std::vector<double>& a, const std::vector<double>& b);

}  // namespace screen
