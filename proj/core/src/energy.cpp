#include "screen/energy.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "screen/error.hpp"
#include "screen/newtonian.hpp"

namespace screen {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string_view to_string(EnergyMethod m) {
    switch (m) {
        case EnergyMethod::kernel_double_integral: return "kernel_double_integral";
        case EnergyMethod::dirichlet_gradient: return "dirichlet_gradient";
        case EnergyMethod::closed_form: return "closed_form";
    }
    return "unknown";
}

EnergyReport energy_from_potentials(const ScalarField& u_plus, const ScalarField& u, const ScalarField& phi_plus,
                                    const ScalarField& phi_minus) {
    require_same_grid(u_plus, u, "energy_of_pair");
    require_same_grid(u_plus, phi_plus, "energy_of_pair");
    require_same_grid(u_plus, phi_minus, "energy_of_pair");
    double sp = 0.0, sm = 0.0, cr = 0.0, tot = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) {
        sp += phi_plus[n] * u_plus[n];
        sm += phi_minus[n] * u[n];
        cr += phi_plus[n] * u[n];
        tot += (phi_plus[n] - phi_minus[n]) * (u_plus[n] - u[n]);
    }
    const double h = u.grid().spacing();
    const double h3 = h * h * h;
    return {h3 * tot, h3 * sp, h3 * sm, h3 * cr, EnergyMethod::kernel_double_integral, h};
}

EnergyReport energy_of_pair(const ScalarField& u_plus, const ScalarField& u) {
    require_same_grid(u_plus, u, "energy_of_pair");
    for (std::size_t n = 0; n < u.size(); ++n) {
        if (u[n] < 0.0 || u_plus[n] < 0.0) throw PreconditionError("energy_of_pair: densities must be nonnegative");
    }
    NewtonianOperator op(u.grid());
    const ScalarField phi_plus = op.apply(u_plus);
    const ScalarField phi_minus = op.apply(u);
    return energy_from_potentials(u_plus, u, phi_plus, phi_minus);
}

double dirichlet_energy(const ScalarField& phi) {
    const GridSpec& g = phi.grid();
    const double h = g.spacing();
    const int n[3] = {g.dim(0), g.dim(1), g.dim(2)};
    double acc = 0.0;
    for (int k = 0; k < n[2]; ++k) {
        for (int j = 0; j < n[1]; ++j) {
            for (int i = 0; i < n[0]; ++i) {
                const int c[3] = {i, j, k};
                double g2 = 0.0;
                for (int a = 0; a < 3; ++a) {
                    int lo[3] = {i, j, k};
                    int hi[3] = {i, j, k};
                    double span = 2.0 * h;
                    if (c[a] == 0) {
                        hi[a] += 1;
                        span = h;
                    } else if (c[a] == n[a] - 1) {
                        lo[a] -= 1;
                        span = h;
                    } else {
                        lo[a] -= 1;
                        hi[a] += 1;
                    }
                    const double d = (phi.at(hi[0], hi[1], hi[2]) - phi.at(lo[0], lo[1], lo[2])) / span;
                    g2 += d * d;
                }
                acc += g2;
            }
        }
    }
    return h * h * h * acc;
}

double annulus_self_energy(double r1, double r2) {
    if (!(r1 >= 0.0) || !(r2 >= r1)) throw PreconditionError("annulus_self_energy: need 0 <= r1 <= r2");
    return 4.0 * kPi / 15.0 * (3.0 * std::pow(r1, 5) + 2.0 * std::pow(r2, 5) - 5.0 * std::pow(r1, 3) * r2 * r2);
}

double annuli_interaction_energy(double R1, double R2, double r1, double r2) {
    if (!(R1 >= 0.0) || !(R2 >= R1) || !(r1 >= R2) || !(r2 >= r1)) {
        throw PreconditionError("annuli_interaction_energy: need r2 >= r1 >= R2 >= R1 >= 0");
    }
    return 2.0 * kPi / 3.0 * (R2 * R2 * R2 - R1 * R1 * R1) * (r2 * r2 - r1 * r1);
}

double pair_energy(const std::vector<Vec3>& nodes, const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != nodes.size() || b.size() != nodes.size()) {
        throw PreconditionError("pair_energy: size mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (j != i) row += b[j] / distance(nodes[i], nodes[j]);
        }
        acc += a[i] * row;
    }
    return acc / (4.0 * kPi);
}

double measure_energy(const SurfaceMeasure& mu, const DomainSpec& omega_plus) {
    if (!omega_plus.is_analytic()) throw UnsupportedError("measure_energy: omega_plus must be analytic");
    if (mu.masses.size() != mu.nodes.size()) throw PreconditionError("measure_energy: masses/nodes size mismatch");
    double cross = 0.0;
    for (std::size_t i = 0; i < mu.nodes.size(); ++i) {
        if (omega_plus.signed_distance(mu.nodes[i]) < -1e-9) {
            std::ostringstream os;
            os << "measure_energy: node " << i << " lies inside omega_plus";
            throw PreconditionError(os.str());
        }
        cross += mu.masses[i] * uniform_potential(omega_plus, mu.nodes[i]);
    }
    return -2.0 * cross + pair_energy(mu.nodes, mu.masses, mu.masses);
}

}  // namespace screen
