#include "screen/newtonian.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <sstream>
#include <vector>

#include "screen/error.hpp"

namespace screen {

namespace {

constexpr double kPi = std::numbers::pi;

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

int& thread_setting() {
    static int n = 1;
    return n;
}

struct FftwFree {
    void operator()(double* p) const { fftw_free(p); }
};

}  // namespace

void set_fft_threads(int n) {
    std::lock_guard lock(planner_mutex());
    thread_setting() = std::max(1, n);
}

int fft_threads() { return thread_setting(); }

double KernelTable::unit_cube_inverse_distance_integral() {
    // Pyramid decomposition: int_cube 1/|x| = 6 * (1/4) int_face dA / |y| over the face x = 1/2.
    static const double value = [] {
        using boost::math::quadrature::gauss;
        const auto inner = [](double s) {
            return gauss<double, 30>::integrate([s](double t) { return 1.0 / std::sqrt(0.25 + s * s + t * t); },
                                                0.0, 0.5);
        };
        const double quarter = gauss<double, 30>::integrate(inner, 0.0, 0.5);
        return 1.5 * 4.0 * quarter;
    }();
    return value;
}

KernelTable::KernelTable(const GridSpec& grid)
    : grid_(grid), self_value_(unit_cube_inverse_distance_integral() / (4.0 * kPi * grid.spacing())) {}

double KernelTable::value(int di, int dj, int dk) const {
    if (di == 0 && dj == 0 && dk == 0) return self_value_;
    const double r = grid_.spacing() * std::sqrt(static_cast<double>(di) * di + static_cast<double>(dj) * dj +
                                                 static_cast<double>(dk) * dk);
    return 1.0 / (4.0 * kPi * r);
}

// Zero-padded free-space convolution with pruned transforms: only the octant that holds data
// is transformed along x and y on the way in, and only the octant that is read back is
// transformed on the way out. Layout is FFTW in-place r2c with (z, y, x) from slowest to fastest.
struct NewtonianOperator::Impl {
    GridSpec grid;
    KernelTable kernel;
    int n0, n1, n2;   // padded dims, slowest to fastest (z, y, x)
    int nxc;          // complex entries per x row (n2 / 2 + 1)
    std::size_t row;  // doubles per padded x row
    std::size_t plane;
    std::unique_ptr<double, FftwFree> buffer;
    std::vector<double> spectrum;  // real kernel spectrum, scaled by h^3 / N_pad
    std::vector<fftw_plan> plans;
    fftw_plan fwd_x = nullptr, fwd_y = nullptr, fwd_z = nullptr;
    fftw_plan bwd_z = nullptr, bwd_y = nullptr, bwd_x = nullptr;

    explicit Impl(const GridSpec& g)
        : grid(g),
          kernel(g),
          n0(2 * g.dim(2)),
          n1(2 * g.dim(1)),
          n2(2 * g.dim(0)),
          nxc(n2 / 2 + 1),
          row(static_cast<std::size_t>(2 * nxc)),
          plane(row * static_cast<std::size_t>(n1)) {
        const std::size_t real_slots = plane * static_cast<std::size_t>(n0);
        auto* raw = static_cast<double*>(fftw_malloc(sizeof(double) * real_slots));
        if (raw == nullptr) {
            std::ostringstream os;
            os << "NewtonianOperator: cannot allocate padded transform of " << real_slots * sizeof(double)
               << " bytes";
            throw ResourceError(os.str());
        }
        buffer.reset(raw);
        make_plans(raw);

        // Wrapped kernel on the doubled grid: offset m for m <= N, m - 2N above. The kernel is
        // nonzero everywhere, so its transform uses all octants.
        std::fill(raw, raw + real_slots, 0.0);
        const auto wrap = [](int m, int n_pad) { return m <= n_pad / 2 ? m : m - n_pad; };
        for (int k = 0; k < n0; ++k) {
            const int dk = wrap(k, n0);
            for (int j = 0; j < n1; ++j) {
                const int dj = wrap(j, n1);
                double* r = raw + static_cast<std::size_t>(k) * plane + static_cast<std::size_t>(j) * row;
                for (int i = 0; i < n2; ++i) r[i] = kernel.value(wrap(i, n2), dj, dk);
            }
        }
        fftw_plan full = nullptr;
        {
            std::lock_guard lock(planner_mutex());
            full = fftw_plan_dft_r2c_3d(n0, n1, n2, raw, reinterpret_cast<fftw_complex*>(raw), FFTW_ESTIMATE);
        }
        if (full == nullptr) throw ResourceError("NewtonianOperator: FFT planning failed");
        fftw_execute(full);
        {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(full);
        }
        const std::size_t ncomplex = real_slots / 2;
        const double h = g.spacing();
        const double scale = h * h * h / (static_cast<double>(n0) * n1 * n2);
        spectrum.resize(ncomplex);
        for (std::size_t c = 0; c < ncomplex; ++c) spectrum[c] = raw[2 * c] * scale;
    }

    void make_plans(double* raw) {
        auto* cplx = reinterpret_cast<fftw_complex*>(raw);
        const int nx = grid.dim(0), ny = grid.dim(1), nz = grid.dim(2);
        const int crow = nxc;                        // complex stride between y rows
        const int cplane = nxc * n1;                 // complex stride between z planes
        const int rrow = static_cast<int>(row);      // real stride between y rows
        const int rplane = static_cast<int>(plane);  // real stride between z planes
        std::lock_guard lock(planner_mutex());
        static const bool threads_ok = fftw_init_threads() != 0;
        if (threads_ok) fftw_plan_with_nthreads(thread_setting());
        const unsigned flags = FFTW_ESTIMATE;
        {
            fftw_iodim dim{n2, 1, 1};
            fftw_iodim loops[2] = {{nz, rplane, cplane}, {ny, rrow, crow}};
            fwd_x = fftw_plan_guru_dft_r2c(1, &dim, 2, loops, raw, cplx, flags);
            fftw_iodim cloops[2] = {{nz, cplane, rplane}, {ny, crow, rrow}};
            bwd_x = fftw_plan_guru_dft_c2r(1, &dim, 2, cloops, cplx, raw, flags);
        }
        {
            fftw_iodim dim{n1, crow, crow};
            fftw_iodim loops[2] = {{nz, cplane, cplane}, {nxc, 1, 1}};
            fwd_y = fftw_plan_guru_dft(1, &dim, 2, loops, cplx, cplx, FFTW_FORWARD, flags);
            bwd_y = fftw_plan_guru_dft(1, &dim, 2, loops, cplx, cplx, FFTW_BACKWARD, flags);
        }
        {
            fftw_iodim dim{n0, cplane, cplane};
            fftw_iodim loops[2] = {{n1, crow, crow}, {nxc, 1, 1}};
            fwd_z = fftw_plan_guru_dft(1, &dim, 2, loops, cplx, cplx, FFTW_FORWARD, flags);
            bwd_z = fftw_plan_guru_dft(1, &dim, 2, loops, cplx, cplx, FFTW_BACKWARD, flags);
        }
        (void)nx;
        for (fftw_plan p : {fwd_x, fwd_y, fwd_z, bwd_z, bwd_y, bwd_x}) {
            if (p == nullptr) throw ResourceError("NewtonianOperator: FFT planning failed");
        }
    }

    ~Impl() {
        std::lock_guard lock(planner_mutex());
        for (fftw_plan p : {fwd_x, fwd_y, fwd_z, bwd_z, bwd_y, bwd_x}) {
            if (p != nullptr) fftw_destroy_plan(p);
        }
    }

    void apply(std::span<const double> w, std::span<double> phi) {
        const int nx = grid.dim(0), ny = grid.dim(1), nz = grid.dim(2);
        double* raw = buffer.get();
        // Data octant: rows (j < ny, k < nz) hold w in x < nx and zeros up to the padded length.
        for (int k = 0; k < nz; ++k) {
            double* pl = raw + static_cast<std::size_t>(k) * plane;
            for (int j = 0; j < ny; ++j) {
                const double* src = w.data() + grid.index(0, j, k);
                double* r = pl + static_cast<std::size_t>(j) * row;
                std::copy(src, src + nx, r);
                std::fill(r + nx, r + row, 0.0);
            }
            std::fill(pl + static_cast<std::size_t>(ny) * row, pl + plane, 0.0);
        }
        std::fill(raw + static_cast<std::size_t>(nz) * plane, raw + static_cast<std::size_t>(n0) * plane, 0.0);

        fftw_execute(fwd_x);
        fftw_execute(fwd_y);
        fftw_execute(fwd_z);
        const std::size_t ncomplex = spectrum.size();
        for (std::size_t c = 0; c < ncomplex; ++c) {
            raw[2 * c] *= spectrum[c];
            raw[2 * c + 1] *= spectrum[c];
        }
        fftw_execute(bwd_z);
        fftw_execute(bwd_y);
        fftw_execute(bwd_x);
        for (int k = 0; k < nz; ++k) {
            for (int j = 0; j < ny; ++j) {
                const double* src = raw + static_cast<std::size_t>(k) * plane + static_cast<std::size_t>(j) * row;
                std::copy(src, src + nx, phi.data() + grid.index(0, j, k));
            }
        }
    }
};

NewtonianOperator::NewtonianOperator(const GridSpec& grid) : impl_(std::make_unique<Impl>(grid)) {}
NewtonianOperator::~NewtonianOperator() = default;
NewtonianOperator::NewtonianOperator(NewtonianOperator&&) noexcept = default;
NewtonianOperator& NewtonianOperator::operator=(NewtonianOperator&&) noexcept = default;

const GridSpec& NewtonianOperator::grid() const { return impl_->grid; }
const KernelTable& NewtonianOperator::kernel() const { return impl_->kernel; }

void NewtonianOperator::apply(std::span<const double> density, std::span<double> potential) {
    if (density.size() != impl_->grid.size() || potential.size() != impl_->grid.size()) {
        throw PreconditionError("NewtonianOperator::apply: span sizes do not match the grid");
    }
    impl_->apply(density, potential);
}

ScalarField NewtonianOperator::apply(const ScalarField& density) {
    if (!(density.grid() == impl_->grid)) {
        throw PreconditionError("NewtonianOperator::apply: density lives on a different grid");
    }
    ScalarField out(impl_->grid, 0.0);
    impl_->apply(density.values(), out.values());
    return out;
}

ScalarField potential_fft(const ScalarField& w) {
    NewtonianOperator op(w.grid());
    return op.apply(w);
}

ScalarField potential_direct(const ScalarField& w, std::size_t max_cells) {
    const GridSpec& g = w.grid();
    if (g.size() > max_cells) {
        std::ostringstream os;
        os << "potential_direct: grid has " << g.size() << " cells, cap is " << max_cells;
        throw ResourceError(os.str());
    }
    const KernelTable kernel(g);
    const double h3 = g.cell_volume();
    ScalarField out(g, 0.0);
    std::vector<std::size_t> sources;
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (w[n] != 0.0) sources.push_back(n);
    }
    std::vector<Index3> src_idx;
    src_idx.reserve(sources.size());
    for (auto s : sources) src_idx.push_back(g.unravel(s));
    for (std::size_t t = 0; t < g.size(); ++t) {
        const auto [i, j, k] = g.unravel(t);
        double acc = 0.0;
        for (std::size_t s = 0; s < sources.size(); ++s) {
            const auto& [a, b, c] = src_idx[s];
            acc += kernel.value(i - a, j - b, k - c) * w[sources[s]];
        }
        out[t] = h3 * acc;
    }
    return out;
}

double radial_potential(const std::function<double(double)>& cumulative, double radius, double r_support,
                        std::span<const double> breakpoints, RadialCharge kind) {
    if (!(radius >= 0.0) || !(r_support >= 0.0)) {
        throw PreconditionError("radial_potential: radii must be nonnegative");
    }
    const double q_total = cumulative(r_support);
    for (double r : {1.5 * r_support + 1.0, 4.0 * r_support + 2.0}) {
        const double q = cumulative(r);
        if (std::abs(q - q_total) > 1e-12 * (1.0 + std::abs(q_total))) {
            throw PreconditionError("radial_potential: cumulative charge varies beyond r_support");
        }
    }
    if (kind == RadialCharge::nonnegative) {
        constexpr int kProbe = 256;
        double prev = cumulative(0.0);
        for (int s = 1; s <= kProbe; ++s) {
            const double q = cumulative(r_support * s / kProbe);
            if (q < prev - 1e-12 * (1.0 + std::abs(prev))) {
                throw PreconditionError("radial_potential: cumulative mass must be nondecreasing");
            }
            prev = q;
        }
    }
    if (radius >= r_support) {
        if (radius == 0.0) return 0.0;
        return q_total / (4.0 * kPi * radius);
    }

    std::vector<double> cuts{radius};
    for (double b : breakpoints) {
        if (b > radius && b < r_support) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(r_support);

    using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;
    const auto integrand = [&](double r) { return cumulative(r) / (r * r); };
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        if (cuts[s + 1] <= cuts[s]) continue;
        double err = 0.0;
        acc += Kronrod::integrate(integrand, cuts[s], cuts[s + 1], 20, 1e-14, &err);
    }
    return (acc + q_total / r_support) / (4.0 * kPi);
}

namespace {

double ball_potential(double radius, double r) {
    if (r >= radius) return radius * radius * radius / (3.0 * r);
    return (3.0 * radius * radius - r * r) / 6.0;
}

}  // namespace

double uniform_potential(const DomainSpec& domain, Vec3 x) {
    double acc = 0.0;
    for (const auto& leaf : domain.leaves()) {
        if (const auto* b = std::get_if<Ball>(&leaf.shape())) {
            acc += ball_potential(b->radius, distance(x, b->center));
        } else if (const auto* a = std::get_if<Annulus>(&leaf.shape())) {
            const double r = distance(x, a->center);
            acc += ball_potential(a->r_outer, r);
            if (a->r_inner > 0.0) acc -= ball_potential(a->r_inner, r);
        }
    }
    if (!domain.is_analytic()) throw UnsupportedError("uniform_potential: voxel domains are not analytic");
    return acc;
}

double sphere_average(const ScalarField& phi, Vec3 center, double radius, SphereForm form, int samples) {
    if (!(radius > 0.0)) throw PreconditionError("sphere_average: radius must be positive");
    const GridSpec& g = phi.grid();
    const Vec3 r{radius, radius, radius};
    if (!g.interpolable(center - r) || !g.interpolable(center + r)) {
        std::ostringstream os;
        os << "sphere_average: sphere of radius " << radius << " leaves the grid";
        throw DomainError(os.str());
    }
    double acc = 0.0;
    for (const Vec3& d : fibonacci_sphere(samples)) acc += phi.interpolate(center + radius * d);
    const double mean = acc / samples;
    return form == SphereForm::average ? mean : 4.0 * kPi * radius * radius * mean;
}

}  // namespace screen
