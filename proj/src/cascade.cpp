#include "tbsim/cascade.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tbsim {

namespace {

void require_positive_rate(double g, const char* name) {
    if (!(g > 0.0) || !std::isfinite(g))
        throw std::invalid_argument(std::string("decay rate ") + name +
                                    " must be positive and finite");
}

} // namespace

DecayRates::DecayRates(double ga, double gb, std::vector<double> more)
    : gamma_a(ga), gamma_b(gb), extra(std::move(more)) {
    require_positive_rate(gamma_a, "gamma_a");
    require_positive_rate(gamma_b, "gamma_b");
    for (double g : extra) require_positive_rate(g, "gamma_k");
}

double DecayRates::rate(std::size_t k) const {
    if (k == 0) return gamma_a;
    if (k == 1) return gamma_b;
    return extra.at(k - 2);
}

double DecayRates::min_rate() const {
    double m = std::min(gamma_a, gamma_b);
    for (double g : extra) m = std::min(m, g);
    return m;
}

TimeGrid::TimeGrid(double t_max_, int n_points_)
    : t_max(t_max_), n_points(n_points_), dt(t_max_ / n_points_) {
    if (!(t_max > 0.0) || !std::isfinite(t_max))
        throw std::invalid_argument("TimeGrid: t_max must be positive and finite");
    if (n_points < 2)
        throw std::invalid_argument("TimeGrid: n_points must be at least 2");
}

bool TimeGrid::covers(const DecayRates& rates) const {
    return t_max >= 8.0 / (2.0 * rates.min_rate());
}

void TimeGrid::validate(const DecayRates& rates, bool allow_truncation) const {
    if (!allow_truncation && !covers(rates))
        throw GridError("time grid truncates the amplitude: t_max < 8 / min(2 gamma); "
                        "enlarge t_max or pass the truncation override");
}

TimeGrid TimeGrid::default_for(const DecayRates& rates) {
    const double t_max = 10.0 / (2.0 * rates.min_rate());
    return TimeGrid(t_max, rates.photon_count() == 2 ? 1024 : 256);
}

double CascadeAmplitude::norm_squared() const {
    return values.squaredNorm() * grid.dt * grid.dt;
}

bool CascadeAmplitude::is_real() const {
    return values.imag().isZero(0.0);
}

CascadeAmplitude build_cascade_amplitude(const DecayRates& rates, const TimeGrid& grid,
                                         bool allow_truncation) {
    grid.validate(rates, allow_truncation);
    const int n = grid.n_points;
    const double ga = rates.gamma_a;
    const double gb = rates.gamma_b;

    MatrixXcd psi = MatrixXcd::Zero(n, n);
    const double amp0 = 2.0 * std::sqrt(ga * gb);
    for (int i = 0; i < n; ++i) {
        const double ta = grid.midpoint(i);
        const double fa = amp0 * std::exp(-ga * ta);
        for (int j = i; j < n; ++j) {
            const double tb = grid.midpoint(j);
            psi(i, j) = fa * std::exp(-gb * (tb - ta));
        }
    }

    const double norm = std::sqrt(psi.squaredNorm()) * grid.dt;
    psi /= norm;
    return CascadeAmplitude{grid, std::move(psi), rates};
}

ReducedState::ReducedState(TimeGrid grid, MatrixXcd matrix)
    : grid_(grid), matrix_(std::move(matrix)) {
    const int n = matrix_.rows();
    if (matrix_.cols() != n)
        throw std::invalid_argument("ReducedState: matrix must be square");
    if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("ReducedState: matrix not Hermitian within 1e-10");
    if (std::abs(trace() - 1.0) > 1e-6)
        throw std::invalid_argument("ReducedState: trace deviates from 1 beyond 1e-6");
}

double ReducedState::trace() const {
    return matrix_.trace().real();
}

const std::vector<double>& ReducedState::spectrum() const {
    if (!spectrum_.empty()) return spectrum_;

    Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(matrix_, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("ReducedState: eigendecomposition failed");

    VectorXd ev = solver.eigenvalues();
    std::vector<double> spec(ev.data(), ev.data() + ev.size());
    std::sort(spec.begin(), spec.end(), std::greater<>());
    for (double& p : spec) {
        if (p < -1e-8)
            throw std::runtime_error("ReducedState: eigenvalue below the -1e-8 noise floor");
        p = std::max(p, 0.0);
    }
    const double total = std::accumulate(spec.begin(), spec.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-6)
        throw std::runtime_error("ReducedState: eigenvalue sum deviates from 1");
    for (double& p : spec) p /= total;

    spectrum_ = std::move(spec);
    return spectrum_;
}

ReducedState reduce_to_b(const CascadeAmplitude& amp) {
    if (std::abs(amp.norm_squared() - 1.0) > 1e-6)
        throw std::invalid_argument("reduce_to_b: amplitude not normalized");
    const double w = amp.grid.dt * amp.grid.dt;

    MatrixXcd rho;
    if (amp.is_real()) {
        // Real amplitudes take the much faster real GEMM path.
        MatrixXd re = amp.values.real();
        MatrixXd m = (re.transpose() * re) * w;
        rho = m.cast<Complex>();
    } else {
        rho = (amp.values.transpose() * amp.values.conjugate()) * w;
    }
    rho = ((rho + rho.adjoint()) * 0.5).eval();
    return ReducedState(amp.grid, std::move(rho));
}

double purity(const ReducedState& state) {
    // Tr rho^2 for Hermitian rho is the squared Frobenius norm.
    return state.matrix().squaredNorm();
}

double purity_analytic(const DecayRates& rates) {
    return rates.gamma_a / (rates.gamma_a + rates.gamma_b);
}

double error_analytic(const DecayRates& rates) {
    return rates.gamma_b / (rates.gamma_a + rates.gamma_b);
}

std::vector<double> schmidt_spectrum(const CascadeAmplitude& amp) {
    if (std::abs(amp.norm_squared() - 1.0) > 1e-6)
        throw std::invalid_argument("schmidt_spectrum: amplitude not normalized");

    VectorXd sv;
    if (amp.is_real()) {
        Eigen::BDCSVD<MatrixXd> svd(amp.values.real());
        if (svd.info() != Eigen::Success)
            throw std::runtime_error("schmidt_spectrum: SVD failed");
        sv = svd.singularValues();
    } else {
        Eigen::BDCSVD<MatrixXcd> svd(amp.values);
        if (svd.info() != Eigen::Success)
            throw std::runtime_error("schmidt_spectrum: SVD failed");
        sv = svd.singularValues();
    }

    const double dt = amp.grid.dt;
    std::vector<double> spec(sv.size());
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        const double s = sv(k) * dt;
        spec[k] = s * s;
    }
    // BDCSVD returns descending singular values already.
    return spec;
}

double leading_schmidt_coefficient(const CascadeAmplitude& amp) {
    const int n = amp.grid.n_points;
    const double w = amp.grid.dt * amp.grid.dt;
    const MatrixXcd& psi = amp.values;

    Eigen::VectorXcd v = Eigen::VectorXcd::Constant(n, Complex(1.0 / std::sqrt(double(n)), 0.0));
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        // rho v = dt^2 psi^T (conj(psi) v)
        Eigen::VectorXcd u = (psi.transpose() * (psi.conjugate() * v)) * w;
        const double nrm = u.norm();
        if (nrm == 0.0) return 0.0;
        u /= nrm;
        const double next = ((psi.conjugate() * u).squaredNorm()) * w;
        v.swap(u);
        if (std::abs(next - lambda) < 1e-14) { lambda = next; break; }
        lambda = next;
    }
    return lambda;
}

double NCascadeAmplitude::norm_squared() const {
    double s = 0.0;
    for (const Complex& z : values) s += std::norm(z);
    return s * std::pow(grid.dt, n);
}

NCascadeAmplitude build_n_cascade_amplitude(const DecayRates& rates, const TimeGrid& grid,
                                            bool allow_truncation) {
    const std::size_t nph = rates.photon_count();
    if (nph > 3)
        throw std::invalid_argument("n-photon cascades are limited to n <= 3 "
                                    "(dense grid memory guard)");
    grid.validate(rates, allow_truncation);

    NCascadeAmplitude amp{grid, rates, static_cast<int>(nph), {}};
    const std::size_t n = static_cast<std::size_t>(grid.n_points);

    if (nph == 2) {
        // Same code path as the matrix builder, copied flat.
        CascadeAmplitude two = build_cascade_amplitude(rates, grid, allow_truncation);
        // Eigen stores column-major; copy into row-major flat layout.
        amp.values.resize(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                amp.values[i * n + j] = two.values(i, j);
        return amp;
    }

    const double g1 = rates.rate(0), g2 = rates.rate(1), g3 = rates.rate(2);
    amp.values.assign(n * n * n, Complex(0.0, 0.0));
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t1 = grid.midpoint(int(i));
        const double f1 = std::exp(-g1 * t1);
        for (std::size_t j = i; j < n; ++j) {
            const double t2 = grid.midpoint(int(j));
            const double f2 = f1 * std::exp(-g2 * (t2 - t1));
            for (std::size_t k = j; k < n; ++k) {
                const double t3 = grid.midpoint(int(k));
                const double v = f2 * std::exp(-g3 * (t3 - t2));
                amp.values[(i * n + j) * n + k] = v;
                norm2 += v * v;
            }
        }
    }
    const double scale = 1.0 / (std::sqrt(norm2) * std::pow(grid.dt, 1.5));
    for (Complex& z : amp.values) z *= scale;
    return amp;
}

ReducedState reduce_n_to_axis(const NCascadeAmplitude& amp, int axis) {
    if (axis < 0 || axis >= amp.n)
        throw std::invalid_argument("reduce_n_to_axis: axis out of range");
    const std::size_t n = static_cast<std::size_t>(amp.grid.n_points);

    if (amp.n == 2) {
        MatrixXcd psi(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                psi(i, j) = amp.values[i * n + j];
        CascadeAmplitude two{amp.grid, std::move(psi), amp.rates};
        if (axis == 1) return reduce_to_b(two);
        CascadeAmplitude flipped{amp.grid, two.values.transpose(), amp.rates};
        return reduce_to_b(flipped);
    }

    // Gather kept axis into columns, the other two flattened into rows.
    MatrixXcd r(n * n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                const Complex v = amp.values[(i * n + j) * n + k];
                if (axis == 0)      r(j * n + k, i) = v;
                else if (axis == 1) r(i * n + k, j) = v;
                else                r(i * n + j, k) = v;
            }
    const double w = std::pow(amp.grid.dt, 3);
    MatrixXcd rho = (r.transpose() * r.conjugate()) * w;
    rho = ((rho + rho.adjoint()) * 0.5).eval();
    return ReducedState(amp.grid, std::move(rho));
}

} // namespace tbsim
