#ifndef TBSIM_CASCADE_HPP
#define TBSIM_CASCADE_HPP

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <vector>

namespace tbsim {

using Complex = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using MatrixXd = Eigen::MatrixXd;
using VectorXd = Eigen::VectorXd;

struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Amplitude decay rates of the cascade transitions, in inverse time units.
// Convention: these are amplitude rates, so the intensity of a transition
// decays as exp(-2*gamma*t) and the intensity lifetime is 1/(2*gamma).
// Quoted emitter lifetimes tau are mapped to gamma = 1/tau; the swapping
// error depends only on the rate ratio, which is the same either way.
struct DecayRates {
    double gamma_a;
    double gamma_b;
    std::vector<double> extra; // third and further transitions, if any

    DecayRates(double ga, double gb, std::vector<double> more = {});

    std::size_t photon_count() const { return 2 + extra.size(); }
    double rate(std::size_t k) const;
    double min_rate() const;
};

// Uniform time axis [0, t_max] with n_points cells; amplitudes are sampled
// at cell midpoints (i + 1/2) * dt.
struct TimeGrid {
    double t_max;
    int n_points;
    double dt;

    TimeGrid(double t_max_, int n_points_);

    double midpoint(int i) const { return (i + 0.5) * dt; }

    // Truncation check: t_max must cover at least 8 / min(2*gamma), i.e.
    // four intensity lifetimes of the slowest transition.
    bool covers(const DecayRates& rates) const;
    void validate(const DecayRates& rates, bool allow_truncation = false) const;

    // t_max = 10 / min(2*gamma), n_points 1024 (2-photon) or 256 (3-photon).
    static TimeGrid default_for(const DecayRates& rates);
};

// Discretized two-photon amplitude psi[i][j] ~ psi(t_A = midpoint(i),
// t_B = midpoint(j)), normalized so that sum |psi|^2 dt^2 = 1 and zero
// below the diagonal (the first photon precedes the second).
struct CascadeAmplitude {
    TimeGrid grid;
    MatrixXcd values;
    DecayRates rates;

    double norm_squared() const; // sum |psi|^2 dt^2
    bool is_real() const;
};

// Reduced density operator of the second photon on the t_B axis. The
// matrix carries the dt^2 quadrature weight so that trace(matrix) = 1.
// The eigenvalue spectrum is computed on first use and cached; purity
// only needs the Frobenius norm and never triggers the decomposition.
class ReducedState {
public:
    ReducedState(TimeGrid grid, MatrixXcd matrix);

    const TimeGrid& grid() const { return grid_; }
    const MatrixXcd& matrix() const { return matrix_; }

    // Descending eigenvalues, clipped of negatives above -1e-8 and
    // renormalized to unit sum.
    const std::vector<double>& spectrum() const;

    double trace() const;

private:
    TimeGrid grid_;
    MatrixXcd matrix_;
    mutable std::vector<double> spectrum_; // lazy
};

// n-photon amplitude on an n-fold product grid, flat storage with the
// first axis slowest. Only n = 2 and n = 3 are supported.
struct NCascadeAmplitude {
    TimeGrid grid;
    DecayRates rates;
    int n;
    std::vector<Complex> values;

    std::size_t index(std::size_t i, std::size_t j, std::size_t k = 0) const {
        return n == 2 ? i * grid.n_points + j
                      : (i * grid.n_points + j) * grid.n_points + k;
    }
    double norm_squared() const;
};

// psi(tA, tB) = 2 sqrt(Ga Gb) exp(-Ga tA) exp(-Gb (tB - tA)) for tB >= tA,
// sampled at midpoints and renormalized on the grid.
CascadeAmplitude build_cascade_amplitude(const DecayRates& rates, const TimeGrid& grid,
                                         bool allow_truncation = false);

// rho_B[j][j'] = sum_i psi[i][j] conj(psi[i][j']) dt^2.
ReducedState reduce_to_b(const CascadeAmplitude& amp);

// Tr rho^2 = sum_i p_i^2, evaluated as the squared Frobenius norm.
double purity(const ReducedState& state);

// Closed forms for the exponential cascade: Tr rho_B^2 = Ga / (Ga + Gb),
// and its deficit Gb / (Ga + Gb) which bounds the swapping error.
double purity_analytic(const DecayRates& rates);
double error_analytic(const DecayRates& rates);

// Squared singular values of psi * dt, descending. Equals the eigenvalue
// spectrum of the reduced state.
std::vector<double> schmidt_spectrum(const CascadeAmplitude& amp);

// Leading Schmidt coefficient by power iteration on the reduced operator,
// without forming it. Cheap enough for wide parameter scans.
double leading_schmidt_coefficient(const CascadeAmplitude& amp);

NCascadeAmplitude build_n_cascade_amplitude(const DecayRates& rates, const TimeGrid& grid,
                                            bool allow_truncation = false);

// Trace out all photons except `axis` (0-based emission order).
ReducedState reduce_n_to_axis(const NCascadeAmplitude& amp, int axis);

} // namespace tbsim

#endif
