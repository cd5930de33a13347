#include "tbsim/gating.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tbsim {

DetectionWindow::DetectionWindow(double start_, double end_) : start(start_), end(end_) {
    if (!(start >= 0.0) || !(end > start))
        throw std::invalid_argument("DetectionWindow: need end > start >= 0");
}

int DetectionWindow::first_cell(const TimeGrid& grid) const {
    return std::clamp(int(std::floor(start / grid.dt)), 0, grid.n_points);
}

int DetectionWindow::last_cell(const TimeGrid& grid) const {
    return std::clamp(int(std::ceil(end / grid.dt)), 0, grid.n_points);
}

namespace {

// Second-order window mass: the ordering edge covers only half of each
// diagonal cell, so those samples enter the quadrature at half weight. The
// raw squared norm keeps them at full weight, which would bias linear
// probabilities by O(dt) even though it cancels in normalized ratios of
// reduced-state quantities.
double edge_corrected_mass(const MatrixXcd& values, const TimeGrid& grid, int a0, int a1,
                           int b0, int b1) {
    double mass = 0.0;
    for (int j = b0; j < b1; ++j)
        for (int i = a0; i < std::min(a1, j + 1); ++i)
            mass += std::norm(values(i, j)) * (i == j ? 0.5 : 1.0);
    return mass * grid.dt * grid.dt;
}

} // namespace

GatingResult apply_windows(const CascadeAmplitude& amp, const DetectionWindow& win_a,
                           const DetectionWindow& win_b) {
    const TimeGrid& grid = amp.grid;
    const int a0 = win_a.first_cell(grid), a1 = win_a.last_cell(grid);
    const int b0 = win_b.first_cell(grid), b1 = win_b.last_cell(grid);

    MatrixXcd gated = MatrixXcd::Zero(grid.n_points, grid.n_points);
    double mass = 0.0;
    if (a1 > a0 && b1 > b0) {
        gated.block(a0, b0, a1 - a0, b1 - b0) = amp.values.block(a0, b0, a1 - a0, b1 - b0);
        mass = edge_corrected_mass(amp.values, grid, a0, a1, b0, b1) /
               edge_corrected_mass(amp.values, grid, 0, grid.n_points, 0, grid.n_points);
    }

    GatingResult result;
    result.probability = mass;
    if (gated.squaredNorm() > 0.0) {
        gated /= std::sqrt(gated.squaredNorm()) * grid.dt;
        result.amplitude = CascadeAmplitude{grid, std::move(gated), amp.rates};
    }
    return result;
}

std::vector<GatingScanRow> gating_tradeoff_scan(const CascadeAmplitude& amp,
                                                const std::vector<double>& t1_values,
                                                const std::vector<double>& t2_values,
                                                const std::vector<double>& delta_t_values) {
    std::vector<GatingScanRow> rows;
    for (double t1 : t1_values)
        for (double t2 : t2_values)
            for (double dT : delta_t_values) {
                GatingResult g = apply_windows(amp, DetectionWindow(0.0, t1),
                                               DetectionWindow(t2, t2 + dT));
                GatingScanRow row{t1, t2, dT, g.probability, 0.0};
                if (g.amplitude) row.purity = purity(reduce_to_b(*g.amplitude));
                rows.push_back(row);
            }
    return rows;
}

void write_scan_csv(std::ostream& out, const std::vector<GatingScanRow>& rows) {
    out << "t1,t2,delta_t,post_selection_probability,purity\n";
    char buf[192];
    for (const GatingScanRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t1, r.t2,
                      r.delta_t, r.probability, r.purity);
        out << buf;
    }
}

} // namespace tbsim
