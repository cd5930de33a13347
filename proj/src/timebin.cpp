#include "tbsim/timebin.hpp"

#include <cmath>

namespace tbsim {

namespace {

Complex early_amp(const PumpConfig& pump) {
    return Complex(std::sqrt(pump.p1), 0.0);
}

Complex late_amp(const PumpConfig& pump) {
    return std::polar(std::sqrt((1.0 - pump.p1) * pump.p2), pump.phi_p);
}

double balance(const Complex& ae, const Complex& al) {
    const double n2 = std::norm(ae) + std::norm(al);
    if (!(n2 > 0.0))
        throw std::invalid_argument("bin_balance: zero emission probability");
    return 2.0 * std::abs(ae) * std::abs(al) / n2;
}

} // namespace

void PumpConfig::validate() const {
    if (p1 < 0.0 || p1 > 1.0 || p2 < 0.0 || p2 > 1.0)
        throw std::invalid_argument("PumpConfig: p1 and p2 must lie in [0,1]");
    if (!(tau_bin > 0.0))
        throw std::invalid_argument("PumpConfig: tau_bin must be positive");
}

double TimeBinPairState::emission_probability() const {
    // closed form rather than squared moduli: exact where p1 + (1-p1) p2
    // is exact, e.g. 1 for (p1=1/2, p2=1)
    return pump.p1 + (1.0 - pump.p1) * pump.p2;
}

bool TimeBinPairState::bins_overlap() const {
    return envelope && pump.tau_bin < envelope->grid.t_max;
}

double TimeBinNState::emission_probability() const {
    return pump.p1 + (1.0 - pump.p1) * pump.p2;
}

TimeBinPairState make_pair_state(const PumpConfig& pump,
                                 std::shared_ptr<const CascadeAmplitude> envelope) {
    pump.validate();
    return TimeBinPairState{early_amp(pump), late_amp(pump), std::move(envelope), pump};
}

TimeBinNState make_n_state(const PumpConfig& pump,
                           std::shared_ptr<const NCascadeAmplitude> envelope) {
    pump.validate();
    if (!envelope)
        throw std::invalid_argument("make_n_state: envelope required");
    if (envelope->n < 2 || envelope->n > 3)
        throw std::invalid_argument("make_n_state: only n = 2 or 3 supported");
    return TimeBinNState{envelope->n, early_amp(pump), late_amp(pump), std::move(envelope), pump};
}

double bin_balance(const TimeBinPairState& state) {
    return balance(state.amp_early, state.amp_late);
}

double bin_balance(const TimeBinNState& state) {
    return balance(state.amp_early, state.amp_late);
}

} // namespace tbsim
