#include "motorlab/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace motorlab {

std::optional<double> settling_time(const Trajectory& traj, double omega_final, double band) {
    if (traj.diverged || traj.omega_e.empty() || !(omega_final > 0.0)) return std::nullopt;
    const int n = static_cast<int>(traj.omega_e.size());
    auto rel = [&](int k) { return (traj.omega_e[k] - omega_final) / omega_final; };

    int last_out = -1;
    for (int k = n - 1; k >= 0; --k) {
        if (std::abs(rel(k)) > band) {
            last_out = k;
            break;
        }
    }
    if (last_out < 0) return traj.t.front();
    if (last_out == n - 1) return std::nullopt;

    const double e0 = rel(last_out);
    const double e1 = rel(last_out + 1);
    const double edge = e0 > 0.0 ? band : -band;
    const double frac = std::clamp((e0 - edge) / (e0 - e1), 0.0, 1.0);
    return traj.t[last_out] + frac * (traj.t[last_out + 1] - traj.t[last_out]);
}

Efficiency efficiency(const Trajectory& traj) {
    const int n = traj.steps();
    double e_in = 0.0;
    double e_out = 0.0;
    for (int k = 0; k < n; ++k) {
        const double p0 = traj.v_d[k] * traj.i_d[k] + traj.v_q[k] * traj.i_q[k];
        const double p1 = traj.v_d[k] * traj.i_d[k + 1] + traj.v_q[k] * traj.i_q[k + 1];
        e_in += 0.5 * (p0 + p1) * traj.dt;
        e_out += 0.5 * (traj.P_mech[k] + traj.P_mech[k + 1]) * traj.dt;
    }
    if (!(e_in > 0.0)) return {0.0, false};
    return {e_out / e_in, true};
}

ResponseMetrics response_metrics(const Trajectory& traj, double omega_final) {
    ResponseMetrics m;
    m.diverged = traj.diverged;
    m.settling_time_2pct = settling_time_2pct(traj, omega_final);
    double peak = -std::numeric_limits<double>::infinity();
    for (double w : traj.omega_e) peak = std::max(peak, w);
    m.overshoot_rel = std::max(peak - omega_final, 0.0) / omega_final;
    m.final_error_rel = std::abs(traj.omega_e.back() - omega_final) / omega_final;
    const auto eff = efficiency(traj);
    m.efficiency = eff.value;
    m.efficiency_valid = eff.valid;
    m.valid = m.settled() && eff.valid && eff.value >= 0.0 && eff.value <= 1.0 && !m.diverged;
    return m;
}

}  // namespace motorlab
