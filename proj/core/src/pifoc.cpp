#include "motorlab/pifoc.hpp"

#include <algorithm>
#include <cmath>

namespace motorlab {

void PIGains::validate() const {
    auto check = [](bool ok, const char* what) {
        if (!ok) throw DomainError(std::string("invalid PI gains: ") + what);
    };
    check(kp_w > 0 && kp_d > 0 && kp_q > 0, "proportional gains must be > 0");
    check(Ti_w > 0 && Ti_d > 0 && Ti_q > 0, "integral times must be > 0");
    check(s_w_max >= s_w_min && s_id_max >= s_id_min && s_iq_max >= s_iq_min, "anti-windup max < min");
    check(id_ref_max >= id_ref_min && iq_ref_max >= iq_ref_min, "reference limit max < min");
}

PIGains pi_gains_from_config(const KeyValueConfig& cfg, PIGains g) {
    g.kp_w = cfg.get_double("kp_w", g.kp_w);
    g.Ti_w = cfg.get_double("Ti_w", g.Ti_w);
    g.kp_d = cfg.get_double("kp_d", g.kp_d);
    g.Ti_d = cfg.get_double("Ti_d", g.Ti_d);
    g.kp_q = cfg.get_double("kp_q", g.kp_q);
    g.Ti_q = cfg.get_double("Ti_q", g.Ti_q);
    g.s_w_max = cfg.get_double("s_w_max", g.s_w_max);
    g.s_w_min = cfg.get_double("s_w_min", g.s_w_min);
    g.s_id_max = cfg.get_double("s_id_max", g.s_id_max);
    g.s_id_min = cfg.get_double("s_id_min", g.s_id_min);
    g.s_iq_max = cfg.get_double("s_iq_max", g.s_iq_max);
    g.s_iq_min = cfg.get_double("s_iq_min", g.s_iq_min);
    g.id_ref_max = cfg.get_double("id_ref_max", g.id_ref_max);
    g.id_ref_min = cfg.get_double("id_ref_min", g.id_ref_min);
    g.iq_ref_max = cfg.get_double("iq_ref_max", g.iq_ref_max);
    g.iq_ref_min = cfg.get_double("iq_ref_min", g.iq_ref_min);
    g.limiters_enabled = cfg.get_bool("limiters", g.limiters_enabled);
    try {
        g.validate();
    } catch (const DomainError& e) {
        throw ConfigError("", e.what());
    }
    return g;
}

std::string_view to_string(CurrentStrategy s) {
    return s == CurrentStrategy::MaxCurrent ? "mc" : "mtpa";
}

VoltageInput clamp_voltage(const VoltageInput& v, double v_max) {
    const double n = v.norm();
    if (n <= v_max) return v;
    const double scale = v_max / n;
    return {v.v_d * scale, v.v_q * scale};
}

double max_current_d_reference(double iq_ref, double i_max) {
    return -std::sqrt(std::max(i_max * i_max - iq_ref * iq_ref, 0.0));
}

double mtpa_d_reference(const MotorParams& p, double iq_ref) {
    const double saliency = p.L_q - p.L_d;
    if (saliency == 0.0) throw StrategyError("MTPA undefined for L_d == L_q (no saliency)");
    const double a = p.Phi / (2.0 * saliency);
    // For L_q < L_d the torque-maximising root takes the other sign of the square root.
    const double root = std::sqrt(a * a + iq_ref * iq_ref);
    return saliency > 0.0 ? a - root : a + root;
}

CurrentReferences pifoc_current_references(const PIGains& g, CurrentStrategy strategy, const MotorParams& p,
                                           const PIState& pi, const PlantState& s, double omega_ref) {
    CurrentReferences refs;
    refs.i_q = g.kp_w * (omega_ref - s.omega_e) + g.ki_w() * pi.s_w;
    if (g.limiters_enabled) refs.i_q = std::clamp(refs.i_q, g.iq_ref_min, g.iq_ref_max);

    refs.i_d = strategy == CurrentStrategy::MaxCurrent ? max_current_d_reference(refs.i_q, p.I_max)
                                                       : mtpa_d_reference(p, refs.i_q);
    if (g.limiters_enabled) refs.i_d = std::clamp(refs.i_d, g.id_ref_min, g.id_ref_max);
    return refs;
}

VoltageInput pifoc_current_loop(const PIGains& g, const MotorParams& p, const PIState& pi, const PlantState& s,
                                const CurrentReferences& refs) {
    VoltageInput v;
    v.v_d = g.kp_d * (refs.i_d - s.i_d) + g.ki_d() * pi.s_id - p.L_q * s.i_q * s.omega_e;
    v.v_q = g.kp_q * (refs.i_q - s.i_q) + g.ki_q() * pi.s_iq + p.Phi * s.omega_e + p.L_d * s.i_d * s.omega_e;
    return v;
}

PifocStepResult pifoc_step(const PIGains& g, CurrentStrategy strategy, const MotorParams& p, const PIState& pi,
                           const PlantState& s, double omega_ref, double dt) {
    if (!(dt > 0.0)) throw DomainError("pifoc_step: dt must be > 0");
    PifocStepResult out;
    out.refs = pifoc_current_references(g, strategy, p, pi, s, omega_ref);
    out.v = clamp_voltage(pifoc_current_loop(g, p, pi, s, out.refs), p.V_max);

    out.next.s_id = pi.s_id + dt * (out.refs.i_d - s.i_d);
    out.next.s_iq = pi.s_iq + dt * (out.refs.i_q - s.i_q);
    out.next.s_w = pi.s_w + dt * (omega_ref - s.omega_e);
    if (g.limiters_enabled) {
        out.next.s_id = std::clamp(out.next.s_id, g.s_id_min, g.s_id_max);
        out.next.s_iq = std::clamp(out.next.s_iq, g.s_iq_min, g.s_iq_max);
        out.next.s_w = std::clamp(out.next.s_w, g.s_w_min, g.s_w_max);
    }
    return out;
}

PiFocController::PiFocController(PIGains gains, CurrentStrategy strategy, MotorParams model, double dt)
    : gains_(gains), strategy_(strategy), model_(model), dt_(dt) {
    gains_.validate();
    if (strategy_ == CurrentStrategy::Mtpa && model_.L_d == model_.L_q) {
        throw StrategyError("MTPA undefined for L_d == L_q (no saliency)");
    }
}

VoltageInput PiFocController::operator()(double omega_ref, const PlantState& plant) {
    const auto r = pifoc_step(gains_, strategy_, model_, state_, plant, omega_ref, dt_);
    state_ = r.next;
    refs_ = r.refs;
    return r.v;
}

}  // namespace motorlab
