#include "motorlab/rollout.hpp"

#include <cmath>
#include <stdexcept>
#include <type_traits>

#include "motorlab/csv.hpp"

namespace motorlab {

int SimConfig::steps() const {
    validate();
    return static_cast<int>(std::llround(t_sim / dt));
}

void SimConfig::validate() const {
    if (!(dt > 0.0) || !(t_sim > 0.0)) throw DomainError("SimConfig: dt and t_sim must be > 0");
    if (plant_substeps < 1) throw DomainError("SimConfig: plant_substeps must be >= 1");
    const double n = t_sim / dt;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n) || std::round(n) < 1.0) {
        throw DomainError("SimConfig: t_sim must be an integer multiple of dt");
    }
}

PlantState advance_plant(const MotorParams& p, const PlantState& x, const VoltageInput& v, double load_torque,
                         const SimConfig& cfg) {
    const double h = cfg.dt / cfg.plant_substeps;
    auto field = [&](const PlantState& s) { return pmsm_derivative(p, s, v, load_torque); };
    PlantState y = x;
    for (int j = 0; j < cfg.plant_substeps; ++j) y = rk4_step(field, y, h);
    return y;
}

namespace {

PlantState jacobian_transpose_times(const Jacobian3& jac, const PlantState& g) {
    return {jac[0][0] * g.i_d + jac[1][0] * g.i_q + jac[2][0] * g.omega_e,
            jac[0][1] * g.i_d + jac[1][1] * g.i_q + jac[2][1] * g.omega_e,
            jac[0][2] * g.i_d + jac[1][2] * g.i_q + jac[2][2] * g.omega_e};
}

/// Reverse pass through one RK4 step; mirrors rk4_step's stage construction.
PlantState rk4_vjp(const MotorParams& p, const PlantState& y, const VoltageInput& v, double load_torque, double h,
                   const PlantState& grad_next, VoltageInput& grad_v) {
    const PlantState k1 = pmsm_derivative(p, y, v, load_torque);
    const PlantState s2 = y + (0.5 * h) * k1;
    const PlantState k2 = pmsm_derivative(p, s2, v, load_torque);
    const PlantState s3 = y + (0.5 * h) * k2;
    const PlantState k3 = pmsm_derivative(p, s3, v, load_torque);
    const PlantState s4 = y + h * k3;

    const double c = h / 6.0;
    PlantState gk4 = c * grad_next;
    PlantState gk3 = (2.0 * c) * grad_next;
    PlantState gk2 = (2.0 * c) * grad_next;
    PlantState gk1 = c * grad_next;
    PlantState grad = grad_next;

    auto through_field = [&](const PlantState& stage, const PlantState& gk) {
        grad_v.v_d += gk.i_d / p.L_d;
        grad_v.v_q += gk.i_q / p.L_q;
        return jacobian_transpose_times(pmsm_state_jacobian(p, stage), gk);
    };

    const PlantState gs4 = through_field(s4, gk4);
    grad += gs4;
    gk3 += h * gs4;
    const PlantState gs3 = through_field(s3, gk3);
    grad += gs3;
    gk2 += (0.5 * h) * gs3;
    const PlantState gs2 = through_field(s2, gk2);
    grad += gs2;
    gk1 += (0.5 * h) * gs2;
    grad += through_field(y, gk1);
    return grad;
}

}  // namespace

PlantState advance_plant_vjp(const MotorParams& p, const PlantState& x, const VoltageInput& v, double load_torque,
                             const SimConfig& cfg, const PlantState& grad_next, VoltageInput& grad_v) {
    const double h = cfg.dt / cfg.plant_substeps;
    if (cfg.plant_substeps == 1) return rk4_vjp(p, x, v, load_torque, h, grad_next, grad_v);

    auto field = [&](const PlantState& s) { return pmsm_derivative(p, s, v, load_torque); };
    std::vector<PlantState> sub(static_cast<std::size_t>(cfg.plant_substeps));
    sub[0] = x;
    for (int j = 1; j < cfg.plant_substeps; ++j) sub[j] = rk4_step(field, sub[j - 1], h);
    PlantState grad = grad_next;
    for (int j = cfg.plant_substeps - 1; j >= 0; --j) grad = rk4_vjp(p, sub[j], v, load_torque, h, grad, grad_v);
    return grad;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    csv::Table t;
    t.header = {"t",     "omega_ref", "i_d",    "i_q",    "omega_e", "v_d",     "v_q",
                "T_L",   "P_elec",    "P_cu",   "P_mech", "T_e",     "i_d_ref", "i_q_ref"};
    const bool refs = !traj.i_d_ref.empty();
    const auto n_states = traj.i_d.size();
    for (std::size_t k = 0; k < n_states; ++k) {
        const bool has_input = k < traj.v_d.size();
        auto in = [&](const std::vector<double>& a) { return has_input ? csv::number(a[k]) : std::string{}; };
        t.rows.push_back({csv::number(traj.t[k]), csv::number(traj.omega_ref[k]), csv::number(traj.i_d[k]),
                          csv::number(traj.i_q[k]), csv::number(traj.omega_e[k]), in(traj.v_d), in(traj.v_q),
                          in(traj.T_L), in(traj.P_elec), csv::number(traj.P_cu[k]), csv::number(traj.P_mech[k]),
                          csv::number(traj.T_e[k]), refs && has_input ? csv::number(traj.i_d_ref[k]) : std::string{},
                          refs && has_input ? csv::number(traj.i_q_ref[k]) : std::string{}});
    }
    csv::write(path, t);
}

ControllerSpec ControllerSpec::zero() { return {}; }

ControllerSpec ControllerSpec::pifoc(const PIGains& gains, CurrentStrategy strategy, const MotorParams& model) {
    ControllerSpec s;
    s.kind = Kind::PiFoc;
    s.gains = gains;
    s.strategy = strategy;
    s.model = model;
    s.id = std::string("pifoc:") + std::string(to_string(strategy)) + (gains.limiters_enabled ? "+limiters" : "");
    return s;
}

ControllerSpec ControllerSpec::rnn_controller(std::shared_ptr<const RnnParams> params, const MotorParams& model,
                                              std::string id) {
    ControllerSpec s;
    s.kind = Kind::Rnn;
    s.rnn = std::move(params);
    s.model = model;
    s.id = std::move(id);
    return s;
}

AnyController ControllerSpec::instantiate(const SimConfig& cfg) const {
    switch (kind) {
        case Kind::Zero:
            return ZeroController{};
        case Kind::PiFoc:
            return PiFocController(gains, strategy, model, cfg.dt);
        case Kind::Rnn:
            return RnnController(rnn, model.V_max);
    }
    throw std::logic_error("ControllerSpec: unknown kind");
}

namespace {

class Recorder {
public:
    Recorder(Trajectory& traj, const MotorParams& p, const SimConfig& cfg, int n) : traj_(traj), p_(p) {
        traj_.dt = cfg.dt;
        traj_.planned_steps = n;
        for (auto* a : {&traj_.t, &traj_.omega_ref, &traj_.i_d, &traj_.i_q, &traj_.omega_e, &traj_.P_cu, &traj_.P_mech,
                        &traj_.T_e}) {
            a->reserve(static_cast<std::size_t>(n) + 1);
        }
        for (auto* a : {&traj_.v_d, &traj_.v_q, &traj_.T_L, &traj_.P_elec}) a->reserve(static_cast<std::size_t>(n));
    }

    void state(double t, double omega_ref, const PlantState& x) {
        traj_.t.push_back(t);
        traj_.omega_ref.push_back(omega_ref);
        traj_.i_d.push_back(x.i_d);
        traj_.i_q.push_back(x.i_q);
        traj_.omega_e.push_back(x.omega_e);
        const auto pw = power_quantities(p_, x, {});
        traj_.P_cu.push_back(pw.copper);
        traj_.P_mech.push_back(pw.mechanical);
        traj_.T_e.push_back(electrical_torque(p_, x));
    }

    void input(const PlantState& x, const VoltageInput& v, double load_torque) {
        traj_.v_d.push_back(v.v_d);
        traj_.v_q.push_back(v.v_q);
        traj_.T_L.push_back(load_torque);
        traj_.P_elec.push_back(v.v_d * x.i_d + v.v_q * x.i_q);
    }

    // Drops an input whose resulting state was not finite.
    void drop_last_input() {
        traj_.v_d.pop_back();
        traj_.v_q.pop_back();
        traj_.T_L.pop_back();
        traj_.P_elec.pop_back();
        if (traj_.i_d_ref.size() > traj_.v_d.size()) {
            traj_.i_d_ref.pop_back();
            traj_.i_q_ref.pop_back();
        }
        traj_.diverged = true;
    }

private:
    Trajectory& traj_;
    const MotorParams& p_;
};

/// Advances the plant; returns false on a non-finite or out-of-bound result.
bool guarded_advance(const MotorParams& p, PlantState& x, const VoltageInput& v, double load_torque,
                     const SimConfig& cfg) {
    if (!std::isfinite(v.v_d) || !std::isfinite(v.v_q)) return false;
    PlantState next;
    try {
        next = advance_plant(p, x, v, load_torque, cfg);
    } catch (const DomainError&) {
        return false;
    }
    if (!next.finite() || next.max_abs() > cfg.divergence_limit) return false;
    x = next;
    return true;
}

template <class Ctrl>
Trajectory run_episode(Ctrl& ctrl, const MotorParams& plant, const ReferenceProfile& reference,
                       const TorqueProfile& torque, const SimConfig& cfg, const PlantState& initial) {
    const int n = cfg.steps();
    Trajectory traj;
    Recorder rec(traj, plant, cfg, n);
    ctrl.reset();
    PlantState x = initial;
    rec.state(0.0, reference_at(reference, 0.0), x);
    for (int k = 0; k < n; ++k) {
        const double t = k * cfg.dt;
        const VoltageInput v = ctrl(reference_at(reference, t), x);
        const double tl = torque_at(torque, t);
        rec.input(x, v, tl);
        if constexpr (std::is_same_v<Ctrl, PiFocController>) {
            traj.i_d_ref.push_back(ctrl.last_references().i_d);
            traj.i_q_ref.push_back(ctrl.last_references().i_q);
        }
        if (!guarded_advance(plant, x, v, tl, cfg)) {
            rec.drop_last_input();
            break;
        }
        const double t_next = (k + 1) * cfg.dt;
        rec.state(t_next, reference_at(reference, t_next), x);
    }
    return traj;
}

}  // namespace

Trajectory simulate(AnyController& controller, const MotorParams& plant, const ReferenceProfile& reference,
                    const TorqueProfile& torque, const SimConfig& cfg, const PlantState& initial) {
    return std::visit([&](auto& ctrl) { return run_episode(ctrl, plant, reference, torque, cfg, initial); },
                      controller);
}

Trajectory simulate(const ControllerSpec& spec, const MotorParams& plant, const ReferenceProfile& reference,
                    const TorqueProfile& torque, const SimConfig& cfg, const PlantState& initial) {
    auto ctrl = spec.instantiate(cfg);
    return simulate(ctrl, plant, reference, torque, cfg, initial);
}

namespace {

int checkpoint_stride(int n) { return std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))))); }

}  // namespace

RnnRollout simulate_rnn(const RnnParams& rnn, const Eigen::MatrixXd& A, const MotorParams& plant,
                        const ReferenceProfile& reference, const TorqueProfile& torque, const SimConfig& cfg,
                        const PlantState& initial, TapeMode mode) {
    const int n = cfg.steps();
    RnnRollout out;
    out.mode = mode;
    out.torque = torque;
    out.stride = mode == TapeMode::Full ? 1 : checkpoint_stride(n);
    out.hidden = RowMatrix::Zero(n / out.stride + 1, rnn.hidden);

    Recorder rec(out.traj, plant, cfg, n);
    RnnState h = RnnState::zeros(rnn.hidden);
    PlantState x = initial;
    rec.state(0.0, reference_at(reference, 0.0), x);
    for (int k = 0; k < n; ++k) {
        const double t = k * cfg.dt;
        auto step = rnn_step(rnn, A, h, rnn_input(reference_at(reference, t), x), plant.V_max);
        const double tl = torque_at(torque, t);
        rec.input(x, step.v, tl);
        if (!guarded_advance(plant, x, step.v, tl, cfg)) {
            rec.drop_last_input();
            break;
        }
        h = std::move(step.next);
        if ((k + 1) % out.stride == 0) out.hidden.row((k + 1) / out.stride) = h.h.transpose();
        const double t_next = (k + 1) * cfg.dt;
        rec.state(t_next, reference_at(reference, t_next), x);
    }
    return out;
}

TrajectorySeeds TrajectorySeeds::zeros(const Trajectory& traj) {
    TrajectorySeeds s;
    s.d_state.assign(traj.i_d.size(), PlantState{});
    s.d_voltage.assign(traj.v_d.size(), VoltageInput{});
    return s;
}

GradientVector backward(const RnnParams& rnn, const Eigen::MatrixXd& A, const MotorParams& plant,
                        const RnnRollout& rollout, const TrajectorySeeds& seeds, const SimConfig& cfg) {
    const Trajectory& traj = rollout.traj;
    const int n = traj.steps();
    const Eigen::Index nh = rnn.hidden;
    if (seeds.d_state.size() != static_cast<std::size_t>(n) + 1 ||
        seeds.d_voltage.size() != static_cast<std::size_t>(n)) {
        throw std::logic_error("backward: seed layout does not match trajectory");
    }
    if (rollout.hidden.cols() != nh || A.rows() != nh || A.cols() != nh || rollout.stride < 1 ||
        rollout.hidden.rows() < n / rollout.stride + 1) {
        throw std::logic_error("backward: tape does not match RNN parameter layout");
    }

    Eigen::MatrixXd gA = Eigen::MatrixXd::Zero(nh, nh);
    RowMatrix gB = RowMatrix::Zero(nh, kRnnInputs);
    RowMatrix gC = RowMatrix::Zero(2, nh);
    Eigen::VectorXd gb1 = Eigen::VectorXd::Zero(nh);
    Eigen::Vector2d gb2 = Eigen::Vector2d::Zero();

    PlantState lam_x = seeds.d_state[static_cast<std::size_t>(n)];
    Eigen::VectorXd lam_h = Eigen::VectorXd::Zero(nh);  // dL/dh_{k+1}
    Eigen::VectorXd g_a(nh);

    // Segment buffer: local[j] = h at step seg_begin + j.
    const int stride = rollout.stride;
    RowMatrix local(stride == 1 ? 0 : stride + 1, nh);

    for (int seg_end = n; seg_end > 0;) {
        // Full tape: one segment over the whole episode, read straight from the tape.
        const bool full = stride == 1;
        const int seg_begin = full ? 0 : ((seg_end - 1) / stride) * stride;
        if (!full) {
            local.row(0) = rollout.hidden.row(seg_begin / stride);
            RnnState h{local.row(0).transpose()};
            for (int k = seg_begin; k < seg_end; ++k) {
                auto step = rnn_step(rnn, A, h, rnn_input(traj.omega_ref[k], traj.state(k)), plant.V_max);
                h = std::move(step.next);
                local.row(k - seg_begin + 1) = h.h.transpose();
            }
        }
        const RowMatrix& buf = full ? rollout.hidden : local;

        for (int k = seg_end - 1; k >= seg_begin; --k) {
            const auto h_next = buf.row(k - seg_begin + 1).transpose();
            const auto h_prev = buf.row(k - seg_begin).transpose();
            const PlantState x = traj.state(k);
            const RnnInput z = rnn_input(traj.omega_ref[k], x);

            VoltageInput g_v = seeds.d_voltage[static_cast<std::size_t>(k)];
            lam_x = advance_plant_vjp(plant, x, traj.voltage(k), traj.T_L[k], cfg, lam_x, g_v);
            lam_x += seeds.d_state[static_cast<std::size_t>(k)];

            Eigen::Vector2d w = rnn.C * h_next + rnn.b2;
            w *= plant.V_max;
            const auto jc = clamp_voltage_jacobian(w, plant.V_max);
            const Eigen::Vector2d g_u{plant.V_max * (jc[0] * g_v.v_d + jc[2] * g_v.v_q),
                                      plant.V_max * (jc[1] * g_v.v_d + jc[3] * g_v.v_q)};
            gC.noalias() += g_u * h_next.transpose();
            gb2 += g_u;
            lam_h.noalias() += rnn.C.transpose() * g_u;

            for (Eigen::Index i = 0; i < nh; ++i) g_a[i] = h_next[i] > 0.0 ? lam_h[i] : 0.0;
            gA.noalias() += g_a * h_prev.transpose();
            gB.noalias() += g_a * z.transpose();
            gb1 += g_a;
            lam_h.noalias() = A.transpose() * g_a;

            const Eigen::Vector4d g_z = rnn.B.transpose() * g_a;
            lam_x.omega_e += g_z[1];
            lam_x.i_d += g_z[2];
            lam_x.i_q += g_z[3];
        }
        seg_end = seg_begin;
    }

    RnnParams grad = RnnParams::zeros(rnn.hidden, rnn.beta, rnn.gamma);
    grad.M = effective_A_adjoint(rnn, gA);
    grad.B = gB;
    grad.C = gC;
    grad.b1 = gb1;
    grad.b2 = gb2;
    return grad.to_flat();
}

}  // namespace motorlab
