#include "motorlab/loss.hpp"

#include <algorithm>
#include <cmath>

namespace motorlab {

LossTerms LossTerms::scheduled(int epoch, int warmup_epochs) {
    LossTerms t;
    t.copper = epoch > warmup_epochs;
    return t;
}

std::string LossTerms::describe() const {
    std::string out;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!out.empty()) out += '+';
        out += name;
    };
    add(speed, "L_s");
    add(overshoot, "L_o");
    add(final_value, "L_f");
    add(copper, "L_c");
    return out;
}

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

double speed_loss(const Trajectory& traj, const LossFloors& floors, TrajectorySeeds* seeds, double scale) {
    const int n_states = static_cast<int>(traj.omega_e.size());
    const double norm = 1.0 / traj.planned_steps;
    double sum = 0.0;
    for (int k = 1; k < n_states; ++k) {
        const double denom = std::max(traj.omega_ref[k], floors.omega);
        const double err = traj.omega_ref[k] - traj.omega_e[k];
        sum += std::abs(err) / denom;
        if (seeds) seeds->d_state[k].omega_e += -scale * norm * sign(err) / denom;
    }
    return sum * norm;
}

double copper_loss(const Trajectory& traj, double resistance, const LossFloors& floors, TrajectorySeeds* seeds,
                   double scale) {
    const int n = traj.steps();
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const double id = traj.i_d[k];
        const double iq = traj.i_q[k];
        const double vd = traj.v_d[k];
        const double vq = traj.v_q[k];
        const double cu = resistance * (id * id + iq * iq);
        const double p_in = vd * id + vq * iq;
        if (p_in > floors.power) {
            sum += cu / p_in * traj.dt;
            if (seeds) {
                const double s = scale * traj.dt;
                const double inv = 1.0 / p_in;
                const double ratio = cu * inv * inv;
                seeds->d_state[k].i_d += s * (2.0 * resistance * id * inv - ratio * vd);
                seeds->d_state[k].i_q += s * (2.0 * resistance * iq * inv - ratio * vq);
                seeds->d_voltage[k].v_d += s * (-ratio * id);
                seeds->d_voltage[k].v_q += s * (-ratio * iq);
            }
        } else {
            sum += cu / floors.power * traj.dt;
            if (seeds) {
                const double s = scale * traj.dt / floors.power;
                seeds->d_state[k].i_d += s * 2.0 * resistance * id;
                seeds->d_state[k].i_q += s * 2.0 * resistance * iq;
            }
        }
    }
    return sum;
}

double overshoot_loss(const Trajectory& traj, const LossFloors& floors, TrajectorySeeds* seeds, double scale) {
    const int n_states = static_cast<int>(traj.omega_e.size());
    double best = 0.0;
    int arg = -1;
    double arg_denom = 1.0;
    for (int k = 1; k < n_states; ++k) {
        const double denom = std::max(traj.omega_ref[k], floors.omega);
        const double excess = (traj.omega_e[k] - traj.omega_ref[k]) / denom;
        if (excess > best) {
            best = excess;
            arg = k;
            arg_denom = denom;
        }
    }
    if (seeds && arg >= 0) seeds->d_state[arg].omega_e += scale / arg_denom;
    return best;
}

double final_value_loss(const Trajectory& traj, const LossFloors& floors, TrajectorySeeds* seeds, double scale) {
    const int k = static_cast<int>(traj.omega_e.size()) - 1;
    const double denom = std::max(traj.omega_ref[k], floors.omega);
    const double err = traj.omega_ref[k] - traj.omega_e[k];
    if (seeds) seeds->d_state[k].omega_e += -scale * sign(err) / denom;
    return std::abs(err) / denom;
}

namespace {

template <class Term>
double batch_mean(const TrajectoryBatch& batch, Term&& term) {
    if (batch.empty()) return 0.0;
    double sum = 0.0;
    for (const auto* traj : batch) sum += term(*traj);
    return sum / static_cast<double>(batch.size());
}

}  // namespace

double loss_speed(const TrajectoryBatch& batch, const LossFloors& floors) {
    return batch_mean(batch, [&](const Trajectory& t) { return speed_loss(t, floors); });
}

double loss_copper(const TrajectoryBatch& batch, double resistance, const LossFloors& floors) {
    return batch_mean(batch, [&](const Trajectory& t) { return copper_loss(t, resistance, floors); });
}

double loss_overshoot(const TrajectoryBatch& batch, const LossFloors& floors) {
    return batch_mean(batch, [&](const Trajectory& t) { return overshoot_loss(t, floors); });
}

double loss_final(const TrajectoryBatch& batch, const LossFloors& floors) {
    return batch_mean(batch, [&](const Trajectory& t) { return final_value_loss(t, floors); });
}

LossBreakdown evaluate_losses(const TrajectoryBatch& batch, double resistance, const LossTerms& active,
                              const LossFloors& floors, std::vector<TrajectorySeeds>* seeds) {
    LossBreakdown out;
    out.active = active;
    if (batch.empty()) return out;
    const double w = 1.0 / static_cast<double>(batch.size());
    if (seeds) {
        seeds->clear();
        seeds->reserve(batch.size());
    }
    for (const auto* traj : batch) {
        TrajectorySeeds* s = nullptr;
        if (seeds) {
            seeds->push_back(TrajectorySeeds::zeros(*traj));
            s = &seeds->back();
        }
        out.speed += w * speed_loss(*traj, floors, active.speed ? s : nullptr, w);
        out.copper += w * copper_loss(*traj, resistance, floors, active.copper ? s : nullptr, w);
        out.overshoot += w * overshoot_loss(*traj, floors, active.overshoot ? s : nullptr, w);
        out.final_value += w * final_value_loss(*traj, floors, active.final_value ? s : nullptr, w);
    }
    if (active.speed) out.total += out.speed;
    if (active.overshoot) out.total += out.overshoot;
    if (active.final_value) out.total += out.final_value;
    if (active.copper) out.total += out.copper;
    return out;
}

}  // namespace motorlab
