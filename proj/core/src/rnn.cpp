#include "motorlab/rnn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "motorlab/pifoc.hpp"
#include "motorlab/random.hpp"

namespace motorlab {

RnnParams RnnParams::zeros(int hidden, double beta, double gamma) {
    if (hidden < 1) throw DomainError("RNN hidden size must be >= 1");
    RnnParams p;
    p.hidden = hidden;
    p.beta = beta;
    p.gamma = gamma;
    p.M = RowMatrix::Zero(hidden, hidden);
    p.B = RowMatrix::Zero(hidden, kRnnInputs);
    p.C = RowMatrix::Zero(2, hidden);
    p.b1 = Eigen::VectorXd::Zero(hidden);
    p.b2 = Eigen::Vector2d::Zero();
    return p;
}

Eigen::Index RnnParams::parameter_count() const {
    const Eigen::Index n = hidden;
    return n * n + n * kRnnInputs + 2 * n + n + 2;
}

ParamVector RnnParams::to_flat() const {
    ParamVector flat(parameter_count());
    Eigen::Index o = 0;
    auto put = [&](const double* data, Eigen::Index size) {
        for (Eigen::Index i = 0; i < size; ++i) flat[o + i] = data[i];
        o += size;
    };
    put(M.data(), M.size());
    put(B.data(), B.size());
    put(C.data(), C.size());
    put(b1.data(), b1.size());
    put(b2.data(), b2.size());
    return flat;
}

void RnnParams::assign_flat(const ParamVector& flat) {
    if (flat.size() != parameter_count()) throw DomainError("RnnParams::assign_flat: size mismatch");
    Eigen::Index o = 0;
    auto take = [&](double* data, Eigen::Index size) {
        for (Eigen::Index i = 0; i < size; ++i) data[i] = flat[o + i];
        o += size;
    };
    take(M.data(), M.size());
    take(B.data(), B.size());
    take(C.data(), C.size());
    take(b1.data(), b1.size());
    take(b2.data(), b2.size());
}

void RnnParams::validate() const {
    if (hidden < 1) throw DomainError("RNN hidden size must be >= 1");
    if (M.rows() != hidden || M.cols() != hidden || B.rows() != hidden || B.cols() != kRnnInputs ||
        C.rows() != 2 || C.cols() != hidden || b1.size() != hidden) {
        throw DomainError("RNN parameter shapes do not match hidden size");
    }
    if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("RNN beta must lie in [0, 1]");
    if (!(gamma > 0.0)) throw DomainError("RNN gamma must be > 0");
    if (!M.allFinite() || !B.allFinite() || !C.allFinite() || !b1.allFinite() || !b2.allFinite()) {
        throw DomainError("RNN parameters contain non-finite entries");
    }
}

Eigen::MatrixXd effective_A(const RnnParams& rnn) {
    // (1-b)(M+M^T) + b(M-M^T) collapses to M + (1-2b) M^T; this form is exact at b = 0, 1/2, 1.
    const double w = 1.0 - 2.0 * rnn.beta;
    Eigen::MatrixXd A = rnn.M + w * rnn.M.transpose();
    A.diagonal().array() -= rnn.gamma;
    return A;
}

RowMatrix effective_A_adjoint(const RnnParams& rnn, const Eigen::MatrixXd& grad_A) {
    const double w = 1.0 - 2.0 * rnn.beta;
    return grad_A + w * grad_A.transpose();
}

RnnParams init_rnn(std::uint64_t seed, int hidden, double beta, double gamma) {
    RnnParams p = RnnParams::zeros(hidden, beta, gamma);
    p.seed = seed;
    Rng rng(derive_seed(seed, stream::kRnnInit));
    const double bound_m = 0.1 * std::sqrt(6.0 / (hidden + hidden));
    const double bound_b = 1e-6 * std::sqrt(6.0 / (kRnnInputs + hidden));
    for (Eigen::Index i = 0; i < p.M.size(); ++i) p.M.data()[i] = rng.uniform(-bound_m, bound_m);
    for (Eigen::Index i = 0; i < p.B.size(); ++i) p.B.data()[i] = rng.uniform(-bound_b, bound_b);
    for (Eigen::Index i = 0; i < p.C.size(); ++i) p.C.data()[i] = rng.uniform(-1e-6, 1e-6);
    return p;
}

RnnStepResult rnn_step(const RnnParams& rnn, const Eigen::MatrixXd& A, const RnnState& state, const RnnInput& z,
                       double v_max) {
    RnnStepResult out;
    out.next.h.noalias() = A * state.h;
    out.next.h.noalias() += rnn.B * z;
    out.next.h += rnn.b1;
    out.next.h = out.next.h.cwiseMax(0.0);
    out.scaled.noalias() = rnn.C * out.next.h;
    out.scaled += rnn.b2;
    out.scaled *= v_max;
    out.v = clamp_voltage({out.scaled[0], out.scaled[1]}, v_max);
    return out;
}

RnnStepResult rnn_step(const RnnParams& rnn, const RnnState& state, const RnnInput& z, double v_max) {
    return rnn_step(rnn, effective_A(rnn), state, z, v_max);
}

std::array<double, 4> clamp_voltage_jacobian(const Eigen::Vector2d& w, double v_max) {
    const double n = w.norm();
    if (n < v_max) return {1.0, 0.0, 0.0, 1.0};
    const double s = v_max / n;
    const double ux = w[0] / n;
    const double uy = w[1] / n;
    return {s * (1.0 - ux * ux), -s * ux * uy, -s * ux * uy, s * (1.0 - uy * uy)};
}

RnnController::RnnController(std::shared_ptr<const RnnParams> params, double v_max)
    : params_(std::move(params)), v_max_(v_max) {
    params_->validate();
    A_ = std::make_shared<const Eigen::MatrixXd>(effective_A(*params_));
    reset();
}

VoltageInput RnnController::operator()(double omega_ref, const PlantState& plant) {
    auto r = rnn_step(*params_, *A_, state_, rnn_input(omega_ref, plant), v_max_);
    state_ = std::move(r.next);
    return r.v;
}

namespace {

constexpr const char* kFormatName = "motorlab.rnn-checkpoint";

template <class Mat>
nlohmann::json to_array(const Mat& m) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.size(); ++i) a.push_back(m.data()[i]);
    return a;
}

template <class Mat>
void from_array(const nlohmann::json& j, const char* key, Mat& m) {
    const auto& a = j.at(key);
    if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != m.size()) {
        throw CheckpointError(std::string("checkpoint: array '") + key + "' has the wrong length");
    }
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = a[static_cast<std::size_t>(i)].get<double>();
}

}  // namespace

std::string checkpoint_to_string(const RnnParams& rnn) {
    nlohmann::json j;
    j["format"] = kFormatName;
    j["format_version"] = kCheckpointFormatVersion;
    j["hidden"] = rnn.hidden;
    j["beta"] = rnn.beta;
    j["gamma"] = rnn.gamma;
    j["seed"] = rnn.seed;
    j["M"] = to_array(rnn.M);
    j["B"] = to_array(rnn.B);
    j["C"] = to_array(rnn.C);
    j["b1"] = to_array(rnn.b1);
    j["b2"] = to_array(rnn.b2);
    return j.dump() + "\n";
}

RnnParams checkpoint_from_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("checkpoint: invalid JSON: ") + e.what());
    }
    try {
        if (j.value("format", std::string{}) != kFormatName) throw CheckpointError("checkpoint: unknown format");
        const int version = j.at("format_version").get<int>();
        if (version != kCheckpointFormatVersion) {
            throw CheckpointError("checkpoint: format_version " + std::to_string(version) + " is not supported (expected " +
                                  std::to_string(kCheckpointFormatVersion) + ")");
        }
        RnnParams p = RnnParams::zeros(j.at("hidden").get<int>(), j.at("beta").get<double>(), j.at("gamma").get<double>());
        p.seed = j.at("seed").get<std::uint64_t>();
        from_array(j, "M", p.M);
        from_array(j, "B", p.B);
        from_array(j, "C", p.C);
        from_array(j, "b1", p.b1);
        from_array(j, "b2", p.b2);
        p.validate();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("checkpoint: malformed field: ") + e.what());
    } catch (const DomainError& e) {
        throw CheckpointError(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const RnnParams& rnn) {
    std::ofstream out(path);
    if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
    out << checkpoint_to_string(rnn);
}

RnnParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_string(ss.str());
}

}  // namespace motorlab
