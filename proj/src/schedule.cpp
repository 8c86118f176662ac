#include "speca/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace speca {

DiffusionSchedule build_schedule(ScheduleKind kind, int T,
                                 double beta_start, double beta_end) {
    if (T < 1) throw std::invalid_argument("schedule needs T >= 1");
    DiffusionSchedule s;
    s.kind = kind;
    s.T = T;
    s.beta_start = beta_start;
    s.beta_end = beta_end;
    s.betas.resize(T);

    if (kind == ScheduleKind::Linear) {
        if (!(beta_start > 0.0) || !(beta_end < 1.0) || beta_start > beta_end)
            throw std::invalid_argument("linear schedule needs 0 < beta_start <= beta_end < 1");
        for (int t = 1; t <= T; ++t) {
            double frac = T == 1 ? 0.0 : static_cast<double>(t - 1) / (T - 1);
            s.betas[t - 1] = beta_start + frac * (beta_end - beta_start);
        }
    } else {
        // squared-cosine alpha_bar profile, beta_t derived from its ratio
        const double off = 0.008;
        auto f = [&](double t) {
            double c = std::cos((t / T + off) / (1.0 + off) * M_PI / 2.0);
            return c * c;
        };
        double f0 = f(0.0);
        double prev = 1.0;
        for (int t = 1; t <= T; ++t) {
            double ab = f(static_cast<double>(t)) / f0;
            double beta = 1.0 - ab / prev;
            s.betas[t - 1] = std::clamp(beta, 1e-8, 0.999);
            prev = ab;
        }
    }

    s.alphas.resize(T);
    s.alpha_bars.resize(T);
    s.sigmas.resize(T);
    double ab = 1.0;
    for (int t = 1; t <= T; ++t) {
        s.alphas[t - 1] = 1.0 - s.betas[t - 1];
        ab *= s.alphas[t - 1];
        s.alpha_bars[t - 1] = ab;
        s.sigmas[t - 1] = std::sqrt(s.betas[t - 1]);
    }
    return s;
}

Tensor ddpm_posterior_mean(const Tensor& x_t, const Tensor& eps_hat, int t,
                           const DiffusionSchedule& sched) {
    if (!x_t.same_shape(eps_hat)) throw std::invalid_argument("ddpm_step shape mismatch");
    if (t < 1 || t > sched.T) throw std::invalid_argument("ddpm_step: t out of range");
    double a = sched.alpha(t);
    double ab = sched.alpha_bar(t);
    double coef = (1.0 - a) / std::sqrt(1.0 - ab);
    Tensor out = x_t;
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data[i] = (x_t.data[i] - coef * eps_hat.data[i]) / std::sqrt(a);
    return out;
}

Tensor ddpm_step(const Tensor& x_t, const Tensor& eps_hat, int t,
                 const DiffusionSchedule& sched, SeededRng& rng) {
    Tensor out = ddpm_posterior_mean(x_t, eps_hat, t, sched);
    if (t > 1) {
        double sig = sched.sigma(t);
        for (double& v : out.data) v += sig * rng.normal();
    }
    out.require_finite("ddpm_step");
    return out;
}

Tensor ddim_step(const Tensor& x_t, const Tensor& eps_hat, int t, int t_prev,
                 const DiffusionSchedule& sched) {
    if (t_prev >= t) throw std::invalid_argument("ddim_step: t_prev must be < t");
    if (!x_t.same_shape(eps_hat)) throw std::invalid_argument("ddim_step shape mismatch");
    double ab_t = sched.alpha_bar(t);
    double ab_p = sched.alpha_bar(t_prev);
    double sq_ab_t = std::sqrt(ab_t);
    double sq1m_t = std::sqrt(1.0 - ab_t);
    double sq_ab_p = std::sqrt(ab_p);
    double sq1m_p = std::sqrt(1.0 - ab_p);
    Tensor out = x_t;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double x0 = (x_t.data[i] - sq1m_t * eps_hat.data[i]) / sq_ab_t;
        out.data[i] = sq_ab_p * x0 + sq1m_p * eps_hat.data[i];
    }
    out.require_finite("ddim_step");
    return out;
}

std::string to_string(ScheduleKind kind) {
    return kind == ScheduleKind::Linear ? "linear" : "cosine";
}

ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "linear") return ScheduleKind::Linear;
    if (s == "cosine") return ScheduleKind::Cosine;
    throw std::invalid_argument("unknown schedule kind: " + s);
}

}  // namespace speca
