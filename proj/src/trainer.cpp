#include "speca/trainer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace speca {

void TrainConfig::validate() const {
    if (steps < 0) throw std::invalid_argument("trainer: steps must be >= 0");
    if (batch < 1) throw std::invalid_argument("trainer: batch must be >= 1");
    if (!(lr >= 0) || !std::isfinite(lr)) throw std::invalid_argument("trainer: bad lr");
    if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1))
        throw std::invalid_argument("trainer: adam betas must be in [0,1)");
    if (!(adam_eps > 0)) throw std::invalid_argument("trainer: adam_eps must be > 0");
}

double backprop_sample(const LayeredDenoiser& model, const Tensor& x_t, int t,
                       const Tensor& eps_target, std::vector<double>& grad,
                       double weight) {
    const int L = model.layers(), H = model.hidden(), d = model.dim(),
              te = model.time_embed_dim();
    const std::vector<double>& p = model.params();
    if (grad.size() != p.size()) throw std::invalid_argument("grad size mismatch");

    // forward with trace
    Tensor e = model.time_embedding(t);
    std::vector<double> z(d + te);
    for (int j = 0; j < d; ++j) z[j] = x_t[j];
    for (int j = 0; j < te; ++j) z[d + j] = e[j];

    std::vector<Tensor> h(L + 1);  // h[0] = input embedding, h[l+1] = block l out
    h[0] = model.input_embedding(x_t, t);
    std::vector<Tensor> us(L), vs(L);
    for (int l = 0; l < L; ++l) {
        std::size_t o = model.off_block(l);
        const double* w1 = p.data() + o;
        const double* b1 = w1 + static_cast<std::size_t>(H) * H;
        const double* w2 = b1 + H;
        const double* b2 = w2 + static_cast<std::size_t>(H) * H;
        Tensor u = Tensor::zeros({static_cast<std::size_t>(H)});
        for (int r = 0; r < H; ++r) {
            double s = b1[r];
            const double* row = w1 + static_cast<std::size_t>(r) * H;
            for (int c = 0; c < H; ++c) s += row[c] * h[l][c];
            u[r] = s;
        }
        Tensor v = Tensor::zeros({static_cast<std::size_t>(H)});
        for (int r = 0; r < H; ++r) v[r] = silu(u[r]);
        Tensor out = h[l];
        for (int r = 0; r < H; ++r) {
            double s = b2[r];
            const double* row = w2 + static_cast<std::size_t>(r) * H;
            for (int c = 0; c < H; ++c) s += row[c] * v[c];
            out[r] += s;
        }
        us[l] = std::move(u);
        vs[l] = std::move(v);
        h[l + 1] = std::move(out);
    }
    Tensor eps = model.output_head(h[L]);

    double loss = 0;
    Tensor deps = Tensor::zeros({static_cast<std::size_t>(d)});
    for (int j = 0; j < d; ++j) {
        double r = eps[j] - eps_target[j];
        loss += r * r;
        deps[j] = 2.0 * r * weight;
    }

    // output head
    {
        const double* w = p.data() + model.off_out_w();
        double* gw = grad.data() + model.off_out_w();
        double* gb = grad.data() + model.off_out_b();
        for (int r = 0; r < d; ++r) {
            gb[r] += deps[r];
            double* grow = gw + static_cast<std::size_t>(r) * H;
            for (int c = 0; c < H; ++c) grow[c] += deps[r] * h[L][c];
        }
        Tensor dh = Tensor::zeros({static_cast<std::size_t>(H)});
        for (int c = 0; c < H; ++c) {
            double s = 0;
            for (int r = 0; r < d; ++r) s += w[static_cast<std::size_t>(r) * H + c] * deps[r];
            dh[c] = s;
        }

        // residual blocks, reverse
        for (int l = L - 1; l >= 0; --l) {
            std::size_t o = model.off_block(l);
            const double* w1 = p.data() + o;
            const double* w2 = w1 + static_cast<std::size_t>(H) * H + H;
            double* gw1 = grad.data() + o;
            double* gb1 = gw1 + static_cast<std::size_t>(H) * H;
            double* gw2 = gb1 + H;
            double* gb2 = gw2 + static_cast<std::size_t>(H) * H;

            // dh is gradient wrt h[l+1]; branch gradient dw = dh
            Tensor dv = Tensor::zeros({static_cast<std::size_t>(H)});
            for (int r = 0; r < H; ++r) {
                gb2[r] += dh[r];
                double* grow = gw2 + static_cast<std::size_t>(r) * H;
                for (int c = 0; c < H; ++c) grow[c] += dh[r] * vs[l][c];
            }
            for (int c = 0; c < H; ++c) {
                double s = 0;
                for (int r = 0; r < H; ++r) s += w2[static_cast<std::size_t>(r) * H + c] * dh[r];
                dv[c] = s;
            }
            Tensor du = Tensor::zeros({static_cast<std::size_t>(H)});
            for (int r = 0; r < H; ++r) du[r] = dv[r] * silu_grad(us[l][r]);
            for (int r = 0; r < H; ++r) {
                gb1[r] += du[r];
                double* grow = gw1 + static_cast<std::size_t>(r) * H;
                for (int c = 0; c < H; ++c) grow[c] += du[r] * h[l][c];
            }
            Tensor dh_in = dh;  // skip path
            for (int c = 0; c < H; ++c) {
                double s = 0;
                for (int r = 0; r < H; ++r) s += w1[static_cast<std::size_t>(r) * H + c] * du[r];
                dh_in[c] += s;
            }
            dh = std::move(dh_in);
        }

        // input head
        double* gw_in = grad.data() + model.off_in_w();
        double* gb_in = grad.data() + model.off_in_b();
        const int in = d + te;
        for (int r = 0; r < H; ++r) {
            gb_in[r] += dh[r];
            double* grow = gw_in + static_cast<std::size_t>(r) * in;
            for (int c = 0; c < in; ++c) grow[c] += dh[r] * z[c];
        }
    }
    return loss;
}

LossCurve train(LayeredDenoiser& model, const GmmSpec& gmm,
                const DiffusionSchedule& sched, const TrainConfig& cfg) {
    cfg.validate();
    gmm.validate();
    if (static_cast<int>(gmm.dim()) != model.dim())
        throw std::invalid_argument("trainer: model/gmm dimension mismatch");

    SeededRng rng(cfg.seed);
    const std::size_t np = model.param_count();
    std::vector<double> m(np, 0.0), v(np, 0.0), grad(np, 0.0);
    LossCurve curve;
    curve.losses.reserve(cfg.steps);
    const int d = model.dim();

    for (int it = 1; it <= cfg.steps; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0;
        double w = 1.0 / cfg.batch;
        for (int b = 0; b < cfg.batch; ++b) {
            std::vector<Tensor> x0s = gmm_sample(gmm, 1, rng);
            int t = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(sched.T)));
            double ab = sched.alpha_bar(t);
            Tensor eps = Tensor::zeros({static_cast<std::size_t>(d)});
            Tensor x_t = Tensor::zeros({static_cast<std::size_t>(d)});
            for (int j = 0; j < d; ++j) {
                eps[j] = rng.normal();
                x_t[j] = std::sqrt(ab) * x0s[0][j] + std::sqrt(1.0 - ab) * eps[j];
            }
            loss += w * backprop_sample(model, x_t, t, eps, grad, w);
        }
        if (!std::isfinite(loss))
            throw DivergenceError("divergence at iteration " + std::to_string(it));
        curve.losses.push_back(loss);

        if (cfg.lr > 0) {
            double b1t = 1.0 - std::pow(cfg.beta1, it);
            double b2t = 1.0 - std::pow(cfg.beta2, it);
            std::vector<double>& p = model.params();
            for (std::size_t i = 0; i < np; ++i) {
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
                double mh = m[i] / b1t, vh = v[i] / b2t;
                p[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.adam_eps);
            }
        }
    }
    return curve;
}

double grad_check(const LayeredDenoiser& model, const Tensor& x, int t,
                  const DiffusionSchedule& sched, std::uint64_t seed) {
    SeededRng rng(seed);
    const int d = model.dim();
    Tensor eps_target = Tensor::zeros({static_cast<std::size_t>(d)});
    for (int j = 0; j < d; ++j) eps_target[j] = rng.normal();

    std::vector<double> grad(model.param_count(), 0.0);
    backprop_sample(model, x, t, eps_target, grad, 1.0);

    auto loss_at = [&](LayeredDenoiser& m) {
        ModelOutput out = m.forward(x, t, sched);
        double s = 0;
        for (int j = 0; j < d; ++j) {
            double r = out.eps_hat[j] - eps_target[j];
            s += r * r;
        }
        return s;
    };

    LayeredDenoiser probe = model;
    const double hstep = 1e-5;
    double worst = 0;
    int n_checked = 0;
    while (n_checked < 64) {
        std::size_t i = rng.below(model.param_count());
        double orig = probe.params()[i];
        probe.params()[i] = orig + hstep;
        double lp = loss_at(probe);
        probe.params()[i] = orig - hstep;
        double lm = loss_at(probe);
        probe.params()[i] = orig;
        double fd = (lp - lm) / (2 * hstep);
        double denom = std::max({std::fabs(fd), std::fabs(grad[i]), 1e-6});
        worst = std::max(worst, std::fabs(fd - grad[i]) / denom);
        ++n_checked;
    }
    return worst;
}

}  // namespace speca
