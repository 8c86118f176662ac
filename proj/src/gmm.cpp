#include "speca/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace speca {

void GmmSpec::validate() const {
    if (weights.empty() || weights.size() != means.size() ||
        weights.size() != sigmas.size())
        throw std::invalid_argument("gmm: inconsistent component counts");
    double wsum = 0;
    for (double w : weights) {
        if (w < 0) throw std::invalid_argument("gmm: negative weight");
        wsum += w;
    }
    if (std::fabs(wsum - 1.0) >= 1e-12)
        throw std::invalid_argument("gmm: weights must sum to 1");
    std::size_t d = means[0].size();
    for (const auto& m : means)
        if (m.size() != d) throw std::invalid_argument("gmm: mean dimension mismatch");
    for (double s : sigmas)
        if (!(s > 0)) throw std::invalid_argument("gmm: sigma must be positive");
}

GmmSpec GmmSpec::ring(int k, double radius, double sigma) {
    GmmSpec g;
    for (int i = 0; i < k; ++i) {
        double th = 2.0 * M_PI * i / k;
        g.weights.push_back(1.0 / k);
        g.means.push_back(Tensor::vec({radius * std::cos(th), radius * std::sin(th)}));
        g.sigmas.push_back(sigma);
    }
    return g;
}

namespace {

// log N(x; m, v*I) for isotropic variance v, plus squared distance reuse
double log_gauss(const Tensor& x, const Tensor& m, double scale, double v) {
    const std::size_t d = x.size();
    double q = 0;
    for (std::size_t j = 0; j < d; ++j) {
        double r = x[j] - scale * m[j];
        q += r * r;
    }
    return -0.5 * (d * std::log(2.0 * M_PI * v) + q / v);
}

}  // namespace

double gmm_log_pt(const GmmSpec& spec, const Tensor& x, int t,
                  const DiffusionSchedule& sched) {
    spec.validate();
    if (x.size() != spec.dim()) throw std::invalid_argument("gmm: x dimension mismatch");
    double ab = sched.alpha_bar(t);
    double sab = std::sqrt(ab);
    double lse = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(spec.components());
    for (std::size_t i = 0; i < spec.components(); ++i) {
        double v = ab * spec.sigmas[i] * spec.sigmas[i] + (1.0 - ab);
        logs[i] = std::log(spec.weights[i] + 1e-300) +
                  log_gauss(x, spec.means[i], sab, v);
        lse = std::max(lse, logs[i]);
    }
    double s = 0;
    for (double l : logs) s += std::exp(l - lse);
    return lse + std::log(s);
}

Tensor gmm_eps(const GmmSpec& spec, const Tensor& x, int t,
               const DiffusionSchedule& sched) {
    spec.validate();
    const std::size_t d = spec.dim();
    if (x.size() != d) throw std::invalid_argument("gmm: x dimension mismatch");
    double ab = sched.alpha_bar(t);
    double sab = std::sqrt(ab);

    // responsibilities in log space
    std::vector<double> logs(spec.components());
    std::vector<double> vars(spec.components());
    double lmax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < spec.components(); ++i) {
        vars[i] = ab * spec.sigmas[i] * spec.sigmas[i] + (1.0 - ab);
        logs[i] = std::log(spec.weights[i] + 1e-300) +
                  log_gauss(x, spec.means[i], sab, vars[i]);
        lmax = std::max(lmax, logs[i]);
    }
    double z = 0;
    for (double l : logs) z += std::exp(l - lmax);

    // score = sum_i resp_i * (sqrt(ab)*mu_i - x) / v_i
    Tensor score = Tensor::zeros({d});
    for (std::size_t i = 0; i < spec.components(); ++i) {
        double resp = std::exp(logs[i] - lmax) / z;
        for (std::size_t j = 0; j < d; ++j)
            score[j] += resp * (sab * spec.means[i][j] - x[j]) / vars[i];
    }

    double c = -std::sqrt(1.0 - ab);
    Tensor out = Tensor::zeros({d});
    for (std::size_t j = 0; j < d; ++j) out[j] = c * score[j];
    out.require_finite("gmm_eps");
    return out;
}

std::vector<Tensor> gmm_sample(const GmmSpec& spec, std::size_t n, SeededRng& rng) {
    spec.validate();
    if (n < 1) throw std::invalid_argument("gmm_sample: n >= 1 required");
    const std::size_t d = spec.dim();
    std::vector<Tensor> out;
    out.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        double u = rng.uniform();
        std::size_t comp = spec.components() - 1;
        double acc = 0;
        for (std::size_t i = 0; i < spec.components(); ++i) {
            acc += spec.weights[i];
            if (u < acc) {
                comp = i;
                break;
            }
        }
        Tensor x = Tensor::zeros({d});
        for (std::size_t j = 0; j < d; ++j)
            x[j] = spec.means[comp][j] + spec.sigmas[comp] * rng.normal();
        out.push_back(std::move(x));
    }
    return out;
}

}  // namespace speca
