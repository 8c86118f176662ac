#include "speca/denoiser.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace speca {

LayeredDenoiser::LayeredDenoiser(int L, int H, int d, int time_embed_dim)
    : L_(L), H_(H), d_(d), te_(time_embed_dim) {
    if (L < 1 || H < 1 || d < 1 || time_embed_dim < 2 || time_embed_dim % 2 != 0)
        throw std::invalid_argument("denoiser: bad architecture parameters");
    std::size_t n = off_out_b() + d_;
    params_.assign(n, 0.0);
}

LayeredDenoiser LayeredDenoiser::random_init(int L, int H, int d, int time_embed_dim,
                                             std::uint64_t seed) {
    LayeredDenoiser m(L, H, d, time_embed_dim);
    SeededRng rng(seed);
    auto fill = [&](std::size_t off, std::size_t rows, std::size_t cols) {
        double scale = std::sqrt(2.0 / static_cast<double>(cols));
        for (std::size_t i = 0; i < rows * cols; ++i)
            m.params_[off + i] = scale * rng.normal();
    };
    fill(m.off_in_w(), H, d + time_embed_dim);
    for (int l = 0; l < L; ++l) {
        std::size_t o = m.off_block(l);
        fill(o, H, H);
        // second affine damped so the residual stream starts near identity
        double scale = 0.1 * std::sqrt(2.0 / H);
        std::size_t w2 = o + static_cast<std::size_t>(H) * H + H;
        for (int i = 0; i < H * H; ++i) m.params_[w2 + i] = scale * rng.normal();
    }
    fill(m.off_out_w(), d, H);
    return m;
}

void LayeredDenoiser::require_init() const {
    if (params_.empty()) throw std::runtime_error("denoiser: uninitialized model");
}

Tensor LayeredDenoiser::time_embedding(int t) const {
    Tensor e = Tensor::zeros({static_cast<std::size_t>(te_)});
    int half = te_ / 2;
    for (int i = 0; i < half; ++i) {
        double freq = std::exp(-std::log(10000.0) * i / half);
        e[2 * i] = std::sin(t * freq);
        e[2 * i + 1] = std::cos(t * freq);
    }
    return e;
}

Tensor LayeredDenoiser::input_embedding(const Tensor& x, int t) const {
    require_init();
    if (static_cast<int>(x.size()) != d_)
        throw std::invalid_argument("denoiser: x dimension mismatch");
    Tensor e = time_embedding(t);
    Tensor h = Tensor::zeros({static_cast<std::size_t>(H_)});
    const int in = d_ + te_;
    const double* w = params_.data() + off_in_w();
    const double* b = params_.data() + off_in_b();
    for (int r = 0; r < H_; ++r) {
        double s = b[r];
        const double* row = w + static_cast<std::size_t>(r) * in;
        for (int c = 0; c < d_; ++c) s += row[c] * x[c];
        for (int c = 0; c < te_; ++c) s += row[d_ + c] * e[c];
        h[r] = s;
    }
    return h;
}

Tensor LayeredDenoiser::run_block(int l, const Tensor& h_in) const {
    require_init();
    if (l < 0 || l >= L_) throw std::invalid_argument("denoiser: block index out of range");
    if (static_cast<int>(h_in.size()) != H_)
        throw std::invalid_argument("denoiser: feature width mismatch");
    std::size_t o = off_block(l);
    const double* w1 = params_.data() + o;
    const double* b1 = w1 + static_cast<std::size_t>(H_) * H_;
    const double* w2 = b1 + H_;
    const double* b2 = w2 + static_cast<std::size_t>(H_) * H_;

    Tensor u = Tensor::zeros({static_cast<std::size_t>(H_)});
    for (int r = 0; r < H_; ++r) {
        double s = b1[r];
        const double* row = w1 + static_cast<std::size_t>(r) * H_;
        for (int c = 0; c < H_; ++c) s += row[c] * h_in[c];
        u[r] = s;
    }
    Tensor out = h_in;
    for (int r = 0; r < H_; ++r) {
        double s = b2[r];
        const double* row = w2 + static_cast<std::size_t>(r) * H_;
        for (int c = 0; c < H_; ++c) s += row[c] * silu(u[c]);
        out[r] += s;
    }
    return out;
}

Tensor LayeredDenoiser::output_head(const Tensor& feature) const {
    require_init();
    if (static_cast<int>(feature.size()) != H_)
        throw std::invalid_argument("denoiser: feature width mismatch");
    const double* w = params_.data() + off_out_w();
    const double* b = params_.data() + off_out_b();
    Tensor out = Tensor::zeros({static_cast<std::size_t>(d_)});
    for (int r = 0; r < d_; ++r) {
        double s = b[r];
        const double* row = w + static_cast<std::size_t>(r) * H_;
        for (int c = 0; c < H_; ++c) s += row[c] * feature[c];
        out[r] = s;
    }
    return out;
}

double LayeredDenoiser::flops() const {
    return input_head_flops() + L_ * block_flops() + output_head_flops();
}

ModelOutput LayeredDenoiser::forward(const Tensor& x, int t,
                                     const DiffusionSchedule& sched) const {
    (void)sched;
    require_init();
    ModelOutput out;
    double counted = 0.0;
    Tensor h = input_embedding(x, t);
    counted += input_head_flops();
    out.layer_features.reserve(L_);
    for (int l = 0; l < L_; ++l) {
        h = run_block(l, h);
        counted += block_flops();
        out.layer_features.push_back(h);
    }
    out.eps_hat = output_head(h);
    counted += output_head_flops();
    out.flops = counted;
    out.eps_hat.require_finite("denoiser_forward");
    return out;
}

static const char kMagic[5] = {'S', 'P', 'C', 'A', '1'};

void LayeredDenoiser::save(const std::string& path) const {
    require_init();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open weights file for writing: " + path);
    f.write(kMagic, 5);
    std::int32_t hdr[4] = {L_, H_, d_, te_};
    f.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
    f.write(reinterpret_cast<const char*>(params_.data()),
            static_cast<std::streamsize>(params_.size() * sizeof(double)));
    if (!f) throw std::runtime_error("short write to weights file: " + path);
}

LayeredDenoiser LayeredDenoiser::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open weights file: " + path);
    char magic[5];
    f.read(magic, 5);
    if (!f || std::memcmp(magic, kMagic, 5) != 0)
        throw std::runtime_error("bad weights file magic: " + path);
    std::int32_t hdr[4];
    f.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
    if (!f) throw std::runtime_error("truncated weights header: " + path);
    LayeredDenoiser m(hdr[0], hdr[1], hdr[2], hdr[3]);
    f.read(reinterpret_cast<char*>(m.params_.data()),
           static_cast<std::streamsize>(m.params_.size() * sizeof(double)));
    if (!f) throw std::runtime_error("truncated weights payload: " + path);
    return m;
}

double estimate_lipschitz(const LayeredDenoiser& model, const Tensor& x, int t,
                          const DiffusionSchedule& sched, int n_probes, SeededRng& rng) {
    ModelOutput base = model.forward(x, t, sched);
    double best = 0.0;
    const double delta = 1e-4;
    for (int p = 0; p < n_probes; ++p) {
        Tensor xp = x;
        double nn = 0;
        std::vector<double> dir(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) {
            dir[j] = rng.normal();
            nn += dir[j] * dir[j];
        }
        nn = std::sqrt(nn);
        for (std::size_t j = 0; j < x.size(); ++j) xp[j] += delta * dir[j] / nn;
        ModelOutput pert = model.forward(xp, t, sched);
        double diff = 0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            double r = pert.eps_hat[j] - base.eps_hat[j];
            diff += r * r;
        }
        best = std::max(best, std::sqrt(diff) / delta);
    }
    return best;
}

}  // namespace speca
