#include "speca/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace speca {

std::int64_t binomial(int i, int j) {
    if (i < 0 || j < 0 || j > i || i > 12)
        throw std::invalid_argument("order overflow");
    std::int64_t r = 1;
    j = std::min(j, i - j);
    for (int k = 1; k <= j; ++k)
        r = r * (i - j + k) / k;  // exact: r*(i-j+k) is divisible by k here
    return r;
}

double norm(const Tensor& v, NormKind kind) {
    if (v.empty()) throw std::invalid_argument("norm of empty tensor");
    switch (kind) {
        case NormKind::L1: {
            double s = 0;
            for (double x : v.data) s += std::fabs(x);
            return s;
        }
        case NormKind::L2: {
            double s = 0;
            for (double x : v.data) s += x * x;
            return std::sqrt(s);
        }
        case NormKind::Linf: {
            double s = 0;
            for (double x : v.data) s = std::max(s, std::fabs(x));
            return s;
        }
    }
    throw std::logic_error("unreachable");
}

double pearson_r(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 3)
        throw std::invalid_argument("pearson_r needs equal lengths >= 3");
    const std::size_t n = xs.size();
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("zero variance");
    return sxy / std::sqrt(sxx * syy);
}

std::pair<std::vector<double>, std::vector<std::vector<double>>>
symmetric_eigen(const std::vector<double>& a_in, std::size_t n) {
    std::vector<double> a = a_in;
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    auto off = [&]() {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += a[i * n + j] * a[i * n + j];
        return s;
    };

    for (int sweep = 0; sweep < 100 && off() > 1e-30; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a[p * n + q];
                if (std::fabs(apq) < 1e-300) continue;
                double app = a[p * n + p], aqq = a[q * n + q];
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = v[k * n + p], vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a[i * n + i] > a[j * n + j]; });

    std::vector<double> evals(n);
    std::vector<std::vector<double>> evecs(n, std::vector<double>(n));
    for (std::size_t r = 0; r < n; ++r) {
        evals[r] = a[order[r] * n + order[r]];
        for (std::size_t k = 0; k < n; ++k) evecs[r][k] = v[k * n + order[r]];
    }
    return {std::move(evals), std::move(evecs)};
}

namespace {

void fix_sign(std::vector<double>& dir) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < dir.size(); ++i)
        if (std::fabs(dir[i]) > std::fabs(dir[best])) best = i;
    if (dir[best] < 0)
        for (double& x : dir) x = -x;
}

}  // namespace

std::vector<std::pair<double, double>> pca_2d(const std::vector<Tensor>& points) {
    const std::size_t n = points.size();
    if (n < 3) throw std::invalid_argument("pca_2d needs at least 3 points");
    const std::size_t d = points[0].size();
    if (d < 2) throw std::invalid_argument("pca_2d needs dimension >= 2");
    for (const auto& p : points)
        if (p.size() != d) throw std::invalid_argument("pca_2d dimension mismatch");

    std::vector<double> mean(d, 0.0);
    for (const auto& p : points)
        for (std::size_t j = 0; j < d; ++j) mean[j] += p[j];
    for (double& m : mean) m /= static_cast<double>(n);

    // centered data, row-major n x d
    std::vector<double> x(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) x[i * d + j] = points[i][j] - mean[j];

    std::vector<std::vector<double>> dirs(2, std::vector<double>(d, 0.0));
    double lam0, lam1;

    if (d <= n) {
        std::vector<double> cov(d * d, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b)
                    cov[a * d + b] += x[i * d + a] * x[i * d + b];
        for (double& c : cov) c /= static_cast<double>(n - 1);
        auto [evals, evecs] = symmetric_eigen(cov, d);
        lam0 = evals[0];
        lam1 = evals[1];
        dirs[0] = evecs[0];
        dirs[1] = evecs[1];
    } else {
        std::vector<double> gram(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0;
                for (std::size_t k = 0; k < d; ++k) s += x[i * d + k] * x[j * d + k];
                gram[i * n + j] = s / static_cast<double>(n - 1);
            }
        auto [evals, evecs] = symmetric_eigen(gram, n);
        lam0 = evals[0];
        lam1 = evals[1];
        for (int c = 0; c < 2; ++c) {
            for (std::size_t k = 0; k < d; ++k) {
                double s = 0;
                for (std::size_t i = 0; i < n; ++i) s += evecs[c][i] * x[i * d + k];
                dirs[c][k] = s;
            }
            double nn = 0;
            for (double u : dirs[c]) nn += u * u;
            nn = std::sqrt(nn);
            if (nn > 0)
                for (double& u : dirs[c]) u /= nn;
        }
    }

    if (!(lam0 > 0.0) || lam1 <= 1e-12 * lam0)
        throw std::invalid_argument("degenerate spectrum");

    fix_sign(dirs[0]);
    fix_sign(dirs[1]);

    std::vector<std::pair<double, double>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double p0 = 0, p1 = 0;
        for (std::size_t j = 0; j < d; ++j) {
            p0 += x[i * d + j] * dirs[0][j];
            p1 += x[i * d + j] * dirs[1][j];
        }
        out[i] = {p0, p1};
    }
    return out;
}

}  // namespace speca
