#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

namespace oracle {

std::array<double, cbir::kCorrDim> correlogram_pairs(const cbir::LabelGrid& g, std::span<const int> distances) {
    std::array<double, cbir::kCorrDim> out{};
    std::array<int, cbir::kCorrDim> used{};
    for (int d : distances) {
        std::array<double, cbir::kCorrDim> same{}, total{};
        for (int y1 = 0; y1 < g.height; ++y1)
            for (int x1 = 0; x1 < g.width; ++x1)
                for (int y2 = 0; y2 < g.height; ++y2)
                    for (int x2 = 0; x2 < g.width; ++x2) {
                        if (std::max(std::abs(x1 - x2), std::abs(y1 - y2)) != d)
                            continue;
                        const int c = g.at(x1, y1);
                        total[c] += 1;
                        same[c] += g.at(x2, y2) == c ? 1 : 0;
                    }
        for (std::size_t c = 0; c < cbir::kCorrDim; ++c)
            if (total[c] > 0) {
                out[c] += same[c] / total[c];
                ++used[c];
            }
    }
    for (std::size_t c = 0; c < cbir::kCorrDim; ++c)
        out[c] = used[c] ? out[c] / used[c] : 0.0;
    return out;
}

std::vector<Subbands> haar_filter_bank(std::vector<double> plane, int width, int height, int levels) {
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<Subbands> out;
    for (int level = 0; level < levels; ++level) {
        const int hw = width / 2, hh = height / 2;
        // Rows: low = (p[2i] + p[2i+1]) / sqrt2, high = (p[2i] - p[2i+1]) / sqrt2.
        std::vector<double> lo(static_cast<std::size_t>(hw) * height), hi(lo.size());
        for (int y = 0; y < height; ++y)
            for (int i = 0; i < hw; ++i) {
                const double a = plane[y * width + 2 * i], b = plane[y * width + 2 * i + 1];
                lo[y * hw + i] = (a + b) * s;
                hi[y * hw + i] = (a - b) * s;
            }
        // Columns of each half, same filters; the column high-pass takes top minus bottom.
        auto cols = [&](const std::vector<double>& src, std::vector<double>& low, std::vector<double>& high) {
            low.assign(static_cast<std::size_t>(hw) * hh, 0.0);
            high.assign(low.size(), 0.0);
            for (int j = 0; j < hh; ++j)
                for (int x = 0; x < hw; ++x) {
                    const double a = src[(2 * j) * hw + x], b = src[(2 * j + 1) * hw + x];
                    low[j * hw + x] = (a + b) * s;
                    high[j * hw + x] = (a - b) * s;
                }
        };
        Subbands sb;
        sb.width = hw;
        sb.height = hh;
        cols(lo, sb.ll, sb.lh);
        cols(hi, sb.hl, sb.hh);
        plane = sb.ll;
        width = hw;
        height = hh;
        out.push_back(std::move(sb));
    }
    return out;
}

namespace {

void push_stats(std::vector<double>& out, const std::vector<double>& c) {
    const double n = static_cast<double>(c.size());
    double m = 0, ma = 0;
    for (double v : c) {
        m += v;
        ma += std::abs(v);
    }
    m /= n;
    ma /= n;
    double var = 0, vara = 0;
    for (double v : c) {
        var += (v - m) * (v - m);
        vara += (std::abs(v) - ma) * (std::abs(v) - ma);
    }
    out.insert(out.end(), {m, std::sqrt(var / n), ma, std::sqrt(vara / n)});
}

} // namespace

std::array<double, cbir::kWaveletDim> wavelet_stats(std::span<const double> plane, int width, int height) {
    const auto bands = haar_filter_bank({plane.begin(), plane.end()}, width, height, 3);
    std::vector<double> v;
    for (const auto& b : bands) {
        push_stats(v, b.lh);
        push_stats(v, b.hl);
        push_stats(v, b.hh);
    }
    push_stats(v, bands.back().ll);
    std::array<double, cbir::kWaveletDim> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

double gabor_sigma_from_bandwidth(double frequency) {
    // Fourier transform of the envelope is exp(-2 pi^2 sigma^2 df^2); set it to 1/2 at df = f/3.
    const double df = frequency / 3.0;
    return std::sqrt(std::log(2.0) / 2.0) / (std::numbers::pi * df);
}

std::vector<double> gabor_dense_magnitude(std::span<const double> lum, int width, int height, double frequency,
                                          double theta) {
    const double sigma = gabor_sigma_from_bandwidth(frequency);
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    const int n = 2 * r + 1;
    std::vector<double> env(static_cast<std::size_t>(n) * n);
    std::vector<std::complex<double>> car(env.size());
    double z = 0.0;
    for (int v = -r; v <= r; ++v)
        for (int u = -r; u <= r; ++u) {
            const std::size_t k = (v + r) * n + (u + r);
            env[k] = std::exp(-(u * u + v * v) / (2.0 * sigma * sigma));
            z += env[k];
            const double phase = 2.0 * std::numbers::pi * frequency * (u * std::cos(theta) + v * std::sin(theta));
            car[k] = {std::cos(phase), std::sin(phase)};
        }
    double dc = 0.0;
    for (std::size_t k = 0; k < env.size(); ++k) {
        env[k] /= z;
        dc += env[k] * car[k].real();
    }
    std::vector<double> out(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            std::complex<double> acc{};
            for (int v = -r; v <= r; ++v)
                for (int u = -r; u <= r; ++u) {
                    const std::size_t k = (v + r) * n + (u + r);
                    const double p = lum[std::clamp(y + v, 0, height - 1) * width + std::clamp(x + u, 0, width - 1)];
                    acc += env[k] * (car[k] - dc) * p;
                }
            out[y * width + x] = std::abs(acc);
        }
    return out;
}

std::vector<double> jacobi_eigenvalues(const cbir::Matrix& m) {
    const std::size_t n = m.rows;
    cbir::Matrix a = m;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off += a(p, q) * a(p, q);
        if (off < 1e-30)
            break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300)
                    continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i)
        ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

namespace {

std::vector<double> project(std::span<const double> v, std::span<const int> y, double C) {
    auto clip_at = [&](double lambda, std::vector<double>& a) {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            a[i] = std::clamp(v[i] - lambda * y[i], 0.0, C);
            s += a[i] * y[i];
        }
        return s; // non-increasing in lambda
    };
    std::vector<double> a(v.size());
    double lo = -1.0, hi = 1.0;
    while (clip_at(lo, a) < 0)
        lo *= 2;
    while (clip_at(hi, a) > 0)
        hi *= 2;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (clip_at(mid, a) > 0 ? lo : hi) = mid;
    }
    clip_at(0.5 * (lo + hi), a);
    return a;
}

} // namespace

QpSolution solve_dual_qp(const cbir::Matrix& K, std::span<const int> y, double C, int iterations) {
    const std::size_t n = K.rows;
    cbir::Matrix Q(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            Q(i, j) = y[i] * y[j] * K(i, j);
    const double L = std::max(jacobi_eigenvalues(Q).back(), 1e-12);

    auto grad = [&](const std::vector<double>& a) {
        std::vector<double> g(n, -1.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                g[i] += Q(i, j) * a[j];
        return g;
    };
    std::vector<double> x(n, 0.0), z = x, prev = x;
    double t = 1.0;
    for (int it = 0; it < iterations; ++it) {
        const auto g = grad(z);
        std::vector<double> step(n);
        for (std::size_t i = 0; i < n; ++i)
            step[i] = z[i] - g[i] / L;
        prev = x;
        x = project(step, y, C);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = x[i] + (t - 1.0) / t_next * (x[i] - prev[i]);
            delta = std::max(delta, std::abs(x[i] - prev[i]));
        }
        t = t_next;
        if (delta < 1e-15 * std::max(1.0, C) && it > 100)
            break;
    }

    QpSolution sol;
    sol.alpha = x;
    double quad = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        lin += x[i];
        for (std::size_t j = 0; j < n; ++j)
            quad += x[i] * Q(i, j) * x[j];
    }
    sol.objective = lin - 0.5 * quad;

    // Bias: average over multipliers strictly inside the box.
    const double lo = 1e-6 * *std::max_element(x.begin(), x.end());
    const double hi = C * (1.0 - 1e-6);
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i] <= lo || x[i] >= hi)
            continue;
        double f = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            f += x[j] * y[j] * K(j, i);
        sum += y[i] - f;
        ++count;
    }
    sol.bias = count ? sum / count : 0.0;
    return sol;
}

std::size_t vote_winner(std::size_t num_classes, std::span<const cbir::PairDecision> decisions) {
    std::vector<int> votes(num_classes, 0);
    std::vector<double> won_abs(num_classes, 0.0);
    for (const auto& d : decisions) {
        const std::size_t w = d.value >= 0.0 ? d.positive : d.negative;
        if (w >= num_classes)
            continue; // the rest side of a one-vs-all model
        votes[w] += 1;
        won_abs[w] += std::abs(d.value);
    }
    const int top = *std::max_element(votes.begin(), votes.end());
    std::vector<std::size_t> tied;
    for (std::size_t c = 0; c < num_classes; ++c)
        if (votes[c] == top)
            tied.push_back(c);
    double best = -1.0;
    std::size_t winner = tied.front();
    for (std::size_t c : tied)
        if (won_abs[c] > best) {
            best = won_abs[c];
            winner = c;
        }
    return winner;
}

cbir::ImageRaster random_image(int width, int height, std::mt19937_64& rng) {
    cbir::ImageRaster img = cbir::ImageRaster::filled(width, height, 0, 0, 0);
    std::uniform_int_distribution<int> byte(0, 255);
    for (auto& v : img.data)
        v = static_cast<std::uint8_t>(byte(rng));
    return img;
}

cbir::LabelGrid random_labels(int width, int height, int colours, std::mt19937_64& rng) {
    cbir::LabelGrid g;
    g.width = width;
    g.height = height;
    std::uniform_int_distribution<int> pick(0, colours - 1);
    for (int i = 0; i < width * height; ++i)
        g.labels.push_back(static_cast<std::uint8_t>(pick(rng)));
    return g;
}

Toy separable_2d(std::size_t n, std::uint64_t seed, double gap) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> box(-3.0, 3.0), angle(0.0, 2.0 * std::numbers::pi), off(-1.0, 1.0);
    const double a = angle(rng);
    const double w0 = std::cos(a), w1 = std::sin(a), b = off(rng);
    Toy t{cbir::Matrix(n, 2), {}};
    std::size_t i = 0;
    int pos = 0;
    while (i < n) {
        const double x0 = box(rng), x1 = box(rng);
        const double m = w0 * x0 + w1 * x1 + b;
        if (std::abs(m) < gap)
            continue;
        const int label = m > 0 ? 1 : -1;
        // Keep both classes present: the last slot goes to the missing class if needed.
        if (i == n - 1 && (pos == 0 || pos == static_cast<int>(n) - 1) && (label > 0) == (pos > 0))
            continue;
        t.X(i, 0) = x0;
        t.X(i, 1) = x1;
        t.y.push_back(label);
        pos += label > 0;
        ++i;
    }
    return t;
}

} // namespace oracle
