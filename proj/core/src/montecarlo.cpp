#include "ellipvol/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

namespace ellipvol {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Per-stream generator. Uniforms come straight off mt19937_64 output so the
// byte stream is the same on every platform; normals use the polar method.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t stream)
        : rng_(splitmix64(seed + stream * 0x9E3779B97F4A7C15ull)) {}

    double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    double uniform_sym() { return 2.0 * uniform01() - 1.0; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, q;
        do {
            u = uniform_sym();
            v = uniform_sym();
            q = u * u + v * v;
        } while (q >= 1.0 || q == 0.0);
        const double f = std::sqrt(-2.0 * std::log(q) / q);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    std::array<double, 3> unit_direction() {
        for (;;) {
            const std::array<double, 3> g{normal(), normal(), normal()};
            const double n = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
            if (n > 1e-12) return {g[0] / n, g[1] / n, g[2] / n};
        }
    }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

struct Accumulator {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    // Pairwise combination; applied left to right over stream indices.
    void merge(const Accumulator& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double nt = static_cast<double>(n + o.n);
        const double d = o.mean - mean;
        mean += d * static_cast<double>(o.n) / nt;
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / nt;
        n += o.n;
    }
};

unsigned max_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("ELLIPVOL_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned long>(cap) < hw) hw = static_cast<unsigned>(cap);
    }
    return hw;
}

// Runs `sample(rng)` spec.samples times split across spec.streams independent
// substreams, fanning out over threads. The merge order is fixed by stream
// index, so the estimate is a pure function of (samples, seed, streams).
template <class Sampler>
McEstimate run_streams(const McSpec& spec, const Sampler& sample) {
    if (spec.samples < 1) throw std::invalid_argument("McSpec: samples must be >= 1");
    if (spec.streams < 1) throw std::invalid_argument("McSpec: streams must be >= 1");

    const std::uint64_t streams = spec.streams;
    const std::uint64_t base = spec.samples / streams;
    const std::uint64_t rem = spec.samples % streams;

    std::vector<Accumulator> partial(streams);
    auto run_range = [&](std::uint64_t s0, std::uint64_t s1) {
        for (std::uint64_t j = s0; j < s1; ++j) {
            StreamRng rng(spec.seed, j);
            Accumulator acc;
            const std::uint64_t count = base + (j < rem ? 1 : 0);
            for (std::uint64_t i = 0; i < count; ++i) acc.add(sample(rng));
            partial[j] = acc;
        }
    };

    const unsigned workers =
        static_cast<unsigned>(std::min<std::uint64_t>(streams, max_threads()));
    if (workers <= 1) {
        run_range(0, streams);
    } else {
        std::vector<std::future<void>> jobs;
        jobs.reserve(workers);
        const std::uint64_t chunk = (streams + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint64_t s0 = w * chunk;
            const std::uint64_t s1 = std::min<std::uint64_t>(streams, s0 + chunk);
            if (s0 >= s1) break;
            jobs.push_back(std::async(std::launch::async, run_range, s0, s1));
        }
        for (auto& j : jobs) j.get();
    }

    Accumulator total;
    for (const Accumulator& acc : partial) total.merge(acc);

    McEstimate e;
    e.mean = total.mean;
    e.samples = total.n;
    e.std_error = total.n > 1
                      ? std::sqrt(total.m2 / static_cast<double>(total.n - 1)) /
                            std::sqrt(static_cast<double>(total.n))
                      : 0.0;
    return e;
}

// |det R| from a Householder QR of the n x m edge matrix (columns are the
// edge vectors), i.e. the m-volume of the spanned parallelepiped.
double parallelepiped_volume(std::vector<double>& A, std::size_t n, std::size_t m) {
    double vol = 1.0;
    std::vector<double> v(n);
    for (std::size_t j = 0; j < m; ++j) {
        double norm2 = 0.0;
        for (std::size_t i = j; i < n; ++i) {
            v[i] = A[i * m + j];
            norm2 += v[i] * v[i];
        }
        const double norm = std::sqrt(norm2);
        if (norm == 0.0) return 0.0;
        vol *= norm;
        const double alpha = v[j] >= 0.0 ? -norm : norm;
        v[j] -= alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = j; i < n; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2 == 0.0) continue;
        for (std::size_t k = j + 1; k < m; ++k) {
            double dot = 0.0;
            for (std::size_t i = j; i < n; ++i) dot += v[i] * A[i * m + k];
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t i = j; i < n; ++i) A[i * m + k] -= f * v[i];
        }
    }
    return vol;
}

double factorial(int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

SemiaxesN::SemiaxesN(std::vector<double> a) : axes(std::move(a)) {
    if (axes.empty()) throw std::invalid_argument("SemiaxesN: need at least one axis");
    for (double x : axes) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw std::invalid_argument("SemiaxesN: axes must be positive and finite");
        }
    }
}

double ball_volume(int n) {
    if (n < 0) throw std::invalid_argument("ball_volume: n must be >= 0");
    return std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double kubota_constant(int n, int k) {
    if (k < 1 || k > n) throw std::invalid_argument("kubota_constant: need 1 <= k <= n");
    return binomial(n, k) * ball_volume(n) / (ball_volume(k) * ball_volume(n - k));
}

McEstimate mc_tsirelson(const SemiaxesN& s, int m, const McSpec& spec) {
    const int n = static_cast<int>(s.dim());
    if (m < 1 || m > n) throw std::invalid_argument("mc_tsirelson: need 1 <= m <= n");

    const double scale = std::pow(2.0 * kPi, 0.5 * m) / factorial(m);
    const std::size_t un = static_cast<std::size_t>(n);
    const std::size_t um = static_cast<std::size_t>(m);

    return run_streams(spec, [&, scale](StreamRng& rng) {
        // Column j is the j-th edge vector, coordinates scaled by the axes.
        std::vector<double> A(un * um);
        for (std::size_t j = 0; j < um; ++j) {
            for (std::size_t i = 0; i < un; ++i) {
                A[i * um + j] = s.axes[i] * rng.normal();
            }
        }
        return scale * parallelepiped_volume(A, un, um);
    });
}

McEstimate kubota_estimate(const Semiaxes& s, int k, const McSpec& spec) {
    if (k != 1 && k != 2) throw std::invalid_argument("kubota_estimate: k must be 1 or 2");
    const double c = kubota_constant(3, k);

    if (k == 1) {
        // Projection onto a line: a segment of length 2 h(nu).
        return run_streams(spec, [&, c](StreamRng& rng) {
            const auto u = rng.unit_direction();
            const double h = std::sqrt(s.a * s.a * u[0] * u[0] + s.b * s.b * u[1] * u[1] +
                                       s.c * s.c * u[2] * u[2]);
            return c * 2.0 * h;
        });
    }
    // Projection onto a plane with unit normal nu: shadow area of the ellipsoid.
    return run_streams(spec, [&, c](StreamRng& rng) {
        const auto u = rng.unit_direction();
        const double q = std::sqrt(u[0] * u[0] / (s.a * s.a) + u[1] * u[1] / (s.b * s.b) +
                                   u[2] * u[2] / (s.c * s.c));
        return c * kPi * s.a * s.b * s.c * q;
    });
}

double dist_point_ellipsoid(const std::array<double, 3>& p, const Semiaxes& s) {
    for (double x : p) {
        if (!std::isfinite(x)) throw std::invalid_argument("dist_point_ellipsoid: non-finite point");
    }
    const std::array<double, 3> ax{s.a, s.b, s.c};

    double level = 0.0;
    for (int i = 0; i < 3; ++i) level += p[i] * p[i] / (ax[i] * ax[i]);
    if (level <= 1.0) return 0.0;

    // F(lambda) = sum (a_i p_i / (a_i^2 + lambda))^2 - 1 is strictly
    // decreasing and convex on [0, inf) with F(0) > 0, so Newton from the
    // left converges monotonically; bisection guards the bracket anyway.
    auto f_df = [&](double lam) {
        double f = -1.0, df = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double r = ax[i] * p[i] / (ax[i] * ax[i] + lam);
            f += r * r;
            df += -2.0 * r * r / (ax[i] * ax[i] + lam);
        }
        return std::pair<double, double>(f, df);
    };

    double hi2 = 0.0;
    for (int i = 0; i < 3; ++i) hi2 += ax[i] * p[i] * ax[i] * p[i];
    double lo = 0.0, hi = std::sqrt(hi2);
    double lam = 0.0;
    for (int it = 0; it < 200; ++it) {
        const auto [f, df] = f_df(lam);
        if (std::abs(f) < 1e-15) break;
        if (f > 0.0) {
            lo = lam;
        } else {
            hi = lam;
        }
        double next = df != 0.0 ? lam - f / df : 0.5 * (lo + hi);
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        if (next == lam) break;
        lam = next;
    }

    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double qi = ax[i] * ax[i] * p[i] / (ax[i] * ax[i] + lam);
        d2 += (p[i] - qi) * (p[i] - qi);
    }
    return std::sqrt(d2);
}

SteinerCheck steiner_volume_check(const Semiaxes& s, double t, const McSpec& spec,
                                  const QuadratureSpec& quad) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw std::invalid_argument("steiner_volume_check: t must be positive and finite");
    }

    const std::array<double, 3> half{s.a + t, s.b + t, s.c + t};
    const double box = 8.0 * half[0] * half[1] * half[2];

    SteinerCheck out;
    out.mc = run_streams(spec, [&](StreamRng& rng) {
        const std::array<double, 3> p{half[0] * rng.uniform_sym(), half[1] * rng.uniform_sym(),
                                      half[2] * rng.uniform_sym()};
        return dist_point_ellipsoid(p, s) <= t ? box : 0.0;
    });

    const IntrinsicVolumes iv = forward(s, quad);
    out.polynomial = iv.v3 + 2.0 * iv.v2 * t + kPi * iv.v1 * t * t + kKappa3 * t * t * t;
    return out;
}

}  // namespace ellipvol
