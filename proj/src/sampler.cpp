#include "krausfold/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

namespace kf {

namespace {

constexpr double kRejectNorm = 1e-6;

struct DrawStats {
    std::size_t retries = 0;
};

KrausSet sample_channel_impl(const SamplerConfig &cfg, std::mt19937_64 &rng, DrawStats *stats) {
    if (cfg.max_retries < 1) throw std::invalid_argument("sample_channel: max_retries must be at least 1");
    const auto table = class_table(cfg.regime);
    std::vector<int> classes = cfg.active_classes;
    if (classes.empty())
        for (int k = 1; k <= static_cast<int>(table.size()); ++k) classes.push_back(k);
    for (int k : classes)
        if (k < 1 || k > static_cast<int>(table.size()))
            throw std::invalid_argument("sample_channel: class " + std::to_string(k) + " out of range");

    const std::size_t d = regime_dim(cfg.regime);
    const std::size_t n_ops = classes.size();
    auto row_of = [&](std::size_t op, std::size_t col) { return table[classes[op] - 1].rows[col]; };

    std::normal_distribution<double> gauss;
    std::vector<CVector> v(d, CVector(n_ops));
    for (std::size_t col = 0; col < d; ++col) {
        std::vector<std::size_t> support;
        for (std::size_t n = 0; n < n_ops; ++n)
            if (row_of(n, col) != Signature::kZeroColumn) support.push_back(n);
        if (support.empty()) continue;

        // Earlier columns restricted to operators where both columns share a row,
        // orthonormalized so a single projection pass suffices.
        std::vector<CVector> masked;
        for (std::size_t prev = 0; prev < col; ++prev) {
            CVector w(n_ops);
            for (std::size_t n : support)
                if (row_of(n, prev) == row_of(n, col)) w[n] = v[prev][n];
            for (int pass = 0; pass < 2; ++pass)
                for (const auto &q : masked) {
                    const Complex p = inner(q, w);
                    for (std::size_t n = 0; n < n_ops; ++n) w[n] -= p * q[n];
                }
            const double nw = norm(w);
            if (nw < 1e-12) continue;
            for (auto &z : w) z /= nw;
            masked.push_back(std::move(w));
        }

        bool accepted = false;
        for (std::size_t attempt = 0; attempt < cfg.max_retries && !accepted; ++attempt) {
            CVector x(n_ops);
            for (std::size_t n : support) {
                const double re = gauss(rng);
                const double im = col == 0 ? 0.0 : gauss(rng);
                x[n] = Complex(re, im);
            }
            for (int pass = 0; pass < 2; ++pass)
                for (const auto &q : masked) {
                    const Complex p = inner(q, x);
                    for (std::size_t n = 0; n < n_ops; ++n) x[n] -= p * q[n];
                }
            const double nx = norm(x);
            if (nx < kRejectNorm) {
                if (stats) ++stats->retries;
                continue;
            }
            for (auto &z : x) z /= nx;
            v[col] = std::move(x);
            accepted = true;
        }
        if (!accepted)
            throw RetriesExhausted("sample_channel: column " + std::to_string(col + 1) + " could not be drawn in " +
                                   std::to_string(cfg.max_retries) + " attempts");
    }

    std::vector<Matrix> ops;
    ops.reserve(n_ops);
    for (std::size_t n = 0; n < n_ops; ++n) {
        Matrix m(d, d);
        for (std::size_t col = 0; col < d; ++col)
            if (row_of(n, col) != Signature::kZeroColumn) m(row_of(n, col), col) = v[col][n];
        ops.push_back(std::move(m));
    }
    return KrausSet(d, ops);
}

KrausSet identity_channel() { return KrausSet(3, std::vector<Matrix>{Matrix::identity(3)}); }

KrausSet dephasing_channel() {
    std::vector<Matrix> ops;
    for (std::size_t i = 0; i < 3; ++i) {
        Matrix e(3, 3);
        e(i, i) = 1.0;
        ops.push_back(std::move(e));
    }
    return KrausSet(3, ops);
}

}  // namespace

KrausSet sample_channel(const SamplerConfig &cfg, std::mt19937_64 &rng) {
    return sample_channel_impl(cfg, rng, nullptr);
}

KrausSet sample_channel(const SamplerConfig &cfg) {
    std::mt19937_64 rng(cfg.seed);
    return sample_channel(cfg, rng);
}

std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk) {
    // splitmix64 over the pair.
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (chunk + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

unsigned default_thread_count() {
    if (const char *env = std::getenv("KF_THREADS")) {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

RegionResult sample_region(const RegionRequest &req) {
    bloch_to_density(req.t);  // validates physicality
    RegionResult out;
    out.points.resize(req.n_samples);
    const std::size_t n_chunks = (req.n_samples + kRegionChunk - 1) / kRegionChunk;
    const SamplerConfig cfg{req.kind == ChannelKind::SIO ? Regime::QutritSIO15 : Regime::QutritIO39, req.seed, 16,
                            {}};

    std::vector<std::size_t> chunk_retries(n_chunks, 0);
    std::atomic<std::size_t> next_chunk{0};
    auto worker = [&] {
        for (std::size_t chunk = next_chunk++; chunk < n_chunks; chunk = next_chunk++) {
            std::mt19937_64 rng(chunk_seed(req.seed, chunk));
            DrawStats stats;
            const std::size_t begin = chunk * kRegionChunk;
            const std::size_t end = std::min(req.n_samples, begin + kRegionChunk);
            for (std::size_t i = begin; i < end; ++i) {
                KrausSet channel;
                if (i == 0)
                    channel = identity_channel();
                else if (i == 1)
                    channel = dephasing_channel();
                else
                    channel = sample_channel_impl(cfg, rng, &stats);
                RegionPoint &p = out.points[i];
                p.sample = i;
                p.m = push_forward(channel, req.t);
                p.report = check_conditions(req.t, p.m);
            }
            chunk_retries[chunk] = stats.retries;
        }
    };
    const unsigned threads =
        std::max(1u, std::min<unsigned>(req.threads ? req.threads : default_thread_count(),
                                        static_cast<unsigned>(std::max<std::size_t>(n_chunks, 1))));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto &th : pool) th.join();
    }

    RegionSummary &s = out.summary;
    s.n = out.points.size();
    s.min.fill(std::numeric_limits<double>::infinity());
    s.max.fill(-std::numeric_limits<double>::infinity());
    s.min_margin.fill(std::numeric_limits<double>::infinity());
    if (s.n == 0) {
        s.min.fill(0.0);
        s.max.fill(0.0);
        s.min_margin.fill(0.0);
    }
    for (const auto &p : out.points) {
        for (int k = 0; k < 8; ++k) {
            s.min[k] = std::min(s.min[k], p.m[k]);
            s.max[k] = std::max(s.max[k], p.m[k]);
        }
        for (int c = 0; c < 4; ++c) {
            const auto &rec = p.report.conditions[c];
            if (!rec.applicable) continue;
            s.min_margin[c] = std::min(s.min_margin[c], rec.margin);
            if (!rec.satisfied) ++s.violations[c];
        }
    }
    for (auto &m : s.min_margin)
        if (std::isinf(m)) m = 0.0;
    for (std::size_t r : chunk_retries) s.retries += r;
    return out;
}

}  // namespace kf
