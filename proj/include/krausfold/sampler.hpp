#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "krausfold/bloch.hpp"
#include "krausfold/channel.hpp"
#include "krausfold/classes.hpp"

namespace kf {

struct SamplerConfig {
    Regime regime = Regime::QutritSIO15;
    std::uint64_t seed = 0;  // used by callers that build the generator from the config
    std::size_t max_retries = 16;
    /// Classes to populate (1-based); empty = all classes of the regime.
    std::vector<int> active_classes;
};

class RetriesExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Random operator set in the regime's class layouts, one operator per active
/// class in class order. For each column the coefficient vector across
/// operators is a complex Gaussian draw (real for column 1), projected
/// orthogonal to the earlier columns' vectors restricted to operators sending
/// both columns to the same row, then normalized. With all classes active the
/// result is a channel; columns no active class covers stay zero.
KrausSet sample_channel(const SamplerConfig &cfg, std::mt19937_64 &rng);
/// Convenience overload seeding the generator from cfg.seed.
KrausSet sample_channel(const SamplerConfig &cfg);

enum class ChannelKind { SIO, IO };

struct RegionRequest {
    BlochVector3 t{};
    std::size_t n_samples = 0;
    ChannelKind kind = ChannelKind::SIO;
    std::uint64_t seed = 0;
    /// Worker threads; 0 = KF_THREADS or the available hardware parallelism.
    unsigned threads = 0;
};

struct RegionPoint {
    std::size_t sample;
    BlochVector3 m;
    ConditionReport report;
};

struct RegionSummary {
    std::size_t n = 0;
    BlochVector3 min{};
    BlochVector3 max{};
    std::array<std::size_t, 4> violations{};  // per condition, applicable and unsatisfied
    std::array<double, 4> min_margin{};       // per condition over applicable points
    std::size_t retries = 0;                  // rejected masked Gram-Schmidt draws
};

struct RegionResult {
    std::vector<RegionPoint> points;
    RegionSummary summary;
};

/// Sample 0 is the identity channel, sample 1 full dephasing; the rest are
/// sampled channels of the requested kind. Samples are generated in chunks of
/// kRegionChunk, chunk k seeded from (seed, k), so output is independent of the
/// thread count. Throws PhysicalityError for an unphysical t.
inline constexpr std::size_t kRegionChunk = 256;
RegionResult sample_region(const RegionRequest &req);

/// Thread count from KF_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
unsigned default_thread_count();

/// Seed of chunk `chunk` for a run seeded with `seed` (splitmix64 mixing).
std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk);

}  // namespace kf
