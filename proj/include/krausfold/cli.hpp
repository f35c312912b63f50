#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "krausfold/classes.hpp"
#include "krausfold/reduction.hpp"
#include "krausfold/sampler.hpp"

namespace kf::cli {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
    kExitPass = 0,
    kExitVerifyFailed = 1,  // verification failed, or input does not fit the regime
    kExitInputError = 2,    // unreadable file, malformed JSON, bad arguments
    kExitNotReduced = 3,
};

/// Machine-readable outcome of a subcommand. `report` serializes with sorted
/// keys, so identical inputs give byte-identical text.
struct CommandResult {
    int exit_code = kExitPass;
    nlohmann::json report;
    std::string diagnostic;  // human-readable reason for a non-zero exit
};

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// CPTP defect, per-operator incoherence and class lookup.
CommandResult cmd_verify(const std::filesystem::path &path);

/// Reduces the set in `path` under `regime` ("qubit-io", "qutrit-io" or
/// "qutrit-sio") and writes the result to `out` when given. Exit 0 for
/// Reduced and FallbackUsed, 3 for NotReduced, 1 when the input is not a
/// channel of the regime.
CommandResult cmd_reduce(const std::filesystem::path &path, std::string_view regime,
                         const std::optional<std::filesystem::path> &out);

struct RegionArgs {
    int i = 1, j = 8;  // 1-based section coordinates
    double ti = 0.5, tj = 0.5;
    ChannelKind kind = ChannelKind::SIO;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::filesystem::path csv;
    std::optional<std::filesystem::path> svg;
    unsigned threads = 0;
};

/// Samples the achievable region from the state with t_i, t_j set and writes
/// `sample,m1..m8,cond1..cond4,margin1..margin4` rows. A condition column is 1
/// (satisfied), 0 (violated) or empty (not applicable); margin2 holds the
/// signed residual -sqrt3 m7 + m8 - 2 sqrt3/3 on the (7,8) section.
CommandResult cmd_region(const RegionArgs &args);

/// Choi rank with the full eigenvalue list (descending) and its tail below the
/// rank threshold.
CommandResult cmd_choi_rank(const std::filesystem::path &path, double tol = 1e-9);

/// Writes one seeded random channel of the regime in canonical class layout.
CommandResult cmd_sample(std::string_view regime, std::uint64_t seed, const std::filesystem::path &out);

/// Parses "i,j" with 1 <= i, j <= 8 and i != j; returns the pair sorted.
std::optional<std::pair<int, int>> parse_section(std::string_view text);

}  // namespace kf::cli
