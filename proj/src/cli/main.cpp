#include <CLI11.hpp>

#include <iostream>

#include "krausfold/cli.hpp"

namespace {

int emit(const kf::cli::CommandResult &r) {
    if (!r.report.is_null()) std::cout << r.report.dump(2) << '\n';
    if (!r.diagnostic.empty()) std::cerr << "krausfold: " << r.diagnostic << '\n';
    return r.exit_code;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"krausfold: incoherent Kraus-operator reduction and qutrit achievable-region sampling"};
    app.require_subcommand(1);

    std::string path;
    auto *verify = app.add_subcommand("verify", "Check completeness and incoherence of a Kraus-set file");
    verify->add_option("path", path, "Kraus-set JSON file")->required();

    std::string regime = "qubit-io";
    std::string out;
    auto *reduce = app.add_subcommand("reduce", "Reduce an incoherent Kraus set to the regime's operator bound");
    reduce->add_option("path", path, "Kraus-set JSON file")->required();
    reduce->add_option("--regime", regime, "qubit-io | qutrit-io | qutrit-sio")->required();
    reduce->add_option("--out", out, "Write the reduced set here");

    kf::cli::RegionArgs region_args;
    std::string section = "1,8", kind = "sio", csv, svg;
    auto *region = app.add_subcommand("region", "Sample final Bloch vectors reachable from a section state");
    region->add_option("--section", section, "Section coordinates i,j (1-8)")->required();
    region->add_option("--ti", region_args.ti, "Value of t_i")->required();
    region->add_option("--tj", region_args.tj, "Value of t_j")->required();
    region->add_option("--kind", kind, "sio | io")->check(CLI::IsMember({"sio", "io"}));
    region->add_option("--n", region_args.n, "Number of samples")->required();
    region->add_option("--seed", region_args.seed, "Random seed")->required();
    region->add_option("--csv", csv, "CSV output path")->required();
    region->add_option("--svg", svg, "Optional SVG scatter output path");
    region->add_option("--threads", region_args.threads, "Worker threads (default: KF_THREADS or all cores)");

    double rank_tol = 1e-9;
    auto *rank = app.add_subcommand("choi-rank", "Choi rank and eigenvalue tail of a channel");
    rank->add_option("path", path, "Kraus-set JSON file")->required();
    rank->add_option("--tol", rank_tol, "Relative eigenvalue threshold");

    std::uint64_t seed = 0;
    auto *sample = app.add_subcommand("sample", "Write a seeded random channel in canonical class layout");
    sample->add_option("--regime", regime, "qubit-io | qutrit-io | qutrit-sio")->required();
    sample->add_option("--seed", seed, "Random seed")->required();
    sample->add_option("--out", out, "Output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kf::cli::kExitInputError;
    }

    try {
        if (*verify) return emit(kf::cli::cmd_verify(path));
        if (*reduce)
            return emit(kf::cli::cmd_reduce(path, regime,
                                            out.empty() ? std::nullopt : std::optional<std::filesystem::path>(out)));
        if (*region) {
            const auto sec = kf::cli::parse_section(section);
            if (!sec) {
                std::cerr << "krausfold: invalid section '" << section << "'\n";
                return kf::cli::kExitInputError;
            }
            region_args.i = sec->first;
            region_args.j = sec->second;
            // Keep t_i attached to the coordinate the user named first.
            if (section.substr(0, section.find(',')) != std::to_string(sec->first))
                std::swap(region_args.ti, region_args.tj);
            region_args.kind = kind == "io" ? kf::ChannelKind::IO : kf::ChannelKind::SIO;
            region_args.csv = csv;
            if (!svg.empty()) region_args.svg = svg;
            return emit(kf::cli::cmd_region(region_args));
        }
        if (*rank) return emit(kf::cli::cmd_choi_rank(path, rank_tol));
        if (*sample) return emit(kf::cli::cmd_sample(regime, seed, out));
    } catch (const std::exception &e) {
        std::cerr << "krausfold: " << e.what() << '\n';
        return kf::cli::kExitVerifyFailed;
    }
    return kf::cli::kExitInputError;
}
